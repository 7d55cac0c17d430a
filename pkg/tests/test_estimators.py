"""Estimator façade tests: sklearn conventions, config validation,
training on tiny separable corpora, and checkpoint round-trips."""

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from gridstylo.corpus import Chunk
from gridstylo.errors import (
    ConfigError,
    MissingFile,
    SchemaViolation,
    ShapeMismatch,
)
from gridstylo.estimators import (
    CnnAuthorClassifier,
    DiscourseFeaturizer,
    SvmAuthorClassifier,
)
from gridstylo.featurize import SEP
from gridstylo.grid import AnnotationRecord, Mention, Role
from gridstylo.pipeline import AnnotatedChunk

from .conftest import make_excerpt_annotation


def subject_chain_annotation(doc_id: str) -> AnnotationRecord:
    # one persistent subject: GR tokens ss, ss
    mentions = [
        Mention(entity_id="e", sentence_index=i, role=Role.S) for i in range(3)
    ]
    return AnnotationRecord(doc_id=doc_id, n_sentences=3, mentions=mentions)


def role_swap_annotation(doc_id: str) -> AnnotationRecord:
    # alternating roles: GR tokens so, ox
    roles = [Role.S, Role.O, Role.X]
    mentions = [
        Mention(entity_id="e", sentence_index=i, role=r) for i, r in enumerate(roles)
    ]
    return AnnotationRecord(doc_id=doc_id, n_sentences=3, mentions=mentions)


def make_item(
    doc_id: str, author: str, text: str, ann: AnnotationRecord | None = None
) -> AnnotatedChunk:
    chunk = Chunk(doc_id=doc_id, author=author, words=text.split(), char_text=text)
    return AnnotatedChunk(chunk=chunk, annotation=ann)


def char_separable_corpus(n_per_author: int = 6):
    """Two authors over disjoint alphabets, each with a fixed grid habit."""
    rng = np.random.default_rng(42)
    items, labels = [], []
    for k in range(n_per_author):
        a_text = "".join(rng.choice(list("abcd ")) for _ in range(40))
        b_text = "".join(rng.choice(list("wxyz ")) for _ in range(40))
        items.append(make_item(f"a{k}", "ann", a_text, subject_chain_annotation(f"a{k}")))
        labels.append("ann")
        items.append(make_item(f"b{k}", "bob", b_text, role_swap_annotation(f"b{k}")))
        labels.append("bob")
    return items, labels


TINY_CNN = dict(
    epochs=25,
    batch_size=4,
    lr=0.01,
    keep_prob=1.0,
    emb_dim_char=8,
    emb_dim_disc=6,
    num_maps=4,
    num_maps_disc=3,
    windows=(2, 3),
    max_char_len=40,
    max_disc_len=8,
    seed=0,
)


class TestSklearnConventions:
    def test_get_params_round_trip(self):
        est = CnnAuthorClassifier(model="cnn2-pv", disc="gr", epochs=3)
        params = est.get_params()
        assert params["model"] == "cnn2-pv"
        assert params["disc"] == "gr"
        assert params["epochs"] == 3
        rebuilt = CnnAuthorClassifier(**params)
        assert rebuilt.get_params() == params

    def test_set_params_chains(self):
        est = SvmAuthorClassifier()
        out = est.set_params(model="svm2-pv", disc="gr")
        assert out is est
        assert est.model == "svm2-pv"

    def test_clone_is_unfitted_copy(self):
        items, labels = char_separable_corpus(2)
        est = SvmAuthorClassifier().fit(items, labels)
        fresh = clone(est)
        assert fresh.get_params() == est.get_params()
        with pytest.raises(NotFittedError):
            fresh.predict(items)

    def test_transformer_clone(self):
        t = DiscourseFeaturizer(disc="gr", reading="global")
        assert clone(t).get_params() == t.get_params()


class TestConfigValidation:
    def test_plain_model_rejects_disc(self):
        items, labels = char_separable_corpus(2)
        with pytest.raises(ConfigError):
            CnnAuthorClassifier(model="cnn2", disc="gr", **TINY_CNN).fit(items, labels)
        with pytest.raises(ConfigError):
            SvmAuthorClassifier(model="svm2", disc="gr").fit(items, labels)

    def test_pv_model_requires_disc(self):
        items, labels = char_separable_corpus(2)
        with pytest.raises(ConfigError):
            CnnAuthorClassifier(model="cnn2-pv", disc="none", **TINY_CNN).fit(
                items, labels
            )
        with pytest.raises(ConfigError):
            SvmAuthorClassifier(model="svm2-pv", disc="none").fit(items, labels)

    def test_de_model_requires_reading(self):
        items, labels = char_separable_corpus(2)
        with pytest.raises(ConfigError):
            CnnAuthorClassifier(model="cnn2-de", disc="gr", **TINY_CNN).fit(
                items, labels
            )

    def test_reading_belongs_to_de_only(self):
        items, labels = char_separable_corpus(2)
        with pytest.raises(ConfigError):
            CnnAuthorClassifier(
                model="cnn2-pv", disc="gr", reading="local", **TINY_CNN
            ).fit(items, labels)

    def test_edu_order_requires_rst(self):
        items, labels = char_separable_corpus(2)
        with pytest.raises(ConfigError):
            CnnAuthorClassifier(
                model="cnn2-de", disc="gr", reading="edu-order", **TINY_CNN
            ).fit(items, labels)

    def test_unknown_model_name(self):
        items, labels = char_separable_corpus(2)
        with pytest.raises(ConfigError):
            CnnAuthorClassifier(model="cnn5", **TINY_CNN).fit(items, labels)

    def test_missing_annotations_surface_early(self):
        items, labels = char_separable_corpus(2)
        bare = [AnnotatedChunk(chunk=i.chunk, annotation=None) for i in items]
        with pytest.raises(MissingFile):
            CnnAuthorClassifier(model="cnn2-pv", disc="gr", **TINY_CNN).fit(
                bare, labels
            )

    def test_empty_input(self):
        with pytest.raises(SchemaViolation):
            CnnAuthorClassifier(**TINY_CNN).fit([], [])

    def test_label_length_mismatch(self):
        items, labels = char_separable_corpus(2)
        with pytest.raises(ShapeMismatch):
            SvmAuthorClassifier().fit(items, labels[:-1])

    def test_non_chunk_items_rejected(self):
        with pytest.raises(SchemaViolation):
            SvmAuthorClassifier().fit(["text"], ["a"])


class TestCnnClassifier:
    def test_char_separable_training(self):
        items, labels = char_separable_corpus()
        est = CnnAuthorClassifier(model="cnn2", **TINY_CNN).fit(items, labels)
        assert est.classes_ == ["ann", "bob"]
        assert (est.predict(items) == np.asarray(labels)).all()
        probs = est.predict_proba(items)
        assert probs.shape == (len(items), 2)
        np.testing.assert_allclose(probs.sum(axis=1), 1.0, atol=1e-5)

    def test_predict_before_fit(self):
        items, _ = char_separable_corpus(2)
        with pytest.raises(NotFittedError):
            CnnAuthorClassifier(**TINY_CNN).predict(items)

    def test_pv_variant_fits(self):
        items, labels = char_separable_corpus(3)
        est = CnnAuthorClassifier(model="cnn2-pv", disc="gr", **TINY_CNN).fit(
            items, labels
        )
        assert est.pv_vocab_ is None  # gr vectors use the fixed transition order
        assert est.predict_proba(items).shape == (len(items), 2)

    def test_de_variant_builds_disc_vocab(self):
        items, labels = char_separable_corpus(3)
        est = CnnAuthorClassifier(
            model="cnn2-de", disc="gr", reading="global", **TINY_CNN
        ).fit(items, labels)
        assert SEP in est.disc_vocab_.index
        assert {"ss", "so", "ox"} <= set(est.disc_vocab_.index)
        assert est.predict(items).shape == (len(items),)

    def test_loss_trace_recorded(self):
        items, labels = char_separable_corpus(2)
        est = CnnAuthorClassifier(model="cnn2", **TINY_CNN).fit(items, labels)
        assert len(est.loss_trace_) == TINY_CNN["epochs"]
        assert all(np.isfinite(v) for v in est.loss_trace_)

    def test_seed_reproducibility(self):
        items, labels = char_separable_corpus(3)
        a = CnnAuthorClassifier(model="cnn2", **TINY_CNN).fit(items, labels)
        b = CnnAuthorClassifier(model="cnn2", **TINY_CNN).fit(items, labels)
        np.testing.assert_array_equal(a.predict_proba(items), b.predict_proba(items))

    def test_save_load_identical_probabilities(self, tmp_path):
        items, labels = char_separable_corpus(3)
        est = CnnAuthorClassifier(model="cnn2", **TINY_CNN).fit(items, labels)
        path = tmp_path / "cnn.ckpt"
        est.save(path)
        assert (tmp_path / "cnn.ckpt.vocab.json").exists()
        loaded = CnnAuthorClassifier.load(path)
        assert loaded.get_params() == {
            **est.get_params(),
            "windows": list(est.get_params()["windows"]),
        }
        assert loaded.classes_ == est.classes_
        np.testing.assert_array_equal(
            loaded.predict_proba(items), est.predict_proba(items)
        )

    def test_save_load_de_variant(self, tmp_path):
        items, labels = char_separable_corpus(3)
        est = CnnAuthorClassifier(
            model="cnn2-de", disc="gr", reading="local", **TINY_CNN
        ).fit(items, labels)
        path = tmp_path / "de.ckpt"
        est.save(path)
        loaded = CnnAuthorClassifier.load(path)
        assert loaded.disc_vocab_.index == est.disc_vocab_.index
        np.testing.assert_array_equal(
            loaded.predict_proba(items), est.predict_proba(items)
        )


class TestSvmClassifier:
    def test_char_separable_training(self):
        items, labels = char_separable_corpus()
        est = SvmAuthorClassifier().fit(items, labels)
        assert (est.predict(items) == np.asarray(labels)).all()
        assert est.linear_.stop_reasons == ["tol", "tol"]

    def test_decision_function_shape(self):
        items, labels = char_separable_corpus(3)
        est = SvmAuthorClassifier().fit(items, labels)
        assert est.decision_function(items).shape == (len(items), 2)

    def test_pv_variant_appends_features(self):
        items, labels = char_separable_corpus(3)
        plain = SvmAuthorClassifier().fit(items, labels)
        with_pv = SvmAuthorClassifier(model="svm2-pv", disc="gr").fit(items, labels)
        assert with_pv.linear_.dim == plain.linear_.dim + 16

    def test_save_load_identical_scores(self, tmp_path):
        items, labels = char_separable_corpus(3)
        est = SvmAuthorClassifier(model="svm2-pv", disc="gr").fit(items, labels)
        path = tmp_path / "svm.ckpt"
        est.save(path)
        loaded = SvmAuthorClassifier.load(path)
        assert loaded.get_params() == est.get_params()
        np.testing.assert_array_equal(
            loaded.decision_function(items), est.decision_function(items)
        )

    def test_predict_before_fit(self):
        items, _ = char_separable_corpus(2)
        with pytest.raises(NotFittedError):
            SvmAuthorClassifier().predict(items)


class TestDiscourseFeaturizer:
    def test_rows_have_expected_fields(self):
        items, _ = char_separable_corpus(2)
        rows = DiscourseFeaturizer(disc="gr", reading="global").fit(items).transform(items)
        assert len(rows) == len(items)
        first = rows[0]
        assert set(first) == {"doc_id", "author", "pv", "de"}
        assert len(first["pv"]) == 16
        assert first["de"] == ["ss", "ss"]

    def test_disc_none_emits_nulls(self):
        items, _ = char_separable_corpus(2)
        rows = DiscourseFeaturizer(disc="none").fit(items).transform(items)
        assert all(r["pv"] is None and r["de"] is None for r in rows)

    def test_no_reading_skips_de(self):
        items, _ = char_separable_corpus(2)
        rows = DiscourseFeaturizer(disc="gr").fit(items).transform(items)
        assert all(r["pv"] is not None and r["de"] is None for r in rows)

    def test_rst_fits_vocab(self):
        ann = make_excerpt_annotation()
        items = [make_item("d0", "ann", "some text here", ann)]
        feat = DiscourseFeaturizer(disc="rst", reading="global").fit(items)
        assert feat.pv_vocab_ is not None
        rows = feat.transform(items)
        assert rows[0]["de"].count(SEP) == 1

    def test_transform_before_fit(self):
        items, _ = char_separable_corpus(2)
        with pytest.raises(NotFittedError):
            DiscourseFeaturizer(disc="gr").transform(items)

    def test_disc_none_with_reading_rejected(self):
        items, _ = char_separable_corpus(2)
        with pytest.raises(ConfigError):
            DiscourseFeaturizer(disc="none", reading="local").fit(items)
