"""Scikit-learn style estimators over annotated chunks.

X is always a list of AnnotatedChunk; y a list of author labels. Fitting
builds every vocabulary from the training chunks only, so cross-validation
through these classes cannot leak test-fold tokens.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.exceptions import NotFittedError

from . import models, svm
from ._validate import (
    ensure_annotated_chunks,
    ensure_annotations_present,
    ensure_labels,
    validate_combo,
)
from .errors import CorruptCheckpoint
from .featurize import SEP, Vocab, build_vocab
from .models import Batch, TrainConfig, pad_or_truncate
from .pipeline import (
    AnnotatedChunk,
    chunk_bigram_tokens,
    chunk_relation_tokens,
    discourse_tokens,
    grid_pv,
)


def _encode_labels(y: list[str]) -> tuple[list[str], np.ndarray]:
    classes = sorted(set(y))
    index = {c: i for i, c in enumerate(classes)}
    return classes, np.array([index[v] for v in y], dtype=np.int64)


def _fit_rst_vocab(chunks: list[AnnotatedChunk], min_count: int) -> Vocab:
    return build_vocab(
        (chunk_relation_tokens(c.annotation) for c in chunks), min_count=min_count
    )


class CnnAuthorClassifier(ClassifierMixin, BaseEstimator):
    """Char-bigram convolutional classifier, optionally extended with a
    grid probability vector (cnn2-pv) or a parallel discourse-sequence
    branch (cnn2-de)."""

    def __init__(
        self,
        model: str = "cnn2",
        disc: str = "none",
        reading: str | None = None,
        adjacent_only: bool = False,
        epochs: int = 50,
        batch_size: int = 32,
        lr: float = 0.001,
        keep_prob: float = 0.75,
        emb_dim_char: int = 50,
        emb_dim_disc: int = 20,
        num_maps: int = 100,
        num_maps_disc: int = 100,
        windows: tuple[int, ...] = (3, 4, 5),
        activation: str = "relu",
        max_char_len: int = 2200,
        max_disc_len: int = 256,
        min_count: int = 1,
        seed: int = 0,
    ):
        self.model = model
        self.disc = disc
        self.reading = reading
        self.adjacent_only = adjacent_only
        self.epochs = epochs
        self.batch_size = batch_size
        self.lr = lr
        self.keep_prob = keep_prob
        self.emb_dim_char = emb_dim_char
        self.emb_dim_disc = emb_dim_disc
        self.num_maps = num_maps
        self.num_maps_disc = num_maps_disc
        self.windows = windows
        self.activation = activation
        self.max_char_len = max_char_len
        self.max_disc_len = max_disc_len
        self.min_count = min_count
        self.seed = seed

    def _train_config(self) -> TrainConfig:
        return TrainConfig(
            epochs=self.epochs,
            batch_size=self.batch_size,
            lr=self.lr,
            keep_prob=self.keep_prob,
            emb_dim_char=self.emb_dim_char,
            emb_dim_disc=self.emb_dim_disc,
            num_maps=self.num_maps,
            num_maps_disc=self.num_maps_disc,
            windows=list(self.windows),
            disc_windows=list(self.windows),
            activation=self.activation,
            seed=self.seed,
            max_char_len=self.max_char_len,
            max_disc_len=self.max_disc_len,
        )

    def _char_rows(self, chunks: list[AnnotatedChunk]) -> np.ndarray:
        return np.stack(
            [
                pad_or_truncate(
                    self.char_vocab_.encode(chunk_bigram_tokens(c)), self.max_char_len
                )
                for c in chunks
            ]
        )

    def _disc_rows(self, chunks: list[AnnotatedChunk]) -> np.ndarray:
        return np.stack(
            [
                pad_or_truncate(
                    self.disc_vocab_.encode(
                        discourse_tokens(
                            c.annotation, self.disc, self.reading, self.adjacent_only
                        ).tokens
                    ),
                    self.max_disc_len,
                )
                for c in chunks
            ]
        )

    def _pv_rows(self, chunks: list[AnnotatedChunk]) -> np.ndarray:
        return np.array(
            [grid_pv(c.annotation, self.disc, self.pv_vocab_).probs for c in chunks],
            dtype=np.float32,
        )

    def _batch(self, chunks: list[AnnotatedChunk], labels: np.ndarray | None) -> Batch:
        return Batch(
            char=self._char_rows(chunks),
            disc=self._disc_rows(chunks) if self.model == "cnn2-de" else None,
            pv=self._pv_rows(chunks) if self.model == "cnn2-pv" else None,
            labels=labels,
        )

    def fit(self, X, y) -> "CnnAuthorClassifier":
        validate_combo(self.model, self.disc, self.reading)
        if self.model not in models.MODEL_KINDS:
            raise ValueError(f"{self.model!r} is not a convolutional model")
        chunks = ensure_annotated_chunks(X)
        labels = ensure_labels(y, len(chunks))
        if self.disc != "none":
            ensure_annotations_present(chunks, self.model)
        self.classes_, y_idx = _encode_labels(labels)
        self.char_vocab_ = build_vocab(
            (chunk_bigram_tokens(c) for c in chunks), min_count=self.min_count
        )
        self.disc_vocab_ = None
        self.pv_vocab_ = None
        if self.model == "cnn2-de":
            streams = [
                discourse_tokens(c.annotation, self.disc, self.reading, self.adjacent_only)
                for c in chunks
            ]
            self.disc_vocab_ = build_vocab(streams, min_count=self.min_count)
            if self.reading == "global" and SEP not in self.disc_vocab_.index:
                self.disc_vocab_.index[SEP] = len(self.disc_vocab_.index)
        elif self.model == "cnn2-pv" and self.disc == "rst":
            self.pv_vocab_ = _fit_rst_vocab(chunks, self.min_count)
        data = self._batch(chunks, y_idx)
        self.params_, self.loss_trace_ = models.train(
            self.model,
            data,
            self._train_config(),
            char_vocab_size=len(self.char_vocab_),
            disc_vocab_size=None if self.disc_vocab_ is None else len(self.disc_vocab_),
        )
        return self

    def _check_fitted(self) -> None:
        if not hasattr(self, "params_"):
            raise NotFittedError("fit must run before predict")

    def predict_proba(self, X) -> np.ndarray:
        self._check_fitted()
        chunks = ensure_annotated_chunks(X)
        if self.disc != "none":
            ensure_annotations_present(chunks, self.model)
        return models.predict_proba(self.params_, self._batch(chunks, None))

    def predict(self, X) -> np.ndarray:
        probs = self.predict_proba(X)
        return np.asarray(self.classes_)[probs.argmax(axis=1)]

    def save(self, path) -> None:
        self._check_fitted()
        meta = {
            "char_vocab": self.char_vocab_.tokens,
            "disc_vocab": (
                self.disc_vocab_.tokens
                if self.disc_vocab_ is not None
                else self.pv_vocab_.tokens if self.pv_vocab_ is not None else None
            ),
            "classes": list(self.classes_),
            "estimator_params": _jsonable_params(self.get_params()),
            "loss_trace": [float(v) for v in self.loss_trace_],
        }
        models.save_checkpoint(self.params_, meta, path)

    @classmethod
    def load(cls, path) -> "CnnAuthorClassifier":
        params, meta = models.load_checkpoint(path)
        est = cls(**meta["estimator_params"])
        if est.model != params.kind:
            raise CorruptCheckpoint(
                f"{path}: header kind {params.kind!r} != saved params {est.model!r}"
            )
        est.params_ = params
        est.classes_ = list(meta["classes"])
        est.char_vocab_ = Vocab.from_tokens(meta["char_vocab"])
        est.disc_vocab_ = None
        est.pv_vocab_ = None
        if meta["disc_vocab"] is not None:
            restored = Vocab.from_tokens(meta["disc_vocab"])
            if est.model == "cnn2-de":
                est.disc_vocab_ = restored
            else:
                est.pv_vocab_ = restored
        est.loss_trace_ = meta.get("loss_trace", [])
        return est


class SvmAuthorClassifier(ClassifierMixin, BaseEstimator):
    """Linear one-vs-rest baseline on L2-normalized char-bigram counts,
    optionally with the grid probability vector appended (svm2-pv)."""

    def __init__(
        self,
        model: str = "svm2",
        disc: str = "none",
        tol: float = 1e-5,
        max_iter: int = 1500,
        c_reg: float = 1.0,
        min_count: int = 1,
        seed: int = 0,
    ):
        self.model = model
        self.disc = disc
        self.tol = tol
        self.max_iter = max_iter
        self.c_reg = c_reg
        self.min_count = min_count
        self.seed = seed

    def _features(self, chunks: list[AnnotatedChunk]) -> np.ndarray:
        vectors = [
            svm.bigram_counts(chunk_bigram_tokens(c), self.char_vocab_) for c in chunks
        ]
        if self.model == "svm2-pv":
            vectors = [
                svm.append_pv(v, grid_pv(c.annotation, self.disc, self.pv_vocab_))
                for v, c in zip(vectors, chunks)
            ]
        return svm.stack_features(vectors)

    def fit(self, X, y) -> "SvmAuthorClassifier":
        validate_combo(self.model, self.disc, None)
        if self.model not in ("svm2", "svm2-pv"):
            raise ValueError(f"{self.model!r} is not a linear model")
        chunks = ensure_annotated_chunks(X)
        labels = ensure_labels(y, len(chunks))
        if self.disc != "none":
            ensure_annotations_present(chunks, self.model)
        self.classes_, y_idx = _encode_labels(labels)
        self.char_vocab_ = build_vocab(
            (chunk_bigram_tokens(c) for c in chunks), min_count=self.min_count
        )
        self.pv_vocab_ = (
            _fit_rst_vocab(chunks, self.min_count) if self.disc == "rst" else None
        )
        self.linear_ = svm.train_linear(
            self._features(chunks), y_idx,
            tol=self.tol, max_iter=self.max_iter, c_reg=self.c_reg,
        )
        return self

    def _check_fitted(self) -> None:
        if not hasattr(self, "linear_"):
            raise NotFittedError("fit must run before predict")

    def decision_function(self, X) -> np.ndarray:
        self._check_fitted()
        chunks = ensure_annotated_chunks(X)
        if self.disc != "none":
            ensure_annotations_present(chunks, self.model)
        return svm.decision_scores(self.linear_, self._features(chunks))

    def predict(self, X) -> np.ndarray:
        scores = self.decision_function(X)
        return np.asarray(self.classes_)[scores.argmax(axis=1)]

    def save(self, path) -> None:
        self._check_fitted()
        meta = {
            "char_vocab": self.char_vocab_.tokens,
            "pv_vocab": None if self.pv_vocab_ is None else self.pv_vocab_.tokens,
            "classes": list(self.classes_),
            "estimator_params": _jsonable_params(self.get_params()),
        }
        svm.save_linear(self.linear_, meta, path)

    @classmethod
    def load(cls, path) -> "SvmAuthorClassifier":
        linear, meta = svm.load_linear(path)
        est = cls(**meta["estimator_params"])
        est.linear_ = linear
        est.classes_ = list(meta["classes"])
        est.char_vocab_ = Vocab.from_tokens(meta["char_vocab"])
        est.pv_vocab_ = (
            None if meta["pv_vocab"] is None else Vocab.from_tokens(meta["pv_vocab"])
        )
        return est


class DiscourseFeaturizer(TransformerMixin, BaseEstimator):
    """Transformer producing, per chunk, the probability vector and the
    discourse token stream for the configured grid reading."""

    def __init__(
        self,
        disc: str = "gr",
        reading: str | None = None,
        adjacent_only: bool = False,
        min_count: int = 1,
    ):
        self.disc = disc
        self.reading = reading
        self.adjacent_only = adjacent_only
        self.min_count = min_count

    def fit(self, X, y=None) -> "DiscourseFeaturizer":
        validate_combo(None, self.disc, self.reading)
        chunks = ensure_annotated_chunks(X)
        self.pv_vocab_ = None
        if self.disc != "none":
            ensure_annotations_present(chunks, "featurization")
            if self.disc == "rst":
                self.pv_vocab_ = _fit_rst_vocab(chunks, self.min_count)
        self.fitted_ = True
        return self

    def transform(self, X) -> list[dict]:
        if not hasattr(self, "fitted_"):
            raise NotFittedError("fit must run before transform")
        chunks = ensure_annotated_chunks(X)
        rows = []
        for c in chunks:
            pv = de = None
            if self.disc != "none":
                ensure_annotations_present([c], "featurization")
                pv = list(grid_pv(c.annotation, self.disc, self.pv_vocab_).probs)
                if self.reading is not None:
                    de = list(
                        discourse_tokens(
                            c.annotation, self.disc, self.reading, self.adjacent_only
                        ).tokens
                    )
            rows.append(
                {"doc_id": c.chunk.id, "author": c.author, "pv": pv, "de": de}
            )
        return rows


def _jsonable_params(params: dict) -> dict:
    return {
        k: list(v) if isinstance(v, tuple) else v for k, v in params.items()
    }
