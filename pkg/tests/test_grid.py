from __future__ import annotations

import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from gridstylo.errors import MissingRelations, SchemaViolation
from gridstylo.grid import (
    AnnotationRecord,
    Mention,
    RelationLabel,
    Role,
    annotation_to_json,
    build_gr_grid,
    build_rst_grid,
    load_annotation,
    parse_annotation,
    slice_annotation,
    validate_grid,
)

from .conftest import rel


class TestRelationLabel:
    def test_render_round_trip(self):
        label = RelationLabel.parse("elaboration.N")
        assert (label.relation, label.nuclearity) == ("elaboration", "N")
        assert label.render() == "elaboration.N"

    @pytest.mark.parametrize("bad", ["Elaboration.N", "elab", "elab.X", "elab.n", ".N"])
    def test_malformed_rejected(self, bad):
        with pytest.raises(SchemaViolation):
            RelationLabel.parse(bad)


class TestBuildGrGrid:
    def test_excerpt_grid(self, excerpt_annotation, excerpt_grid):
        assert build_gr_grid(excerpt_annotation) == excerpt_grid

    def test_highest_rank_wins_within_sentence(self):
        ann = AnnotationRecord(
            doc_id="d",
            n_sentences=2,
            mentions=[
                Mention("e", 0, Role.O),
                Mention("e", 0, Role.S),
                Mention("e", 1, Role.X),
            ],
        )
        grid = build_gr_grid(ann)
        assert grid.cells == [[Role.S], [Role.X]]

    def test_single_mention_entity_excluded(self):
        ann = AnnotationRecord(
            doc_id="d", n_sentences=2, mentions=[Mention("only", 0, Role.S)]
        )
        grid = build_gr_grid(ann)
        assert grid.entity_ids == []
        assert grid.cells == [[], []]

    def test_two_mentions_same_sentence_not_salient(self):
        ann = AnnotationRecord(
            doc_id="d",
            n_sentences=2,
            mentions=[Mention("e", 0, Role.S), Mention("e", 0, Role.O)],
        )
        assert build_gr_grid(ann).entity_ids == []

    def test_columns_in_debut_order(self):
        ann = AnnotationRecord(
            doc_id="d",
            n_sentences=3,
            mentions=[
                Mention("late", 1, Role.S),
                Mention("late", 2, Role.S),
                Mention("early", 0, Role.X),
                Mention("early", 2, Role.O),
            ],
        )
        assert build_gr_grid(ann).entity_ids == ["early", "late"]

    @given(seed=st.integers(0, 2**31 - 1))
    def test_invariant_to_mention_order(self, seed):
        import random

        from .conftest import make_excerpt_annotation

        baseline = make_excerpt_annotation()
        shuffled = make_excerpt_annotation()
        random.Random(seed).shuffle(shuffled.mentions)
        assert build_gr_grid(shuffled) == build_gr_grid(baseline)

    @given(
        mentions=st.lists(
            st.tuples(
                st.sampled_from(["a", "b", "c"]),
                st.integers(0, 3),
                st.sampled_from([Role.S, Role.O, Role.X]),
            ),
            max_size=12,
        )
    )
    def test_salience_invariant(self, mentions):
        ann = AnnotationRecord(
            doc_id="d",
            n_sentences=4,
            mentions=[Mention(e, s, r) for e, s, r in mentions],
        )
        grid = build_gr_grid(ann)
        for j in range(grid.n_entities):
            non_dash = sum(1 for role in grid.column(j) if role is not Role.DASH)
            assert non_dash >= 2


class TestBuildRstGrid:
    def test_two_sentence_column(self):
        ann = AnnotationRecord(
            doc_id="d",
            n_sentences=2,
            mentions=[
                Mention("e", 0, Role.S, [rel("elaboration.N")]),
                Mention("e", 1, Role.O, [rel("attribution.S")]),
            ],
        )
        grid = build_rst_grid(ann)
        assert grid.column(0) == [[rel("elaboration.N")], [rel("attribution.S")]]

    def test_same_sentence_mentions_concatenate_in_order(self):
        ann = AnnotationRecord(
            doc_id="d",
            n_sentences=2,
            mentions=[
                Mention("e", 0, Role.S, [rel("a.N")]),
                Mention("e", 0, Role.O, [rel("b.S")]),
                Mention("e", 1, Role.X, [rel("c.N")]),
            ],
        )
        grid = build_rst_grid(ann)
        assert grid.cells[0][0] == [rel("a.N"), rel("b.S")]

    def test_non_salient_relations_absent(self):
        ann = AnnotationRecord(
            doc_id="d",
            n_sentences=2,
            mentions=[
                Mention("keep", 0, Role.S, [rel("a.N")]),
                Mention("keep", 1, Role.S, [rel("b.S")]),
                Mention("drop", 0, Role.S, [rel("zzz.N")]),
            ],
        )
        grid = build_rst_grid(ann)
        rendered = {r.render() for row in grid.cells for cell in row for r in cell}
        assert "zzz.N" not in rendered

    def test_strict_mode_requires_relations(self):
        ann = AnnotationRecord(
            doc_id="d",
            n_sentences=2,
            mentions=[Mention("e", 0, Role.S, []), Mention("e", 1, Role.O, [rel("a.N")])],
        )
        build_rst_grid(ann)
        with pytest.raises(MissingRelations):
            build_rst_grid(ann, strict=True)

    def test_excerpt_cells(self, excerpt_annotation):
        grid = build_rst_grid(excerpt_annotation)
        assert grid.entity_ids == ["father", "mother"]
        flat = [
            [r.render() for r in grid.cells[i][j]]
            for i in range(3)
            for j in range(2)
        ]
        assert flat == [
            ["elaboration.N", "elaboration.S", "background.S"],
            [],
            ["contrast.S"],
            ["contrast.N"],
            ["attribution.S"],
            ["condition.S", "condition.N", "attribution.N", "joint.N"],
        ]


class TestValidateGrid:
    def test_ok_grid(self, excerpt_grid):
        assert validate_grid(excerpt_grid) == []

    def test_salience_violation_reported(self, excerpt_grid):
        excerpt_grid.cells[1][1] = Role.DASH
        excerpt_grid.cells[2][1] = Role.DASH
        violations = validate_grid(excerpt_grid)
        assert any("salience" in v for v in violations)

    def test_ragged_shape_reported(self, excerpt_grid):
        excerpt_grid.cells[0] = [Role.S]
        violations = validate_grid(excerpt_grid)
        assert any("shape" in v for v in violations)


class TestAnnotationIo:
    def test_round_trip(self, tmp_path, excerpt_annotation):
        path = tmp_path / "ann.json"
        path.write_text(json.dumps(annotation_to_json(excerpt_annotation)))
        loaded = load_annotation(path)
        assert loaded == excerpt_annotation

    @pytest.mark.parametrize(
        "mutate",
        [
            lambda d: d.pop("doc_id"),
            lambda d: d.update(n_sentences=-1),
            lambda d: d["mentions"][0].update(role="verb"),
            lambda d: d["mentions"][0].update(sentence_index=99),
            lambda d: d["mentions"][0].update(relations=["BadLabel"]),
        ],
    )
    def test_schema_violations(self, excerpt_annotation, mutate):
        payload = annotation_to_json(excerpt_annotation)
        mutate(payload)
        with pytest.raises(SchemaViolation):
            parse_annotation(payload)

    def test_missing_edu_sequence_loads_as_none(self, excerpt_annotation):
        payload = annotation_to_json(excerpt_annotation)
        del payload["edu_sequence"]
        assert parse_annotation(payload).edu_sequence is None


class TestSliceAnnotation:
    def test_sentences_rebased_per_chunk(self, excerpt_annotation):
        # 90-word doc, three 30-word chunks; sentence k of 3 sits in chunk k
        spans = [(0, 30), (30, 60), (60, 90)]
        parts = slice_annotation(excerpt_annotation, spans, total_words=90)
        assert [p.doc_id for p in parts] == [
            "excerpt:0000",
            "excerpt:0001",
            "excerpt:0002",
        ]
        assert [p.n_sentences for p in parts] == [1, 1, 1]
        assert {m.entity_id for m in parts[0].mentions} == {"father"}
        assert all(m.sentence_index == 0 for p in parts for m in p.mentions)

    def test_two_chunk_split_keeps_transitions(self, excerpt_annotation):
        # chunk 0 owns sentences 0-1, chunk 1 owns sentence 2
        parts = slice_annotation(excerpt_annotation, [(0, 60), (60, 90)], total_words=90)
        assert parts[0].n_sentences == 2
        assert {m.sentence_index for m in parts[0].mentions} == {0, 1}

    def test_edu_sequence_partitioned(self, excerpt_annotation):
        parts = slice_annotation(excerpt_annotation, [(0, 60), (60, 90)], total_words=90)
        assert [r.render() for r in parts[0].edu_sequence] == [
            "elaboration.N",
            "contrast.S",
        ]
        assert [r.render() for r in parts[1].edu_sequence] == ["attribution.N"]

    def test_no_edu_sequence_stays_none(self, excerpt_annotation):
        excerpt_annotation.edu_sequence = None
        parts = slice_annotation(excerpt_annotation, [(0, 90)], total_words=90)
        assert parts[0].edu_sequence is None

    def test_dropped_tail_discards_units(self, excerpt_annotation):
        # only the first chunk is kept; sentence 2's mentions vanish
        parts = slice_annotation(excerpt_annotation, [(0, 45)], total_words=90)
        assert len(parts) == 1
        assert {m.sentence_index for m in parts[0].mentions} <= {0}
