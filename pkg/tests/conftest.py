"""Shared fixtures: the hand-worked three-sentence excerpt and tiny corpora."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from gridstylo.grid import (
    AnnotationRecord,
    EntityGrid,
    Mention,
    RelationLabel,
    Role,
)


def rel(text: str) -> RelationLabel:
    return RelationLabel.parse(text)


def make_excerpt_annotation(doc_id: str = "excerpt") -> AnnotationRecord:
    """Three-sentence novel excerpt with two salient entities.

    father: subject in s0 (plus two object pronouns), object in s1,
    possessive ("other") in s2. mother: subject in s1, subject in s2
    (plus two "other" pronouns). Expected grid rows:
    [S, -], [O, S], [X, S].
    """
    return AnnotationRecord(
        doc_id=doc_id,
        n_sentences=3,
        mentions=[
            Mention("father", 0, Role.S, [rel("elaboration.N")]),
            Mention("father", 0, Role.O, [rel("elaboration.S")]),
            Mention("father", 0, Role.O, [rel("background.S")]),
            Mention("mother", 1, Role.S, [rel("contrast.N")]),
            Mention("father", 1, Role.O, [rel("contrast.S")]),
            Mention("mother", 2, Role.X, [rel("condition.S")]),
            Mention("mother", 2, Role.S, [rel("condition.N")]),
            Mention("mother", 2, Role.S, [rel("attribution.N")]),
            Mention("father", 2, Role.X, [rel("attribution.S")]),
            Mention("mother", 2, Role.X, [rel("joint.N")]),
        ],
        edu_sequence=[rel("elaboration.N"), rel("contrast.S"), rel("attribution.N")],
    )


@pytest.fixture
def excerpt_annotation() -> AnnotationRecord:
    return make_excerpt_annotation()


@pytest.fixture
def excerpt_grid() -> EntityGrid:
    """The grid the excerpt annotation must produce."""
    return EntityGrid(
        entity_ids=["father", "mother"],
        n_sentences=3,
        cells=[
            [Role.S, Role.DASH],
            [Role.O, Role.S],
            [Role.X, Role.S],
        ],
    )


def grid_from_strings(columns: list[str]) -> EntityGrid:
    """Build a grid from per-entity role strings, e.g. ["sox", "-ss"]."""
    n_sent = len(columns[0])
    assert all(len(c) == n_sent for c in columns)
    cells = [[Role(c[i]) for c in columns] for i in range(n_sent)]
    return EntityGrid(
        entity_ids=[f"e{j}" for j in range(len(columns))],
        n_sentences=n_sent,
        cells=cells,
    )


def write_corpus(
    root: Path,
    docs: list[tuple[str, str, str]],
    annotations: dict[str, AnnotationRecord] | None = None,
) -> Path:
    """Write (doc_id, author, text) triples as a manifest corpus."""
    from gridstylo.grid import annotation_to_json

    (root / "texts").mkdir(parents=True, exist_ok=True)
    (root / "annotations").mkdir(parents=True, exist_ok=True)
    entries = []
    for doc_id, author, text in docs:
        (root / "texts" / f"{doc_id}.txt").write_text(text, encoding="utf-8")
        entry = {
            "id": doc_id,
            "author": author,
            "text_path": f"texts/{doc_id}.txt",
            "annotation_path": None,
        }
        if annotations and doc_id in annotations:
            ann_path = root / "annotations" / f"{doc_id}.json"
            ann_path.write_text(
                json.dumps(annotation_to_json(annotations[doc_id])), encoding="utf-8"
            )
            entry["annotation_path"] = f"annotations/{doc_id}.json"
        entries.append(entry)
    manifest = root / "manifest.json"
    manifest.write_text(json.dumps({"documents": entries}), encoding="utf-8")
    return manifest


FIXTURES = Path(__file__).parent / "fixtures"
