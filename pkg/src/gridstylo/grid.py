"""Entity grids over annotation records.

A grid has one row per sentence and one column per *salient* entity: an
entity mentioned in at least two distinct sentences of the record. Cells
hold either a single grammatical role (subject/object/other/absent) or,
in the RST variant, the list of discourse-relation labels attached to the
entity's mentions in that sentence.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .errors import MissingFile, MissingRelations, SchemaViolation


class Role(str, Enum):
    """Grammatical role of an entity in a sentence."""

    S = "s"
    O = "o"
    X = "x"
    DASH = "-"


# ranking used to collapse multiple mentions in one sentence
_ROLE_RANK = {Role.S: 3, Role.O: 2, Role.X: 1, Role.DASH: 0}

_RELATION_RE = re.compile(r"^([a-z][a-z0-9_-]*)\.(N|S)$")


@dataclass(frozen=True)
class RelationLabel:
    """A discourse relation name plus the nuclearity of the unit it labels."""

    relation: str
    nuclearity: str  # "N" or "S"

    def render(self) -> str:
        return f"{self.relation}.{self.nuclearity}"

    @classmethod
    def parse(cls, text: str) -> "RelationLabel":
        m = _RELATION_RE.match(text)
        if not m:
            raise SchemaViolation(
                f"bad relation label {text!r}: expected lowercase name with .N or .S suffix"
            )
        return cls(m.group(1), m.group(2))


@dataclass
class Mention:
    entity_id: str
    sentence_index: int
    role: Role
    relations: list[RelationLabel] = field(default_factory=list)


@dataclass
class AnnotationRecord:
    """Parser output for one document: entity mentions plus the EDU label stream."""

    doc_id: str
    n_sentences: int
    mentions: list[Mention]
    edu_sequence: list[RelationLabel] | None = None


@dataclass
class EntityGrid:
    """Sentences x salient-entities matrix of grammatical roles."""

    entity_ids: list[str]
    n_sentences: int
    cells: list[list[Role]]  # n_sentences rows, len(entity_ids) columns

    @property
    def n_entities(self) -> int:
        return len(self.entity_ids)

    def column(self, j: int) -> list[Role]:
        return [row[j] for row in self.cells]


@dataclass
class RstGrid:
    """Same shape as EntityGrid; cells hold lists of relation labels."""

    entity_ids: list[str]
    n_sentences: int
    cells: list[list[list[RelationLabel]]]

    @property
    def n_entities(self) -> int:
        return len(self.entity_ids)

    def column(self, j: int) -> list[list[RelationLabel]]:
        return [row[j] for row in self.cells]


def _salient_entities(ann: AnnotationRecord) -> list[str]:
    """Entities mentioned in >= 2 distinct sentences, in first-mention order.

    Entities debuting in the same sentence are ordered by id so the
    result does not depend on mention order within a sentence.
    """
    sentences: dict[str, set[int]] = {}
    debut: dict[str, int] = {}
    for m in ann.mentions:
        sentences.setdefault(m.entity_id, set()).add(m.sentence_index)
        if m.entity_id not in debut or m.sentence_index < debut[m.entity_id]:
            debut[m.entity_id] = m.sentence_index
    salient = [e for e, s in sentences.items() if len(s) >= 2]
    return sorted(salient, key=lambda e: (debut[e], e))


def build_gr_grid(ann: AnnotationRecord) -> EntityGrid:
    """Grammatical-relation grid; multiple mentions in a sentence keep the
    highest-ranking role (s > o > x). Non-salient entities yield no column;
    a record with no salient entity yields a zero-column grid."""
    entities = _salient_entities(ann)
    col = {e: j for j, e in enumerate(entities)}
    cells = [[Role.DASH] * len(entities) for _ in range(ann.n_sentences)]
    for m in ann.mentions:
        j = col.get(m.entity_id)
        if j is None:
            continue
        if _ROLE_RANK[m.role] > _ROLE_RANK[cells[m.sentence_index][j]]:
            cells[m.sentence_index][j] = m.role
    return EntityGrid(entity_ids=entities, n_sentences=ann.n_sentences, cells=cells)


def build_rst_grid(ann: AnnotationRecord, strict: bool = False) -> RstGrid:
    """RST grid: cells collect the relation labels of every mention of the
    entity in the sentence, mention order preserved, no deduplication.

    With ``strict`` on, a salient-entity mention carrying no relations
    raises MissingRelations; otherwise it simply contributes nothing.
    """
    entities = _salient_entities(ann)
    col = {e: j for j, e in enumerate(entities)}
    cells: list[list[list[RelationLabel]]] = [
        [[] for _ in entities] for _ in range(ann.n_sentences)
    ]
    for m in ann.mentions:
        j = col.get(m.entity_id)
        if j is None:
            continue
        if not m.relations and strict:
            raise MissingRelations(
                f"mention of {m.entity_id!r} in sentence {m.sentence_index} has no relations"
            )
        cells[m.sentence_index][j].extend(m.relations)
    return RstGrid(entity_ids=entities, n_sentences=ann.n_sentences, cells=cells)


def validate_grid(grid: EntityGrid | RstGrid) -> list[str]:
    """Report shape and salience violations; empty list means ok."""
    violations = []
    if len(grid.cells) != grid.n_sentences:
        violations.append(
            f"shape: {len(grid.cells)} rows for n_sentences={grid.n_sentences}"
        )
    for i, row in enumerate(grid.cells):
        if len(row) != grid.n_entities:
            violations.append(f"shape: row {i} has {len(row)} cells, expected {grid.n_entities}")
    if violations:
        return violations  # column checks assume a rectangular grid
    for j, entity in enumerate(grid.entity_ids):
        filled = sum(
            1
            for row in grid.cells
            if (row[j] != Role.DASH if isinstance(grid, EntityGrid) else bool(row[j]))
        )
        if filled < 2:
            violations.append(f"salience: column {entity!r} filled in {filled} sentence(s)")
    return violations


def load_annotation(path: str | Path) -> AnnotationRecord:
    """Read and validate an annotation record file (JSON, one per document)."""
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"annotation file not found: {path}")
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaViolation(f"{path}: not valid JSON: {exc}") from exc
    return parse_annotation(payload, source=str(path))


def parse_annotation(payload: object, source: str = "<memory>") -> AnnotationRecord:
    if not isinstance(payload, dict):
        raise SchemaViolation(f"{source}: record must be a JSON object")
    doc_id = payload.get("doc_id")
    n_sentences = payload.get("n_sentences")
    if not isinstance(doc_id, str) or not doc_id:
        raise SchemaViolation(f"{source}: doc_id must be a non-empty string")
    if not isinstance(n_sentences, int) or n_sentences < 0:
        raise SchemaViolation(f"{source}: n_sentences must be a non-negative integer")
    raw_mentions = payload.get("mentions")
    if not isinstance(raw_mentions, list):
        raise SchemaViolation(f"{source}: mentions must be a list")
    mentions = []
    for i, rm in enumerate(raw_mentions):
        if not isinstance(rm, dict):
            raise SchemaViolation(f"{source}: mentions[{i}] is not an object")
        entity_id = rm.get("entity_id")
        if not isinstance(entity_id, str) or not entity_id:
            raise SchemaViolation(f"{source}: mentions[{i}].entity_id must be a non-empty string")
        sent = rm.get("sentence_index")
        if not isinstance(sent, int) or not 0 <= sent < n_sentences:
            raise SchemaViolation(
                f"{source}: mentions[{i}].sentence_index {sent!r} outside [0, {n_sentences})"
            )
        role = rm.get("role")
        if role not in ("s", "o", "x"):
            raise SchemaViolation(f"{source}: mentions[{i}].role {role!r} not one of s|o|x")
        raw_rels = rm.get("relations", [])
        if not isinstance(raw_rels, list) or not all(isinstance(r, str) for r in raw_rels):
            raise SchemaViolation(f"{source}: mentions[{i}].relations must be a list of strings")
        mentions.append(
            Mention(
                entity_id=entity_id,
                sentence_index=sent,
                role=Role(role),
                relations=[RelationLabel.parse(r) for r in raw_rels],
            )
        )
    edu_sequence = None
    if "edu_sequence" in payload and payload["edu_sequence"] is not None:
        raw_edus = payload["edu_sequence"]
        if not isinstance(raw_edus, list) or not all(isinstance(r, str) for r in raw_edus):
            raise SchemaViolation(f"{source}: edu_sequence must be a list of strings")
        edu_sequence = [RelationLabel.parse(r) for r in raw_edus]
    return AnnotationRecord(
        doc_id=doc_id, n_sentences=n_sentences, mentions=mentions, edu_sequence=edu_sequence
    )


def annotation_to_json(ann: AnnotationRecord) -> dict:
    """Inverse of parse_annotation; used by the synthetic corpus writer."""
    return {
        "doc_id": ann.doc_id,
        "n_sentences": ann.n_sentences,
        "mentions": [
            {
                "entity_id": m.entity_id,
                "sentence_index": m.sentence_index,
                "role": m.role.value,
                "relations": [r.render() for r in m.relations],
            }
            for m in ann.mentions
        ],
        "edu_sequence": (
            None if ann.edu_sequence is None else [r.render() for r in ann.edu_sequence]
        ),
    }


def slice_annotation(
    ann: AnnotationRecord,
    chunk_spans: list[tuple[int, int]],
    total_words: int,
) -> list[AnnotationRecord]:
    """Scope a document-level record to each chunk's word span.

    Sentence and EDU positions are not stored in the record, so each unit
    is placed at its proportional midpoint: sentence i of n sits at word
    (i + 0.5) * total_words / n, and likewise for EDUs. A unit belongs to
    the chunk whose span contains that word; units falling past the last
    kept chunk (a dropped remainder) are discarded. Sentence indices are
    re-based per chunk.
    """
    if total_words <= 0:
        raise ValueError("total_words must be positive")

    def owner(unit: int, count: int) -> int | None:
        word = (unit + 0.5) * total_words / count
        for k, (start, end) in enumerate(chunk_spans):
            if start <= word < end:
                return k
        return None

    n = ann.n_sentences
    sent_owner = [owner(i, n) for i in range(n)] if n else []
    # per chunk: ordered sentence list and old->new index map
    sent_map: list[dict[int, int]] = [{} for _ in chunk_spans]
    for i, k in enumerate(sent_owner):
        if k is not None:
            sent_map[k][i] = len(sent_map[k])

    records = [
        AnnotationRecord(
            doc_id=f"{ann.doc_id}:{k:04d}",
            n_sentences=len(sent_map[k]),
            mentions=[],
            edu_sequence=None if ann.edu_sequence is None else [],
        )
        for k in range(len(chunk_spans))
    ]
    for m in ann.mentions:
        k = sent_owner[m.sentence_index]
        if k is None:
            continue
        records[k].mentions.append(
            Mention(
                entity_id=m.entity_id,
                sentence_index=sent_map[k][m.sentence_index],
                role=m.role,
                relations=list(m.relations),
            )
        )
    if ann.edu_sequence is not None:
        m_edus = len(ann.edu_sequence)
        for e, label in enumerate(ann.edu_sequence):
            k = owner(e, m_edus)
            if k is not None:
                records[k].edu_sequence.append(label)
    return records
