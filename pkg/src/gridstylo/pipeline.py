"""Corpus loading glue: documents to annotated chunks to feature inputs."""

from __future__ import annotations

from dataclasses import dataclass

from .corpus import Chunk, char_bigrams, chunk_document, load_manifest
from .errors import InsufficientContext, SchemaViolation
from .featurize import (
    PAD_TOKEN,
    TRANSITION_ORDER,
    UNK_TOKEN,
    DiscourseSequence,
    ProbabilityVector,
    Vocab,
    gr_de_global,
    gr_de_local,
    gr_transition_pv,
    rst_de_edu_order,
    rst_de_global,
    rst_de_local,
    rst_pv,
)
from .grid import (
    AnnotationRecord,
    build_gr_grid,
    build_rst_grid,
    load_annotation,
    slice_annotation,
)


@dataclass
class AnnotatedChunk:
    """One chunk of text plus its chunk-scoped annotation record."""

    chunk: Chunk
    annotation: AnnotationRecord | None

    @property
    def author(self) -> str:
        return self.chunk.author

    @property
    def doc_id(self) -> str:
        return self.chunk.doc_id


def load_corpus(
    manifest_path: str, chunk_size: int, require_annotations: bool = False
) -> list[AnnotatedChunk]:
    """Chunk every manifest document and scope its annotation (when one
    exists) to each chunk's word span."""
    from .errors import MissingFile

    out: list[AnnotatedChunk] = []
    for doc in load_manifest(manifest_path):
        chunks = chunk_document(doc, chunk_size)
        if doc.annotation_ref is None:
            if require_annotations:
                raise MissingFile(f"document {doc.id!r} has no annotation")
            out.extend(AnnotatedChunk(c, None) for c in chunks)
            continue
        ann = load_annotation(doc.annotation_ref)
        if ann.doc_id != doc.id:
            raise SchemaViolation(
                f"annotation doc_id {ann.doc_id!r} does not match document {doc.id!r}"
            )
        spans = [(c.index * chunk_size, c.index * chunk_size + len(c.words)) for c in chunks]
        total_words = len(doc.text.split())
        sliced = slice_annotation(ann, spans, total_words)
        out.extend(AnnotatedChunk(c, sliced[k]) for k, c in enumerate(chunks))
    return out


def chunk_bigram_tokens(item: AnnotatedChunk) -> list[str]:
    return char_bigrams(item.chunk.char_text).tokens


def gr_pv_labels() -> list[str]:
    return list(TRANSITION_ORDER)


def rst_pv_labels(vocab: Vocab) -> list[str]:
    named = sorted(t for t in vocab.index if t not in (PAD_TOKEN, UNK_TOKEN))
    return named + [UNK_TOKEN]


def chunk_relation_tokens(ann: AnnotationRecord) -> list[str]:
    """Every relation label on a salient-entity mention, for vocabulary fitting."""
    grid = build_rst_grid(ann)
    return [label.render() for row in grid.cells for cell in row for label in cell]


def grid_pv(
    ann: AnnotationRecord, disc: str, rst_vocab: Vocab | None = None
) -> ProbabilityVector:
    """Chunk probability vector; a grid with nothing to count yields the
    all-zero vector so short chunks stay representable."""
    if disc == "gr":
        labels = tuple(TRANSITION_ORDER)
        try:
            return gr_transition_pv(build_gr_grid(ann))
        except InsufficientContext:
            return ProbabilityVector(labels=labels, probs=(0.0,) * len(labels))
    if disc == "rst":
        if rst_vocab is None:
            raise ValueError("rst probability vectors need a fitted vocabulary")
        labels = tuple(rst_pv_labels(rst_vocab))
        try:
            return rst_pv(build_rst_grid(ann), rst_vocab)
        except InsufficientContext:
            return ProbabilityVector(labels=labels, probs=(0.0,) * len(labels))
    raise ValueError(f"no probability vector for disc={disc!r}")


def discourse_tokens(
    ann: AnnotationRecord, disc: str, reading: str, adjacent_only: bool = False
) -> DiscourseSequence:
    """Chunk discourse token stream under the requested grid reading."""
    if disc == "gr":
        grid = build_gr_grid(ann)
        if reading == "local":
            return gr_de_local(grid)
        if reading == "global":
            return gr_de_global(grid, adjacent_only=adjacent_only)
        raise ValueError(f"no gr reading {reading!r}")
    if disc == "rst":
        if reading == "edu-order":
            return rst_de_edu_order(ann)
        grid = build_rst_grid(ann)
        if reading == "local":
            return rst_de_local(grid)
        if reading == "global":
            return rst_de_global(grid)
        raise ValueError(f"no rst reading {reading!r}")
    raise ValueError(f"no discourse tokens for disc={disc!r}")
