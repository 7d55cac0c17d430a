"""Grid featurizers: probability vectors and discourse token sequences.

Two feature forms come out of a grid. A probability vector (PV) is a
fixed-order distribution over transition or relation labels. A discourse
sequence (DE) is an ordered token stream produced by reading the grid
either locally (sentence pairs / rows) or globally (entity columns).
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

from .errors import InsufficientContext, MissingEduSequence
from .grid import AnnotationRecord, EntityGrid, Role, RstGrid

# boundary token between entity columns in global readings; a normal
# vocabulary token, present so convolution windows cannot fabricate
# cross-entity transitions
SEP = "SEP"

PAD_TOKEN = "PAD"
UNK_TOKEN = "UNK"
PAD_INDEX = 0
UNK_INDEX = 1

# all 16 role transitions in their conventional presentation order;
# GR probability vectors are always reported in this order
TRANSITION_ORDER = [
    "ss", "so", "sx", "s-",
    "os", "oo", "ox", "o-",
    "xs", "xo", "xx", "x-",
    "-s", "-o", "-x", "--",
]


@dataclass(frozen=True)
class ProbabilityVector:
    labels: tuple[str, ...]
    probs: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.labels) != len(self.probs):
            raise ValueError("labels and probs must have equal length")

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.labels, self.probs))


@dataclass(frozen=True)
class DiscourseSequence:
    tokens: tuple[str, ...]

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self) -> Iterator[str]:
        return iter(self.tokens)


@dataclass
class Vocab:
    """Token index map with reserved PAD=0 and UNK=1 entries."""

    index: dict[str, int] = field(
        default_factory=lambda: {PAD_TOKEN: PAD_INDEX, UNK_TOKEN: UNK_INDEX}
    )

    def __len__(self) -> int:
        return len(self.index)

    def __contains__(self, token: str) -> bool:
        return token in self.index

    @property
    def tokens(self) -> list[str]:
        """All tokens in index order, specials included."""
        return sorted(self.index, key=self.index.__getitem__)

    def encode(self, tokens: Iterable[str]) -> list[int]:
        return [self.index.get(t, UNK_INDEX) for t in tokens]

    def decode(self, indices: Iterable[int]) -> list[str]:
        rev = self.tokens
        return [rev[i] for i in indices]

    @classmethod
    def from_tokens(cls, ordered: Sequence[str]) -> "Vocab":
        """Rebuild from a full index-ordered token list (specials first)."""
        if list(ordered[:2]) != [PAD_TOKEN, UNK_TOKEN]:
            raise ValueError("token list must start with PAD, UNK")
        return cls(index={t: i for i, t in enumerate(ordered)})


def build_vocab(
    sequences: Iterable[Iterable[str]], min_count: int = 1
) -> Vocab:
    """Index every token with frequency >= min_count, ordered by frequency
    descending then lexicographic, after the two reserved entries."""
    if min_count < 1:
        raise ValueError("min_count must be >= 1")
    counts: Counter[str] = Counter()
    for seq in sequences:
        counts.update(seq)
    kept = sorted(
        (t for t, c in counts.items() if c >= min_count),
        key=lambda t: (-counts[t], t),
    )
    vocab = Vocab()
    for t in kept:
        if t not in vocab.index:
            vocab.index[t] = len(vocab.index)
    return vocab


def gr_transition_pv(grid: EntityGrid) -> ProbabilityVector:
    """Distribution over the 16 role transitions: every vertical (row i,
    row i+1) pair in every column counts, DASH-involving pairs included,
    normalized by n_entities * (n_sentences - 1)."""
    total = grid.n_entities * (grid.n_sentences - 1)
    if total <= 0:
        raise InsufficientContext(
            f"grid {grid.n_sentences}x{grid.n_entities} has no role transitions"
        )
    counts = Counter(
        grid.cells[i][j].value + grid.cells[i + 1][j].value
        for j in range(grid.n_entities)
        for i in range(grid.n_sentences - 1)
    )
    return ProbabilityVector(
        labels=tuple(TRANSITION_ORDER),
        probs=tuple(counts[t] / total for t in TRANSITION_ORDER),
    )


def rst_pv(grid: RstGrid, vocab: Vocab) -> ProbabilityVector:
    """Distribution over relation labels; out-of-vocabulary labels pool
    into the trailing UNK dimension. Label order is sorted vocabulary
    order with UNK last."""
    rendered = [
        label.render() for row in grid.cells for cell in row for label in cell
    ]
    if not rendered:
        raise InsufficientContext("grid has no relation labels")
    labels = sorted(t for t in vocab.index if t not in (PAD_TOKEN, UNK_TOKEN))
    counts = Counter(t if t in vocab.index else UNK_TOKEN for t in rendered)
    total = len(rendered)
    return ProbabilityVector(
        labels=tuple(labels) + (UNK_TOKEN,),
        probs=tuple(counts[t] / total for t in labels) + (counts[UNK_TOKEN] / total,),
    )


def gr_de_local(grid: EntityGrid) -> DiscourseSequence:
    """Sentence-pair reading: for each adjacent sentence pair, in entity
    column order, emit the role transition when both roles are present."""
    tokens = [
        grid.cells[i][j].value + grid.cells[i + 1][j].value
        for i in range(grid.n_sentences - 1)
        for j in range(grid.n_entities)
        if grid.cells[i][j] != Role.DASH and grid.cells[i + 1][j] != Role.DASH
    ]
    return DiscourseSequence(tuple(tokens))


def gr_de_global(grid: EntityGrid, adjacent_only: bool = False) -> DiscourseSequence:
    """Column reading: walk each entity's column, drop DASH cells, emit a
    token per consecutive pair of the remaining roles; columns that
    produced tokens are joined by a single SEP.

    ``adjacent_only`` switches to the stricter variant that only pairs
    roles from adjacent sentences instead of compressing gaps.
    """
    groups = []
    for j in range(grid.n_entities):
        column = grid.column(j)
        if adjacent_only:
            tokens = [
                a.value + b.value
                for a, b in zip(column, column[1:])
                if a != Role.DASH and b != Role.DASH
            ]
        else:
            present = [r for r in column if r != Role.DASH]
            tokens = [a.value + b.value for a, b in zip(present, present[1:])]
        if tokens:
            groups.append(tokens)
    return DiscourseSequence(tuple(_join_with_sep(groups)))


def rst_de_local(grid: RstGrid) -> DiscourseSequence:
    """Row-major reading: sentence order, then entity column order, then
    the cell's stored label order."""
    tokens = [
        label.render() for row in grid.cells for cell in row for label in cell
    ]
    return DiscourseSequence(tuple(tokens))


def rst_de_global(grid: RstGrid) -> DiscourseSequence:
    """Column-major reading: one entity at a time, sentence order within
    the column; non-empty columns joined by SEP."""
    groups = []
    for j in range(grid.n_entities):
        tokens = [label.render() for cell in grid.column(j) for label in cell]
        if tokens:
            groups.append(tokens)
    return DiscourseSequence(tuple(_join_with_sep(groups)))


def rst_de_edu_order(ann: AnnotationRecord) -> DiscourseSequence:
    """The relation labels in EDU order, verbatim."""
    if ann.edu_sequence is None:
        raise MissingEduSequence(f"record {ann.doc_id!r} has no edu_sequence")
    return DiscourseSequence(tuple(label.render() for label in ann.edu_sequence))


def _join_with_sep(groups: list[list[str]]) -> list[str]:
    joined: list[str] = []
    for g in groups:
        if joined:
            joined.append(SEP)
        joined.extend(g)
    return joined
