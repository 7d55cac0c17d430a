"""Synthetic annotated corpora with controllable per-author signatures.

Each author signature drives three samplers: a char-bigram Markov chain
for the text, a role-transition chain for each entity's consecutive
mentions, and a relation-label chain for mention relations and the EDU
stream. Signatures can share the char chain ("char-identical" corpora)
so that only discourse structure separates the authors.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InvalidDistribution, SchemaViolation
from .grid import AnnotationRecord, Mention, RelationLabel, Role, annotation_to_json

# the 12 transitions whose first role is present; walks only emit roles
# at mentioned sentences, so DASH-first pairs cannot be generated
ROLE_PAIRS = [a + b for a in "sox" for b in "sox-"]


def _check_distribution(name: str, dist: dict[str, float]) -> None:
    if not dist:
        raise InvalidDistribution(f"{name}: empty distribution")
    values = np.array(list(dist.values()), dtype=np.float64)
    if np.any(values < 0):
        raise InvalidDistribution(f"{name}: negative probability")
    if abs(values.sum() - 1.0) > 1e-9:
        raise InvalidDistribution(f"{name}: probabilities sum to {values.sum():.12f}")


class _Categorical:
    """Sorted-key categorical sampler, deterministic under a seeded rng."""

    def __init__(self, dist: dict[str, float]):
        self.labels = sorted(dist)
        self.cum = np.cumsum([dist[k] for k in self.labels])

    def sample(self, rng: np.random.Generator) -> str:
        return self.labels[int(np.searchsorted(self.cum, rng.random(), side="right"))]


@dataclass
class AuthorSignature:
    name: str
    char_alphabet: str
    char_seed: int
    sentences_per_doc: int
    entities_per_doc: int
    reentry_prob: float = 0.5
    words_per_sentence: int | None = None
    gr_transitions: dict[str, float] | None = None
    rst_relations: dict[str, float] | None = None
    rst_transition: dict[str, dict[str, float]] | None = None

    @classmethod
    def from_dict(cls, raw: dict) -> "AuthorSignature":
        try:
            sig = cls(
                name=raw["name"],
                char_alphabet=raw["char"]["alphabet"],
                char_seed=int(raw["char"]["seed"]),
                sentences_per_doc=int(raw["sentences_per_doc"]),
                entities_per_doc=int(raw["entities_per_doc"]),
                reentry_prob=float(raw.get("reentry_prob", 0.5)),
                words_per_sentence=(
                    int(raw["words_per_sentence"]) if "words_per_sentence" in raw else None
                ),
                gr_transitions=raw.get("gr_transitions"),
                rst_relations=raw.get("rst_relations"),
                rst_transition=raw.get("rst_transition"),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaViolation(f"bad author signature: {exc}") from exc
        sig.validate()
        return sig

    def validate(self) -> None:
        if " " not in self.char_alphabet or len(set(self.char_alphabet)) < 3:
            raise SchemaViolation(
                f"{self.name}: alphabet needs a space and >= 2 letters"
            )
        if self.sentences_per_doc < 2 or self.entities_per_doc < 1:
            raise SchemaViolation(f"{self.name}: too few sentences or entities")
        if not 0.0 <= self.reentry_prob <= 1.0:
            raise SchemaViolation(f"{self.name}: reentry_prob outside [0, 1]")
        if self.gr_transitions is not None:
            unknown = set(self.gr_transitions) - set(ROLE_PAIRS)
            if unknown:
                raise SchemaViolation(
                    f"{self.name}: unknown role transitions {sorted(unknown)}"
                )
            _check_distribution(f"{self.name}.gr_transitions", self.gr_transitions)
        if self.rst_relations is not None:
            for label in self.rst_relations:
                RelationLabel.parse(label)
            _check_distribution(f"{self.name}.rst_relations", self.rst_relations)
        if self.rst_transition is not None:
            if self.rst_relations is None:
                raise SchemaViolation(
                    f"{self.name}: rst_transition requires rst_relations"
                )
            for prev, row in self.rst_transition.items():
                RelationLabel.parse(prev)
                for label in row:
                    RelationLabel.parse(label)
                _check_distribution(f"{self.name}.rst_transition[{prev}]", row)


@dataclass
class CorpusSpec:
    seed: int
    docs_per_author: int
    words_per_doc: int
    authors: list[AuthorSignature]
    char_identical: bool = False

    @classmethod
    def from_dict(cls, raw: dict) -> "CorpusSpec":
        try:
            authors = [AuthorSignature.from_dict(a) for a in raw["authors"]]
            spec = cls(
                seed=int(raw.get("seed", 0)),
                docs_per_author=int(raw["docs_per_author"]),
                words_per_doc=int(raw["words_per_doc"]),
                authors=authors,
                char_identical=bool(raw.get("char_identical", False)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaViolation(f"bad corpus spec: {exc}") from exc
        if len(spec.authors) < 2:
            raise SchemaViolation("corpus spec needs >= 2 authors")
        if spec.char_identical:
            first = spec.authors[0]
            for sig in spec.authors[1:]:
                sig.char_alphabet = first.char_alphabet
                sig.char_seed = first.char_seed
        return spec

    @classmethod
    def from_file(cls, path: str | Path) -> "CorpusSpec":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def char_chain(alphabet: str, seed: int) -> np.ndarray:
    """Row-stochastic bigram transition matrix; squaring the raw draws
    sharpens the rows so different seeds give visibly different chains.
    Space never follows space."""
    rng = np.random.default_rng(seed)
    n = len(alphabet)
    mat = rng.random((n, n)) ** 2
    space = alphabet.index(" ")
    mat[space, space] = 0.0
    return mat / mat.sum(axis=1, keepdims=True)


def _sample_words(
    rng: np.random.Generator, chain: np.ndarray, alphabet: str, count: int
) -> list[str]:
    space = alphabet.index(" ")
    cum = np.cumsum(chain, axis=1)
    state = space
    words, word = [], []
    while len(words) < count:
        nxt = int(np.searchsorted(cum[state], rng.random(), side="right"))
        if nxt == space:
            if len(word) >= 2:  # a shorter word pends until it grows
                words.append("".join(word))
                word = []
            state = space
            continue
        word.append(alphabet[nxt])
        state = nxt
        if len(word) >= 12:
            words.append("".join(word))
            word = []
            state = space
    return words


def _role_samplers(
    sig: AuthorSignature,
) -> tuple[_Categorical, dict[str, _Categorical]]:
    if sig.gr_transitions is None:
        uniform = {r: 1.0 / 3.0 for r in "sox"}
        return _Categorical(uniform), {r: _Categorical(uniform) for r in "sox"}
    first: dict[str, float] = {}
    rows: dict[str, dict[str, float]] = {}
    for pair, p in sig.gr_transitions.items():
        first[pair[0]] = first.get(pair[0], 0.0) + p
        # absence is governed by reentry_prob, so "-" never enters the
        # walk state: pairs ending in "-" shape the marginal only
        if pair[1] != "-":
            rows.setdefault(pair[0], {})[pair[1]] = p
    total = sum(first.values())
    first = {r: p / total for r, p in first.items()}
    conditionals = {}
    for r, row in rows.items():
        row_total = sum(row.values())
        conditionals[r] = _Categorical({k: v / row_total for k, v in row.items()})
    return _Categorical(first), conditionals


def _relation_samplers(
    sig: AuthorSignature,
) -> tuple[_Categorical | None, dict[str, _Categorical]]:
    if sig.rst_relations is None:
        return None, {}
    initial = _Categorical(sig.rst_relations)
    rows = {
        prev: _Categorical(row) for prev, row in (sig.rst_transition or {}).items()
    }
    return initial, rows


def generate_document(
    sig: AuthorSignature, words_per_doc: int, rng: np.random.Generator, doc_id: str
) -> tuple[str, AnnotationRecord]:
    """One document: text words from the char chain, entity mention walks
    from the role chain, relations and the EDU stream from the label chain."""
    n_sent = sig.sentences_per_doc
    wps = sig.words_per_sentence or max(1, words_per_doc // n_sent)
    chain = char_chain(sig.char_alphabet, sig.char_seed)
    words = _sample_words(rng, chain, sig.char_alphabet, n_sent * wps)
    text = " ".join(words)

    first_role, next_role = _role_samplers(sig)
    initial_rel, rel_rows = _relation_samplers(sig)

    def sample_relation(prev: str | None) -> list[RelationLabel]:
        if initial_rel is None:
            return []
        sampler = rel_rows.get(prev, initial_rel) if prev else initial_rel
        return [RelationLabel.parse(sampler.sample(rng))]

    mentions: list[tuple[int, int, Mention]] = []
    for e in range(sig.entities_per_doc):
        debut = int(rng.integers(0, max(1, n_sent - 1)))
        role = first_role.sample(rng)
        prev_rel: str | None = None
        rels = sample_relation(prev_rel)
        prev_rel = rels[0].render() if rels else None
        mentions.append(
            (debut, e, Mention(f"e{e}", debut, Role(role), rels))
        )
        for s in range(debut + 1, n_sent):
            if rng.random() >= sig.reentry_prob:
                continue
            sampler = next_role.get(role, first_role)
            role = sampler.sample(rng)
            rels = sample_relation(prev_rel)
            prev_rel = rels[0].render() if rels else prev_rel
            mentions.append((s, e, Mention(f"e{e}", s, Role(role), rels)))
    mentions.sort(key=lambda triple: (triple[0], triple[1]))

    edu_sequence = None
    if initial_rel is not None:
        edu_sequence = []
        prev = None
        for _ in range(n_sent):
            sampler = rel_rows.get(prev, initial_rel) if prev else initial_rel
            label = sampler.sample(rng)
            edu_sequence.append(RelationLabel.parse(label))
            prev = label
    return text, AnnotationRecord(
        doc_id=doc_id,
        n_sentences=n_sent,
        mentions=[m for _, _, m in mentions],
        edu_sequence=edu_sequence,
    )


def generate_corpus(spec: CorpusSpec, out_dir: str | Path) -> Path:
    """Write texts, annotation records, and a manifest; returns the
    manifest path. Identical spec and seed reproduce identical bytes."""
    out = Path(out_dir)
    (out / "texts").mkdir(parents=True, exist_ok=True)
    (out / "annotations").mkdir(parents=True, exist_ok=True)
    documents = []
    for a_idx, sig in enumerate(spec.authors):
        for d in range(spec.docs_per_author):
            rng = np.random.default_rng([spec.seed, a_idx, d])
            doc_id = f"{sig.name}-{d:03d}"
            text, ann = generate_document(sig, spec.words_per_doc, rng, doc_id)
            (out / "texts" / f"{doc_id}.txt").write_text(text, encoding="utf-8")
            (out / "annotations" / f"{doc_id}.json").write_text(
                json.dumps(annotation_to_json(ann), sort_keys=True, indent=1) + "\n",
                encoding="utf-8",
            )
            documents.append(
                {
                    "id": doc_id,
                    "author": sig.name,
                    "text_path": f"texts/{doc_id}.txt",
                    "annotation_path": f"annotations/{doc_id}.json",
                }
            )
    manifest = out / "manifest.json"
    manifest.write_text(
        json.dumps({"documents": documents}, sort_keys=True, indent=1) + "\n",
        encoding="utf-8",
    )
    return manifest
