"""Document loading, word-count chunking, char-bigram tokenization, oversampling.

Word tokenization is a plain split on Unicode whitespace: word tokens only
drive chunk boundaries, the classifiers consume raw characters. Case and
punctuation are preserved throughout.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DuplicateId, EmptyDocument, EmptyGroup, MissingFile, SchemaViolation


@dataclass
class Document:
    """One author-labeled text, optionally paired with an annotation file."""

    id: str
    author: str
    text: str
    annotation_ref: str | None = None


@dataclass
class Chunk:
    """A consecutive run of words cut from one document.

    ``index`` is the 0-based position of the chunk within its document;
    together with the chunk size it fixes the word span the chunk covers.
    """

    doc_id: str
    author: str
    words: list[str]
    char_text: str = field(repr=False)
    index: int = 0

    @property
    def id(self) -> str:
        return f"{self.doc_id}:{self.index:04d}"


@dataclass
class BigramSequence:
    """Ordered character bigrams of a text; length is max(|chars| - 1, 0)."""

    tokens: list[str]

    def __len__(self) -> int:
        return len(self.tokens)


def chunk_document(doc: Document, size: int) -> list[Chunk]:
    """Cut a document into consecutive non-overlapping chunks of `size` words.

    A trailing remainder is kept only if it has at least size/2 words,
    which avoids degenerate tiny chunks while limiting data loss.

    Raises EmptyDocument if the text contains no words.
    """
    if size <= 0:
        raise ValueError(f"chunk size must be positive, got {size}")
    words = doc.text.split()
    if not words:
        raise EmptyDocument(f"document {doc.id!r} has no words")
    chunks = []
    for start in range(0, len(words), size):
        piece = words[start : start + size]
        if len(piece) < size and len(piece) < size / 2:
            break  # drop sub-half-size remainder
        chunks.append(
            Chunk(
                doc_id=doc.id,
                author=doc.author,
                words=piece,
                char_text=" ".join(piece),
                index=len(chunks),
            )
        )
    return chunks


def char_bigrams(text: str) -> BigramSequence:
    """All consecutive character pairs of `text`, whitespace included.

    Texts of length <= 1 yield an empty sequence.
    """
    return BigramSequence([text[i : i + 2] for i in range(len(text) - 1)])


def oversample(
    groups: dict[str, list[Chunk]], rng_seed: int
) -> dict[str, list[Chunk]]:
    """Balance groups by duplicating random members of smaller groups.

    Every group is topped up to the largest group's size with
    uniform-with-replacement draws from itself; original items are all
    retained. Iteration order is sorted by key so results depend only on
    the seed.
    """
    for key, members in groups.items():
        if not members:
            raise EmptyGroup(f"group {key!r} is empty")
    target = max(len(m) for m in groups.values())
    rng = np.random.default_rng(rng_seed)
    out: dict[str, list[Chunk]] = {}
    for key in sorted(groups):
        members = list(groups[key])
        deficit = target - len(members)
        if deficit > 0:
            picks = rng.integers(0, len(members), size=deficit)
            members.extend(members[i] for i in picks)
        out[key] = members
    return out


def load_manifest(path: str | Path) -> list[Document]:
    """Read a corpus manifest and resolve each document's text.

    The manifest is a JSON object ``{"documents": [{"id", "author",
    "text_path", "annotation_path"}]}``; relative paths are resolved
    against the manifest's directory.
    """
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"manifest not found: {path}")
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaViolation(f"manifest is not valid JSON: {exc}") from exc
    if not isinstance(payload, dict) or not isinstance(payload.get("documents"), list):
        raise SchemaViolation('manifest must be an object with a "documents" list')

    base = path.parent
    docs: list[Document] = []
    seen: set[str] = set()
    for i, entry in enumerate(payload["documents"]):
        if not isinstance(entry, dict):
            raise SchemaViolation(f"documents[{i}] is not an object")
        for key in ("id", "author", "text_path"):
            if not isinstance(entry.get(key), str) or not entry[key]:
                raise SchemaViolation(f"documents[{i}].{key} must be a non-empty string")
        ann = entry.get("annotation_path")
        if ann is not None and not isinstance(ann, str):
            raise SchemaViolation(f"documents[{i}].annotation_path must be a string or null")
        doc_id = entry["id"]
        if doc_id in seen:
            raise DuplicateId(f"duplicate document id {doc_id!r}")
        seen.add(doc_id)
        text_path = base / entry["text_path"]
        if not text_path.is_file():
            raise MissingFile(f"text file for document {doc_id!r} not found: {text_path}")
        docs.append(
            Document(
                id=doc_id,
                author=entry["author"],
                text=text_path.read_text(encoding="utf-8"),
                annotation_ref=str(base / ann) if ann else None,
            )
        )
    return docs
