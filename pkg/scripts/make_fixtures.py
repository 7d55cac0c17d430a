"""Regenerate the checked-in synthetic corpora under tests/fixtures/.

Three corpora back the acceptance tests:

* corpus_a: four authors sharing one char-bigram chain (texts carry no
  authorship signal) but with disjoint grid habits, in both role
  transitions and relation labels. Chunked at 40 words each document
  yields 10 two-sentence chunks, 200 chunks per author.
* corpus_b: four authors over disjoint alphabets; trivially separable
  from characters alone.
* corpus_c: long documents with very few sentences, so small chunks
  rarely contain two sentence midpoints and discourse features only
  appear as the chunk size grows.

Generation is byte-deterministic, so rerunning this script must leave
the tree unchanged.
"""

from __future__ import annotations

import json
from pathlib import Path

from gridstylo.synth import CorpusSpec, generate_corpus

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"


def author(name: str, alphabet: str, char_seed: int, **over) -> dict:
    base = {
        "name": name,
        "char": {"alphabet": alphabet, "seed": char_seed},
        "sentences_per_doc": 20,
        "entities_per_doc": 8,
        "reentry_prob": 1.0,
    }
    base.update(over)
    return base


CORPUS_A = {
    "seed": 101,
    "docs_per_author": 20,
    "words_per_doc": 400,
    "char_identical": True,
    "authors": [
        author(
            "w0", "abcd ", 7,
            gr_transitions={"ss": 1.0},
            rst_relations={"elaboration.N": 1.0},
        ),
        author(
            "w1", "abcd ", 7,
            gr_transitions={"oo": 1.0},
            rst_relations={"attribution.S": 1.0},
        ),
        author(
            "w2", "abcd ", 7,
            gr_transitions={"xx": 1.0},
            rst_relations={"contrast.N": 1.0},
        ),
        author(
            "w3", "abcd ", 7,
            gr_transitions={"so": 0.5, "os": 0.5},
            rst_relations={"joint.S": 0.5, "cause.N": 0.5},
        ),
    ],
}

CORPUS_B = {
    "seed": 202,
    "docs_per_author": 10,
    "words_per_doc": 400,
    "authors": [
        author("w0", "abcd ", 1, entities_per_doc=2, reentry_prob=0.5),
        author("w1", "efgh ", 2, entities_per_doc=2, reentry_prob=0.5),
        author("w2", "ijkl ", 3, entities_per_doc=2, reentry_prob=0.5),
        author("w3", "mnop ", 4, entities_per_doc=2, reentry_prob=0.5),
    ],
}

CORPUS_C = {
    "seed": 303,
    "docs_per_author": 5,
    "words_per_doc": 4000,
    "char_identical": True,
    "authors": [
        author(
            "w0", "abcd ", 7,
            sentences_per_doc=8, entities_per_doc=6,
            gr_transitions={"ss": 1.0},
        ),
        author(
            "w1", "abcd ", 7,
            sentences_per_doc=8, entities_per_doc=6,
            gr_transitions={"oo": 1.0},
        ),
        author(
            "w2", "abcd ", 7,
            sentences_per_doc=8, entities_per_doc=6,
            gr_transitions={"so": 0.5, "os": 0.5},
        ),
    ],
}


def main() -> None:
    specs = {"corpus_a": CORPUS_A, "corpus_b": CORPUS_B, "corpus_c": CORPUS_C}
    (FIXTURES / "specs").mkdir(parents=True, exist_ok=True)
    for name, raw in specs.items():
        spec_path = FIXTURES / "specs" / f"{name}.json"
        spec_path.write_text(
            json.dumps(raw, sort_keys=True, indent=1) + "\n", encoding="utf-8"
        )
        manifest = generate_corpus(CorpusSpec.from_dict(raw), FIXTURES / name)
        n_docs = len(json.loads(manifest.read_text())["documents"])
        print(f"{name}: {n_docs} documents -> {manifest}")


if __name__ == "__main__":
    main()
