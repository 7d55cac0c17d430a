"""Experiment orchestration: cross-validation, the pairwise and
multi-class tasks, chunk-size sweeps, metrics, and embedding neighbors.

Folds are assigned at document level (all chunks of a document land in
one fold) so near-duplicate chunks never straddle train and test, and
every vocabulary is rebuilt inside each fold by the estimator's fit.
"""

from __future__ import annotations

import csv
import itertools
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .corpus import oversample
from .errors import EmptyMatrix, TooFewDocuments, UnknownToken
from .featurize import PAD_TOKEN, UNK_TOKEN, Vocab
from .pipeline import AnnotatedChunk


@dataclass
class FoldPlan:
    k: int
    seed: int
    folds: list[dict]  # {"train": [chunk ids], "test": [chunk ids]}


@dataclass
class ExperimentResult:
    task: str
    model: str
    metric: str
    per_fold: list[dict]  # {"unit", "fold", "value", "confusion"?, "classes"?}
    mean: float
    config: dict = field(default_factory=dict)


def kfold_split(chunks: Sequence[AnnotatedChunk], k: int = 5, seed: int = 0) -> FoldPlan:
    """Author-stratified, document-level fold assignment.

    Per author, documents are shuffled under the seed and dealt
    round-robin, with a per-author starting offset so no single fold
    systematically collects the remainders.
    """
    by_author: dict[str, dict[str, list[str]]] = {}
    for c in chunks:
        by_author.setdefault(c.author, {}).setdefault(c.doc_id, []).append(c.chunk.id)
    rng = np.random.default_rng(seed)
    doc_fold: dict[str, int] = {}
    for a_idx, author in enumerate(sorted(by_author)):
        docs = sorted(by_author[author])
        if len(docs) < k:
            raise TooFewDocuments(
                f"author {author!r} has {len(docs)} documents, fewer than k={k}"
            )
        order = rng.permutation(len(docs))
        for slot, d_idx in enumerate(order):
            doc_fold[docs[d_idx]] = (slot + a_idx) % k
    folds = [{"train": [], "test": []} for _ in range(k)]
    for c in chunks:
        home = doc_fold[c.doc_id]
        for f in range(k):
            folds[f]["test" if f == home else "train"].append(c.chunk.id)
    return FoldPlan(k=k, seed=seed, folds=folds)


def _balance_train(
    train: list[AnnotatedChunk], seed: int
) -> list[AnnotatedChunk]:
    groups: dict[str, list[AnnotatedChunk]] = {}
    for c in train:
        groups.setdefault(c.author, []).append(c)
    balanced = oversample(groups, rng_seed=seed)
    return [c for author in sorted(balanced) for c in balanced[author]]


def _fold_runs(
    chunks: list[AnnotatedChunk], k: int, seed: int, balance: bool
) -> Iterable[tuple[int, list[AnnotatedChunk], list[AnnotatedChunk]]]:
    plan = kfold_split(chunks, k=k, seed=seed)
    by_id = {c.chunk.id: c for c in chunks}
    for f, fold in enumerate(plan.folds):
        train = [by_id[i] for i in fold["train"]]
        test = [by_id[i] for i in fold["test"]]
        if balance:
            train = _balance_train(train, seed=seed * 1000 + f)
        yield f, train, test


def _run_units(units: list, runner: Callable, jobs: int) -> list:
    if jobs <= 1:
        return [runner(u) for u in units]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(runner, units))


def confusion_matrix(
    truth: Sequence[str], predicted: Sequence[str], classes: Sequence[str]
) -> np.ndarray:
    index = {c: i for i, c in enumerate(classes)}
    out = np.zeros((len(classes), len(classes)), dtype=np.int64)
    for t, p in zip(truth, predicted):
        out[index[t], index[p]] += 1
    return out


def macro_f1(confusion: np.ndarray) -> float:
    """Unweighted mean of per-class F1; a class with no true and no
    predicted instances scores 0, penalizing never-predicted classes."""
    confusion = np.asarray(confusion)
    if confusion.size == 0:
        raise EmptyMatrix("empty confusion matrix")
    if confusion.ndim != 2 or confusion.shape[0] != confusion.shape[1]:
        raise EmptyMatrix(f"confusion matrix must be square, got {confusion.shape}")
    scores = []
    for i in range(confusion.shape[0]):
        tp = confusion[i, i]
        denom = confusion[i, :].sum() + confusion[:, i].sum()
        scores.append(0.0 if denom == 0 else 2.0 * tp / denom)
    return float(np.mean(scores))


def run_pairwise(
    chunks: Sequence[AnnotatedChunk],
    make_estimator: Callable[[], object],
    labels: Sequence[str] | None = None,
    k: int = 5,
    seed: int = 0,
    balance: bool = True,
    jobs: int = 1,
    model_name: str = "",
) -> ExperimentResult:
    """Cross-validated accuracy for every author pair; the headline number
    averages fold accuracies within a pair, then across pairs."""
    chunks = list(chunks)
    authors = sorted({c.author for c in chunks})
    if len(authors) < 2:
        raise TooFewDocuments("pairwise task needs >= 2 authors")
    pairs = list(itertools.combinations(authors, 2))

    def run_pair(pair: tuple[str, str]) -> list[dict]:
        subset = [c for c in chunks if c.author in pair]
        rows = []
        for f, train, test in _fold_runs(subset, k=k, seed=seed, balance=balance):
            est = make_estimator()
            est.fit(train, [c.author for c in train])
            predicted = est.predict(test)
            truth = [c.author for c in test]
            acc = float(np.mean([p == t for p, t in zip(predicted, truth)]))
            rows.append({"unit": "|".join(pair), "fold": f, "value": acc})
        return rows

    per_fold = [row for rows in _run_units(pairs, run_pair, jobs) for row in rows]
    pair_means = [
        float(np.mean([r["value"] for r in per_fold if r["unit"] == "|".join(p)]))
        for p in pairs
    ]
    return ExperimentResult(
        task="pairwise",
        model=model_name,
        metric="accuracy",
        per_fold=per_fold,
        mean=float(np.mean(pair_means)),
    )


def run_multiclass(
    chunks: Sequence[AnnotatedChunk],
    make_estimator: Callable[[], object],
    k: int = 5,
    seed: int = 0,
    balance: bool = True,
    jobs: int = 1,
    model_name: str = "",
) -> ExperimentResult:
    """Cross-validated macro-F1 over all authors at once, with the full
    confusion matrix kept per fold."""
    chunks = list(chunks)
    classes = sorted({c.author for c in chunks})
    if len(classes) < 2:
        raise TooFewDocuments("multiclass task needs >= 2 authors")

    def run_fold(unit: tuple[int, list, list]) -> dict:
        f, train, test = unit
        est = make_estimator()
        est.fit(train, [c.author for c in train])
        predicted = est.predict(test)
        truth = [c.author for c in test]
        confusion = confusion_matrix(truth, predicted, classes)
        return {
            "unit": "all",
            "fold": f,
            "value": macro_f1(confusion),
            "confusion": confusion.tolist(),
            "classes": classes,
        }

    units = list(_fold_runs(chunks, k=k, seed=seed, balance=balance))
    per_fold = _run_units(units, run_fold, jobs)
    return ExperimentResult(
        task="multiclass",
        model=model_name,
        metric="macro_f1",
        per_fold=per_fold,
        mean=float(np.mean([r["value"] for r in per_fold])),
    )


def default_sweep_sizes() -> list[int]:
    return list(range(200, 2001, 200))


def chunk_sweep(
    load_chunks: Callable[[int], list[AnnotatedChunk]],
    model_specs: dict[str, Callable[[], object]],
    sizes: Sequence[int] | None = None,
    k: int = 5,
    seed: int = 0,
    balance: bool = True,
    jobs: int = 1,
) -> list[ExperimentResult]:
    """Re-chunk, re-featurize, and re-run the multi-class task at every
    chunk size; one result per (size, model)."""
    sizes = list(sizes) if sizes is not None else default_sweep_sizes()
    results = []
    for size in sizes:
        chunks = load_chunks(size)
        for name in sorted(model_specs):
            result = run_multiclass(
                chunks,
                model_specs[name],
                k=k,
                seed=seed,
                balance=balance,
                jobs=jobs,
                model_name=name,
            )
            result.task = "sweep"
            result.config = {"size": size}
            results.append(result)
    return results


def nearest_neighbors(
    emb: np.ndarray, vocab: Vocab, token: str, top_k: int = 5
) -> list[tuple[str, float]]:
    """Top cosine neighbors of a token's embedding row, excluding the
    query and the reserved tokens; ties break lexicographically."""
    if token not in vocab.index:
        raise UnknownToken(f"{token!r} not in vocabulary")
    tokens = vocab.tokens
    query = emb[vocab.index[token]].astype(np.float64)
    qnorm = np.linalg.norm(query)
    scored = []
    for t in tokens:
        if t == token or t in (PAD_TOKEN, UNK_TOKEN):
            continue
        row = emb[vocab.index[t]].astype(np.float64)
        norm = np.linalg.norm(row) * qnorm
        sim = 0.0 if norm == 0 else float(row @ query / norm)
        scored.append((t, sim))
    scored.sort(key=lambda pair: (-pair[1], pair[0]))
    return scored[:top_k]


# ---------------------------------------------------------------------------
# result persistence


def result_to_json(result: ExperimentResult) -> dict:
    return {
        "task": result.task,
        "model": result.model,
        "metric": result.metric,
        "mean": result.mean,
        "per_fold": result.per_fold,
        "config": result.config,
    }


def write_result_json(result: ExperimentResult, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(result_to_json(result), sort_keys=True, indent=1) + "\n",
        encoding="utf-8",
    )


CSV_COLUMNS = ["experiment", "model", "disc_type", "reading", "size", "fold", "metric", "value"]


def write_results_csv(
    results: Sequence[ExperimentResult],
    path: str | Path,
    disc_types: dict[str, str],
    readings: dict[str, str],
) -> None:
    """Flat per-fold rows for plotting; disc/reading carried per model name."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for r in results:
            size = r.config.get("size", "")
            for row in r.per_fold:
                writer.writerow(
                    [
                        r.task,
                        r.model,
                        disc_types.get(r.model, "none"),
                        readings.get(r.model, ""),
                        size,
                        row["fold"],
                        r.metric,
                        f"{row['value']:.6f}",
                    ]
                )


def write_sweep_summary(results: Sequence[ExperimentResult], path: str | Path) -> None:
    """One row per (size, model): the mean cross-validated macro-F1."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["size", "model", "macro_f1_mean"])
        for r in results:
            writer.writerow([r.config.get("size", ""), r.model, f"{r.mean:.6f}"])
