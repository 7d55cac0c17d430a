"""Linear one-vs-rest baselines over char-bigram counts.

Feature vectors are L2-normalized bigram counts, optionally extended with
the grid probability vector as a dense trailing block. Each class trains
an L2-regularized hinge-loss problem by exact cyclic coordinate descent:
the one-dimensional restriction of the objective is piecewise quadratic,
so every coordinate update is a closed-form segment scan and the
objective can never increase.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    CorruptCheckpoint,
    DegenerateDataset,
    DimensionMismatch,
)
from .featurize import PAD_TOKEN, UNK_TOKEN, ProbabilityVector, Vocab
from .models import read_tensor_container, write_tensor_container

SVM_KIND = "linear-svm"


@dataclass
class SparseVector:
    """Sorted (index, value) pairs plus the full dimension."""

    indices: np.ndarray
    values: np.ndarray
    dim: int

    def __post_init__(self) -> None:
        if len(self.indices) != len(self.values):
            raise DimensionMismatch("indices and values differ in length")
        if len(self.indices) and (
            np.any(np.diff(self.indices) <= 0)
            or self.indices[0] < 0
            or self.indices[-1] >= self.dim
        ):
            raise DimensionMismatch("indices must be strictly increasing within dim")
        if len(self.values) and not np.all(np.isfinite(self.values)):
            raise DimensionMismatch("values must be finite")

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.dim)
        out[self.indices] = self.values
        return out


@dataclass
class LinearModel:
    classes: list[int]
    weights: np.ndarray  # (n_classes, dim) float32
    bias: np.ndarray  # (n_classes,) float32
    dim: int
    stop_reasons: list[str]
    sweeps: list[int]
    objective_traces: list[list[float]] = field(default_factory=list)  # not persisted


def bigram_counts(tokens: Iterable[str], vocab: Vocab) -> SparseVector:
    """L2-normalized counts over the non-special vocabulary entries.

    Out-of-vocabulary bigrams are dropped, not pooled into UNK, so a
    fully novel chunk maps to the zero vector.
    """
    offset = 2  # PAD, UNK occupy 0 and 1
    dim = len(vocab) - offset
    counts = Counter(tokens)
    pairs = sorted(
        (vocab.index[t] - offset, float(c))
        for t, c in counts.items()
        if t in vocab.index and t not in (PAD_TOKEN, UNK_TOKEN)
    )
    indices = np.array([i for i, _ in pairs], dtype=np.int64)
    values = np.array([v for _, v in pairs], dtype=np.float64)
    norm = np.linalg.norm(values)
    if norm > 0:
        values = values / norm
    return SparseVector(indices=indices, values=values, dim=dim)


def append_pv(x: SparseVector, pv: ProbabilityVector) -> SparseVector:
    """Extend with the probability vector as a dense block after the
    bigram dimensions."""
    block = np.asarray(pv.probs, dtype=np.float64)
    nonzero = np.nonzero(block)[0]
    return SparseVector(
        indices=np.concatenate([x.indices, x.dim + nonzero]),
        values=np.concatenate([x.values, block[nonzero]]),
        dim=x.dim + len(block),
    )


def stack_features(vectors: Sequence[SparseVector]) -> np.ndarray:
    """Dense (n, dim) matrix; every vector must agree on dim."""
    if not vectors:
        raise DegenerateDataset("no feature vectors")
    dims = {v.dim for v in vectors}
    if len(dims) != 1:
        raise DimensionMismatch(f"inconsistent feature dimensions {sorted(dims)}")
    out = np.zeros((len(vectors), vectors[0].dim))
    for i, v in enumerate(vectors):
        out[i, v.indices] = v.values
    return out


def _solve_coordinate(w_j: float, g: np.ndarray, b: np.ndarray, c_reg: float) -> float:
    """Exact minimum of v^2/2 + C * sum(max(0, b_i - g_i v)) over v.

    Derivative is v - C * S(v) where S(v) sums g_i over active hinge
    terms; S only shrinks as v grows, so the function is convex and the
    minimum sits in the first breakpoint segment where C*S(v) falls
    below the segment's right edge.
    """
    bp = b / g
    order = np.argsort(bp, kind="stable")
    s = g[g > 0].sum()
    lo = -np.inf
    for idx in order:
        edge = bp[idx]
        v_star = c_reg * s
        if v_star <= edge:
            return max(v_star, lo) if np.isfinite(lo) else v_star
        s -= abs(g[idx])
        lo = edge
    return max(c_reg * s, lo) if np.isfinite(lo) else c_reg * s


def _train_binary(
    xt: np.ndarray, y: np.ndarray, tol: float, max_iter: int, c_reg: float
) -> tuple[np.ndarray, str, int, list[float]]:
    """One-vs-rest subproblem on column-major features (dim+1, n); the
    last row is the constant bias feature."""
    dim_aug, n = xt.shape
    active_rows = [np.nonzero(xt[j])[0] for j in range(dim_aug)]
    w = np.zeros(dim_aug)
    prev_obj = None
    stop, sweeps = "max_iter", max_iter
    trace: list[float] = []
    for sweep in range(max_iter):
        scores = w @ xt
        for j in range(dim_aug):
            if j % 64 == 63:
                scores = w @ xt  # cap incremental-update drift
            rows = active_rows[j]
            if len(rows) == 0:
                if w[j] != 0.0:
                    w[j] = 0.0
                continue
            xj = xt[j, rows]
            g = y[rows] * xj
            b = 1.0 - y[rows] * scores[rows] + g * w[j]
            v = _solve_coordinate(w[j], g, b, c_reg)
            if v != w[j]:
                scores[rows] += xj * (v - w[j])
                w[j] = v
        obj = 0.5 * float(w @ w) + c_reg * float(
            np.maximum(0.0, 1.0 - y * (w @ xt)).sum()
        )
        trace.append(obj)
        if prev_obj is not None and abs(prev_obj - obj) <= tol * max(prev_obj, 1e-12):
            stop, sweeps = "tol", sweep + 1
            break
        prev_obj = obj
    return w, stop, sweeps, trace


def train_linear(
    x: np.ndarray,
    labels: np.ndarray,
    tol: float = 1e-5,
    max_iter: int = 1500,
    c_reg: float = 1.0,
) -> LinearModel:
    """One-vs-rest training over a dense feature matrix (n, dim)."""
    labels = np.asarray(labels)
    classes = sorted(int(c) for c in np.unique(labels))
    if len(classes) < 2:
        raise DegenerateDataset(f"need >= 2 classes, got {len(classes)}")
    n, dim = x.shape
    # column-major with the bias feature appended as a constant-1 row
    xt = np.vstack([np.ascontiguousarray(x.T, dtype=np.float64), np.ones((1, n))])
    weights = np.zeros((len(classes), dim), dtype=np.float32)
    bias = np.zeros(len(classes), dtype=np.float32)
    stops, sweeps, traces = [], [], []
    for row, cls in enumerate(classes):
        y = np.where(labels == cls, 1.0, -1.0)
        w, stop, n_sweeps, trace = _train_binary(xt, y, tol, max_iter, c_reg)
        weights[row] = w[:dim].astype(np.float32)
        bias[row] = np.float32(w[dim])
        stops.append(stop)
        sweeps.append(n_sweeps)
        traces.append(trace)
    return LinearModel(
        classes=classes, weights=weights, bias=bias, dim=dim,
        stop_reasons=stops, sweeps=sweeps, objective_traces=traces,
    )


def decision_scores(model: LinearModel, x: np.ndarray) -> np.ndarray:
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    if x.shape[1] != model.dim:
        raise DimensionMismatch(f"input dim {x.shape[1]} != model dim {model.dim}")
    return x @ model.weights.astype(np.float64).T + model.bias.astype(np.float64)


def predict(model: LinearModel, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Argmax class per row plus the per-class scores; ties break to the
    lowest class id (classes are stored sorted)."""
    scores = decision_scores(model, x)
    picks = np.asarray(model.classes)[scores.argmax(axis=1)]
    return picks, scores


def hinge_objective(
    model_weights: np.ndarray, bias: float, x: np.ndarray, y: np.ndarray, c_reg: float = 1.0
) -> float:
    margins = 1.0 - y * (x @ model_weights + bias)
    reg = 0.5 * (model_weights @ model_weights + bias * bias)
    return float(reg + c_reg * np.maximum(0.0, margins).sum())


def save_linear(model: LinearModel, meta: dict, path: str | Path) -> None:
    header = {
        "kind": SVM_KIND,
        "classes": model.classes,
        "dim": model.dim,
        "stop_reasons": model.stop_reasons,
        "sweeps": model.sweeps,
        "meta": meta,
    }
    write_tensor_container(
        path, header, [("weights", model.weights), ("bias", model.bias)]
    )


def load_linear(path: str | Path) -> tuple[LinearModel, dict]:
    header, tensors = read_tensor_container(path)
    if header.get("kind") != SVM_KIND:
        raise CorruptCheckpoint(f"{path}: not a linear model checkpoint")
    model = LinearModel(
        classes=[int(c) for c in header["classes"]],
        weights=tensors["weights"],
        bias=tensors["bias"],
        dim=int(header["dim"]),
        stop_reasons=list(header["stop_reasons"]),
        sweeps=[int(s) for s in header["sweeps"]],
    )
    return model, dict(header.get("meta", {}))
