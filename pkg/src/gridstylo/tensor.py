"""Dense numeric core for the convolutional classifiers.

Tensors are plain numpy arrays. Each layer is a pair of functions:
``forward(...) -> (out, cache)`` and ``backward(dout, cache) -> grads``,
with the backward pass written out by hand. Everything accepts a batch
axis; single examples are batches of one. Double precision is used for
gradient checking, single precision for training.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import EmptyMap, IndexOutOfRange, SequenceTooShort, ShapeMismatch


@dataclass
class ConvSpec:
    """One bank of 1-D convolutions over an embedded sequence."""

    window_sizes: list[int]
    num_maps: int
    input_dim: int
    activation: str = "relu"  # or "tanh"

    def __post_init__(self) -> None:
        if not self.window_sizes or any(w < 1 for w in self.window_sizes):
            raise ValueError("window sizes must be >= 1")
        if self.num_maps < 1:
            raise ValueError("num_maps must be >= 1")
        if self.activation not in ("relu", "tanh"):
            raise ValueError(f"unknown activation {self.activation!r}")


# ---------------------------------------------------------------------------
# embedding lookup


def embed_lookup(indices: np.ndarray, emb: np.ndarray) -> tuple[np.ndarray, tuple]:
    """Rows of ``emb`` selected by ``indices`` (any leading shape)."""
    indices = np.asarray(indices)
    if indices.size and (indices.min() < 0 or indices.max() >= emb.shape[0]):
        raise IndexOutOfRange(
            f"index outside [0, {emb.shape[0]}) in embedding lookup"
        )
    return emb[indices], (indices, emb.shape)


def embed_lookup_backward(dout: np.ndarray, cache: tuple) -> np.ndarray:
    """Scatter-add row gradients; the PAD row (index 0) stays frozen."""
    indices, emb_shape = cache
    demb = np.zeros(emb_shape, dtype=dout.dtype)
    np.add.at(demb, indices.reshape(-1), dout.reshape(-1, emb_shape[1]))
    demb[0] = 0.0
    return demb


# ---------------------------------------------------------------------------
# convolution bank


def conv1d_bank(
    seq: np.ndarray,
    spec: ConvSpec,
    weights: list[np.ndarray],
    biases: list[np.ndarray],
) -> tuple[list[np.ndarray], tuple]:
    """Valid stride-1 convolutions for every window size in the spec.

    ``seq`` is (batch, len, dim); ``weights[k]`` is (w_k * dim, num_maps).
    Returns one activated map (batch, len - w_k + 1, num_maps) per window.
    """
    batch, length, dim = seq.shape
    if dim != spec.input_dim:
        raise ShapeMismatch(f"sequence dim {dim} != spec input dim {spec.input_dim}")
    if length < max(spec.window_sizes):
        raise SequenceTooShort(
            f"length {length} < max window {max(spec.window_sizes)}"
        )
    maps, caches = [], []
    for w, wmat, b in zip(spec.window_sizes, weights, biases):
        steps = length - w + 1
        cols = np.stack([seq[:, o : o + steps, :] for o in range(w)], axis=2)
        flat = cols.reshape(batch * steps, w * dim)
        pre = (flat @ wmat + b).reshape(batch, steps, spec.num_maps)
        out = np.maximum(pre, 0.0) if spec.activation == "relu" else np.tanh(pre)
        maps.append(out)
        caches.append((flat, pre, out, w, steps))
    return maps, (caches, seq.shape, spec)


def conv1d_bank_backward(
    dmaps: list[np.ndarray], cache: tuple, weights: list[np.ndarray]
) -> tuple[np.ndarray, list[np.ndarray], list[np.ndarray]]:
    """Gradients wrt the input sequence and every filter/bias."""
    caches, seq_shape, spec = cache
    batch, length, dim = seq_shape
    dseq = np.zeros(seq_shape, dtype=dmaps[0].dtype)
    dws, dbs = [], []
    for dmap, (flat, pre, out, w, steps), wmat in zip(dmaps, caches, weights):
        if spec.activation == "relu":
            dpre = dmap * (pre > 0.0)
        else:
            dpre = dmap * (1.0 - out * out)
        dpre_flat = dpre.reshape(batch * steps, spec.num_maps)
        dws.append(flat.T @ dpre_flat)
        dbs.append(dpre_flat.sum(axis=0))
        dcols = (dpre_flat @ wmat.T).reshape(batch, steps, w, dim)
        for o in range(w):
            dseq[:, o : o + steps, :] += dcols[:, :, o, :]
    return dseq, dws, dbs


# ---------------------------------------------------------------------------
# pooling


def max_over_time(maps: list[np.ndarray]) -> tuple[np.ndarray, tuple]:
    """Per-filter max over the time axis, concatenated across windows."""
    pooled, argmaxes = [], []
    for m in maps:
        if m.shape[1] < 1:
            raise EmptyMap("feature map has no time steps")
        idx = m.argmax(axis=1)  # first occurrence on ties
        pooled.append(np.take_along_axis(m, idx[:, None, :], axis=1)[:, 0, :])
        argmaxes.append(idx)
    return np.concatenate(pooled, axis=1), (argmaxes, [m.shape for m in maps])


def max_over_time_backward(dout: np.ndarray, cache: tuple) -> list[np.ndarray]:
    """Route each pooled gradient to its argmax position only."""
    argmaxes, shapes = cache
    dmaps, col = [], 0
    for idx, shape in zip(argmaxes, shapes):
        width = shape[2]
        dmap = np.zeros(shape, dtype=dout.dtype)
        np.put_along_axis(
            dmap, idx[:, None, :], dout[:, col : col + width][:, None, :], axis=1
        )
        dmaps.append(dmap)
        col += width
    return dmaps


# ---------------------------------------------------------------------------
# dropout


def dropout(
    vec: np.ndarray, keep_prob: float, rng: np.random.Generator, training: bool
) -> tuple[np.ndarray, tuple]:
    """Inverted dropout: kept units scale by 1/keep_prob, inference is identity."""
    if not 0.0 < keep_prob <= 1.0:
        raise ValueError(f"keep_prob {keep_prob} outside (0, 1]")
    if not training or keep_prob == 1.0:
        return vec, (None, 1.0)
    mask = (rng.random(vec.shape) < keep_prob).astype(vec.dtype)
    scale = 1.0 / keep_prob
    return vec * mask * scale, (mask, scale)


def dropout_backward(dout: np.ndarray, cache: tuple) -> np.ndarray:
    mask, scale = cache
    if mask is None:
        return dout
    return dout * mask * scale


# ---------------------------------------------------------------------------
# softmax cross-entropy


def softmax_xent(
    logits: np.ndarray, labels: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Per-example negative log likelihood and the class distributions.

    Computed in log space after max subtraction, so large logits cannot
    overflow. Gradient wrt logits is ``probs - one_hot(labels)``.
    """
    logits = np.atleast_2d(logits)
    labels = np.atleast_1d(labels)
    if labels.min() < 0 or labels.max() >= logits.shape[1]:
        raise IndexOutOfRange("label outside class range")
    shifted = logits - logits.max(axis=1, keepdims=True)
    lse = np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    logp = shifted - lse
    losses = -logp[np.arange(len(labels)), labels]
    return losses, np.exp(logp)


def softmax_xent_backward(probs: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """d(sum of per-example losses)/d logits; divide by batch for a mean."""
    grad = probs.copy()
    grad[np.arange(len(labels)), labels] -= 1.0
    return grad


# ---------------------------------------------------------------------------
# optimizer


@dataclass
class AdamState:
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)


def adam_step(
    params: dict[str, np.ndarray],
    grads: dict[str, np.ndarray],
    state: AdamState,
    lr: float = 0.001,
) -> None:
    """One bias-corrected Adam update, in place, over every named tensor."""
    state.t += 1
    bc1 = 1.0 - state.beta1**state.t
    bc2 = 1.0 - state.beta2**state.t
    for name, p in params.items():
        g = grads[name]
        if g.shape != p.shape:
            raise ShapeMismatch(f"grad shape {g.shape} != param shape {p.shape} [{name}]")
        if name not in state.m:
            state.m[name] = np.zeros_like(p)
            state.v[name] = np.zeros_like(p)
        m, v = state.m[name], state.v[name]
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * g * g
        p -= lr * (m / bc1) / (np.sqrt(v / bc2) + state.eps)


# ---------------------------------------------------------------------------
# initialization


def uniform_init(
    shape: tuple[int, ...], rng: np.random.Generator, half_range: float = 0.05
) -> np.ndarray:
    return rng.uniform(-half_range, half_range, size=shape)


def glorot_uniform(shape: tuple[int, ...], rng: np.random.Generator) -> np.ndarray:
    fan_in, fan_out = shape[0], shape[-1]
    limit = math.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


# ---------------------------------------------------------------------------
# gradient checking


@dataclass
class GradCheckReport:
    tolerance: float
    max_rel_err: float
    per_param: dict[str, float]

    @property
    def passed(self) -> bool:
        return self.max_rel_err < self.tolerance

    def render(self) -> str:
        lines = [
            f"  {name:<16s} max rel err {err:.3e}"
            for name, err in sorted(self.per_param.items())
        ]
        verdict = "PASS" if self.passed else "FAIL"
        lines.append(
            f"{verdict}: max relative error {self.max_rel_err:.3e}"
            f" (tolerance {self.tolerance:.1e})"
        )
        return "\n".join(lines)


def grad_check(
    loss_and_grads: Callable[[dict[str, np.ndarray]], tuple[float, dict[str, np.ndarray]]],
    params: dict[str, np.ndarray],
    tolerance: float = 1e-4,
    h: float = 1e-5,
    max_elements_per_tensor: int = 1000,
    rng: np.random.Generator | None = None,
) -> GradCheckReport:
    """Compare analytic gradients against central finite differences.

    ``loss_and_grads`` must be a pure function of ``params`` (re-seed any
    internal randomness per call). Parameters are perturbed in place and
    restored. Large tensors are spot-checked on a random element sample.
    """
    rng = rng or np.random.default_rng(0)
    _, analytic = loss_and_grads(params)
    per_param: dict[str, float] = {}
    for name, p in params.items():
        flat = p.reshape(-1)
        if flat.size <= max_elements_per_tensor:
            picks = np.arange(flat.size)
        else:
            picks = rng.choice(flat.size, size=max_elements_per_tensor, replace=False)
        worst = 0.0
        ana = analytic[name].reshape(-1)
        for i in picks:
            orig = flat[i]
            flat[i] = orig + h
            lo_plus, _ = loss_and_grads(params)
            flat[i] = orig - h
            lo_minus, _ = loss_and_grads(params)
            flat[i] = orig
            numeric = (lo_plus - lo_minus) / (2.0 * h)
            denom = max(abs(ana[i]), abs(numeric))
            if denom > 1e-10:
                worst = max(worst, abs(ana[i] - numeric) / denom)
        per_param[name] = worst
    overall = max(per_param.values()) if per_param else 0.0
    return GradCheckReport(tolerance=tolerance, max_rel_err=overall, per_param=per_param)
