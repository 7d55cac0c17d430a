"""Convolutional author classifiers over char-bigram sequences.

Three architectures share one spine: embed the bigram indices, run a bank
of window-3/4/5 convolutions, max-pool over time, and classify the pooled
vector with a softmax layer. The variants differ only in what joins the
pooled vector before dropout: nothing (cnn2), the grid probability vector
(cnn2-pv), or a parallel convolutional branch over discourse tokens
(cnn2-de).
"""

from __future__ import annotations

import hashlib
import json
import struct
import zlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import (
    CorruptCheckpoint,
    DegenerateDataset,
    DimensionMismatch,
    NonFiniteLoss,
)
from .tensor import (
    AdamState,
    ConvSpec,
    adam_step,
    conv1d_bank,
    conv1d_bank_backward,
    dropout,
    dropout_backward,
    embed_lookup,
    embed_lookup_backward,
    glorot_uniform,
    max_over_time,
    max_over_time_backward,
    softmax_xent,
    softmax_xent_backward,
    uniform_init,
)

MODEL_KINDS = ("cnn2", "cnn2-pv", "cnn2-de")

CHECKPOINT_MAGIC = b"GSTYLO01"
CHECKPOINT_VERSION = 1


@dataclass
class TrainConfig:
    epochs: int = 50
    batch_size: int = 32
    lr: float = 0.001
    keep_prob: float = 0.75
    emb_dim_char: int = 50
    emb_dim_disc: int = 20
    num_maps: int = 100
    num_maps_disc: int = 100
    windows: list[int] = field(default_factory=lambda: [3, 4, 5])
    disc_windows: list[int] = field(default_factory=lambda: [3, 4, 5])
    activation: str = "relu"
    seed: int = 0
    max_char_len: int = 2200
    max_disc_len: int = 256

    def __post_init__(self) -> None:
        positive = {
            "epochs": self.epochs,
            "batch_size": self.batch_size,
            "lr": self.lr,
            "keep_prob": self.keep_prob,
            "emb_dim_char": self.emb_dim_char,
            "emb_dim_disc": self.emb_dim_disc,
            "num_maps": self.num_maps,
            "num_maps_disc": self.num_maps_disc,
            "max_char_len": self.max_char_len,
            "max_disc_len": self.max_disc_len,
        }
        for name, value in positive.items():
            if value <= 0:
                raise ValueError(f"{name} must be positive, got {value}")
        if self.max_char_len < max(self.windows):
            raise ValueError("max_char_len smaller than the largest window")
        if self.max_disc_len < max(self.disc_windows):
            raise ValueError("max_disc_len smaller than the largest window")


@dataclass
class Batch:
    """Model inputs for one or more chunks, already indexed and padded."""

    char: np.ndarray  # (n, max_char_len) int
    disc: np.ndarray | None = None  # (n, max_disc_len) int
    pv: np.ndarray | None = None  # (n, pv_dim) float
    labels: np.ndarray | None = None  # (n,) int

    def __len__(self) -> int:
        return len(self.char)

    def take(self, idx: np.ndarray) -> "Batch":
        return Batch(
            char=self.char[idx],
            disc=None if self.disc is None else self.disc[idx],
            pv=None if self.pv is None else self.pv[idx],
            labels=None if self.labels is None else self.labels[idx],
        )


@dataclass
class ModelParams:
    kind: str
    n_classes: int
    char_spec: ConvSpec
    disc_spec: ConvSpec | None
    pv_dim: int
    tensors: dict[str, np.ndarray]

    @property
    def feature_dim(self) -> int:
        dim = self.char_spec.num_maps * len(self.char_spec.window_sizes)
        if self.disc_spec is not None:
            dim += self.disc_spec.num_maps * len(self.disc_spec.window_sizes)
        return dim + self.pv_dim

    def conv_params(self, branch: str) -> tuple[list[np.ndarray], list[np.ndarray]]:
        spec = self.char_spec if branch == "char" else self.disc_spec
        ws = [self.tensors[f"{branch}_w{w}"] for w in spec.window_sizes]
        bs = [self.tensors[f"{branch}_b{w}"] for w in spec.window_sizes]
        return ws, bs


def init_params(
    kind: str,
    n_classes: int,
    char_vocab_size: int,
    config: TrainConfig,
    disc_vocab_size: int | None = None,
    pv_dim: int | None = None,
    dtype=np.float32,
) -> ModelParams:
    """Fresh parameters: embeddings ~ U(-0.05, 0.05) with a zeroed PAD row,
    Glorot-uniform filters and softmax weights, zero biases."""
    if kind not in MODEL_KINDS:
        raise ValueError(f"unknown model kind {kind!r}")
    if kind == "cnn2-pv" and not pv_dim:
        raise DimensionMismatch("cnn2-pv needs a probability-vector dimension")
    if kind == "cnn2-de" and not disc_vocab_size:
        raise DimensionMismatch("cnn2-de needs a discourse vocabulary")
    rng = np.random.default_rng(config.seed)
    char_spec = ConvSpec(
        window_sizes=list(config.windows),
        num_maps=config.num_maps,
        input_dim=config.emb_dim_char,
        activation=config.activation,
    )
    tensors: dict[str, np.ndarray] = {}
    tensors["char_emb"] = uniform_init((char_vocab_size, config.emb_dim_char), rng)
    tensors["char_emb"][0] = 0.0
    for w in char_spec.window_sizes:
        tensors[f"char_w{w}"] = glorot_uniform(
            (w * config.emb_dim_char, config.num_maps), rng
        )
        tensors[f"char_b{w}"] = np.zeros(config.num_maps)
    disc_spec = None
    if kind == "cnn2-de":
        disc_spec = ConvSpec(
            window_sizes=list(config.disc_windows),
            num_maps=config.num_maps_disc,
            input_dim=config.emb_dim_disc,
            activation=config.activation,
        )
        tensors["disc_emb"] = uniform_init((disc_vocab_size, config.emb_dim_disc), rng)
        tensors["disc_emb"][0] = 0.0
        for w in disc_spec.window_sizes:
            tensors[f"disc_w{w}"] = glorot_uniform(
                (w * config.emb_dim_disc, config.num_maps_disc), rng
            )
            tensors[f"disc_b{w}"] = np.zeros(config.num_maps_disc)
    params = ModelParams(
        kind=kind,
        n_classes=n_classes,
        char_spec=char_spec,
        disc_spec=disc_spec,
        pv_dim=pv_dim or 0,
        tensors=tensors,
    )
    tensors["softmax_w"] = glorot_uniform((params.feature_dim, n_classes), rng)
    tensors["softmax_b"] = np.zeros(n_classes)
    for name in tensors:
        tensors[name] = tensors[name].astype(dtype)
    return params


def pad_or_truncate(
    tokens: Sequence[int], max_len: int, pad_index: int = 0
) -> np.ndarray:
    """Fixed-length index row: right-padded with PAD, or the first max_len."""
    row = np.full(max_len, pad_index, dtype=np.int32)
    take = min(len(tokens), max_len)
    row[:take] = np.asarray(tokens[:take], dtype=np.int32)
    return row


# ---------------------------------------------------------------------------
# forward / backward


def _check_batch(params: ModelParams, batch: Batch) -> None:
    if params.kind == "cnn2-pv":
        if batch.pv is None or batch.pv.shape[1] != params.pv_dim:
            got = None if batch.pv is None else batch.pv.shape[1]
            raise DimensionMismatch(
                f"probability vector of dim {params.pv_dim} required, got {got}"
            )
    if params.kind == "cnn2-de" and batch.disc is None:
        raise DimensionMismatch("discourse index sequence required")


def _forward(
    params: ModelParams,
    batch: Batch,
    training: bool,
    rng: np.random.Generator,
    keep_prob: float,
) -> tuple[np.ndarray, tuple]:
    _check_batch(params, batch)
    char_ws, char_bs = params.conv_params("char")
    emb, emb_cache = embed_lookup(batch.char, params.tensors["char_emb"])
    maps, conv_cache = conv1d_bank(emb, params.char_spec, char_ws, char_bs)
    pooled, pool_cache = max_over_time(maps)
    branch_caches = {"char": (emb_cache, conv_cache, pool_cache)}

    pieces = [pooled]
    if params.kind == "cnn2-de":
        disc_ws, disc_bs = params.conv_params("disc")
        demb, demb_cache = embed_lookup(batch.disc, params.tensors["disc_emb"])
        dmaps, dconv_cache = conv1d_bank(demb, params.disc_spec, disc_ws, disc_bs)
        dpooled, dpool_cache = max_over_time(dmaps)
        branch_caches["disc"] = (demb_cache, dconv_cache, dpool_cache)
        pieces.append(dpooled)
    elif params.kind == "cnn2-pv":
        pieces.append(batch.pv.astype(pooled.dtype))

    feats = np.concatenate(pieces, axis=1)
    dropped, drop_cache = dropout(feats, keep_prob, rng, training)
    logits = dropped @ params.tensors["softmax_w"] + params.tensors["softmax_b"]
    widths = [p.shape[1] for p in pieces]
    return logits, (branch_caches, drop_cache, dropped, widths)


def _backward(
    dlogits: np.ndarray, cache: tuple, params: ModelParams
) -> dict[str, np.ndarray]:
    branch_caches, drop_cache, dropped, widths = cache
    grads: dict[str, np.ndarray] = {
        "softmax_w": dropped.T @ dlogits,
        "softmax_b": dlogits.sum(axis=0),
    }
    dfeats = dropout_backward(dlogits @ params.tensors["softmax_w"].T, drop_cache)

    dchar = dfeats[:, : widths[0]]
    emb_cache, conv_cache, pool_cache = branch_caches["char"]
    dmaps = max_over_time_backward(dchar, pool_cache)
    char_ws, _ = params.conv_params("char")
    demb, dws, dbs = conv1d_bank_backward(dmaps, conv_cache, char_ws)
    grads["char_emb"] = embed_lookup_backward(demb, emb_cache)
    for w, dw, db in zip(params.char_spec.window_sizes, dws, dbs):
        grads[f"char_w{w}"] = dw
        grads[f"char_b{w}"] = db

    if params.kind == "cnn2-de":
        ddisc = dfeats[:, widths[0] :]
        emb_cache, conv_cache, pool_cache = branch_caches["disc"]
        dmaps = max_over_time_backward(ddisc, pool_cache)
        disc_ws, _ = params.conv_params("disc")
        demb, dws, dbs = conv1d_bank_backward(dmaps, conv_cache, disc_ws)
        grads["disc_emb"] = embed_lookup_backward(demb, emb_cache)
        for w, dw, db in zip(params.disc_spec.window_sizes, dws, dbs):
            grads[f"disc_w{w}"] = dw
            grads[f"disc_b{w}"] = db
    return grads


def loss_and_grads(
    params: ModelParams,
    batch: Batch,
    keep_prob: float = 1.0,
    rng: np.random.Generator | None = None,
    training: bool = True,
) -> tuple[float, dict[str, np.ndarray]]:
    """Mean cross-entropy over the batch and its gradient wrt every tensor."""
    rng = rng or np.random.default_rng(0)
    logits, cache = _forward(params, batch, training, rng, keep_prob)
    losses, probs = softmax_xent(logits, batch.labels)
    dlogits = softmax_xent_backward(probs, batch.labels) / len(losses)
    return float(losses.mean()), _backward(dlogits, cache, params)


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def _predict_1d_friendly(params: ModelParams, batch: Batch, squeeze: bool) -> np.ndarray:
    rng = np.random.default_rng(0)
    logits, _ = _forward(params, batch, training=False, rng=rng, keep_prob=1.0)
    probs = _softmax(logits)
    return probs[0] if squeeze else probs


def cnn2_forward(
    char_indices: np.ndarray, params: ModelParams, training: bool = False
) -> np.ndarray:
    """Class distribution(s) for encoded bigram rows; (L,) or (n, L) input."""
    arr = np.asarray(char_indices)
    squeeze = arr.ndim == 1
    return _predict_1d_friendly(params, Batch(char=np.atleast_2d(arr)), squeeze)


def cnn2_pv_forward(
    char_indices: np.ndarray,
    pv: np.ndarray,
    params: ModelParams,
    training: bool = False,
) -> np.ndarray:
    arr = np.asarray(char_indices)
    squeeze = arr.ndim == 1
    batch = Batch(char=np.atleast_2d(arr), pv=np.atleast_2d(np.asarray(pv)))
    return _predict_1d_friendly(params, batch, squeeze)


def cnn2_de_forward(
    char_indices: np.ndarray,
    disc_indices: np.ndarray,
    params: ModelParams,
    training: bool = False,
) -> np.ndarray:
    arr = np.asarray(char_indices)
    squeeze = arr.ndim == 1
    batch = Batch(char=np.atleast_2d(arr), disc=np.atleast_2d(np.asarray(disc_indices)))
    return _predict_1d_friendly(params, batch, squeeze)


def predict_proba(
    params: ModelParams, data: Batch, batch_size: int = 256
) -> np.ndarray:
    """Evaluation-mode class distributions for every row of ``data``."""
    out = []
    rng = np.random.default_rng(0)
    for start in range(0, len(data), batch_size):
        piece = data.take(np.arange(start, min(start + batch_size, len(data))))
        logits, _ = _forward(params, piece, training=False, rng=rng, keep_prob=1.0)
        out.append(_softmax(logits))
    return np.concatenate(out, axis=0)


def kink_margins(params: ModelParams, batch: Batch) -> tuple[float, float]:
    """Distance of the forward pass from non-differentiable points: the
    smallest |pre-activation| and the smallest max-pool top-2 gap.

    Finite-difference gradient checks are only trustworthy when both
    margins comfortably exceed the probe step, so callers resample the
    instance until they do.
    """
    rng = np.random.default_rng(0)
    _, cache = _forward(params, batch, training=False, rng=rng, keep_prob=1.0)
    branch_caches = cache[0]
    min_pre, min_gap = np.inf, np.inf
    for _, conv_cache, _ in branch_caches.values():
        for _, pre, out, _, steps in conv_cache[0]:
            min_pre = min(min_pre, float(np.abs(pre).min()))
            if steps >= 2:
                top2 = np.partition(out, out.shape[1] - 2, axis=1)[:, -2:, :]
                min_gap = min(min_gap, float((top2[:, 1, :] - top2[:, 0, :]).min()))
    return min_pre, min_gap


# ---------------------------------------------------------------------------
# training


def train(
    kind: str,
    data: Batch,
    config: TrainConfig,
    char_vocab_size: int,
    disc_vocab_size: int | None = None,
    dtype=np.float32,
) -> tuple[ModelParams, list[float]]:
    """Seeded epoch loop: shuffle, mean-cross-entropy batches, Adam updates.

    Returns the final parameters and the per-epoch mean training loss.
    """
    if data.labels is None:
        raise ValueError("training data must carry labels")
    classes = np.unique(data.labels)
    if len(classes) < 2:
        raise DegenerateDataset(f"need >= 2 classes, got {len(classes)}")
    n_classes = int(data.labels.max()) + 1
    pv_dim = None if data.pv is None else data.pv.shape[1]
    params = init_params(
        kind,
        n_classes,
        char_vocab_size,
        config,
        disc_vocab_size=disc_vocab_size,
        pv_dim=pv_dim,
        dtype=dtype,
    )
    state = AdamState()
    rng = np.random.default_rng(config.seed)
    n = len(data)
    epoch_losses: list[float] = []
    for epoch in range(config.epochs):
        perm = rng.permutation(n)
        total = 0.0
        for start in range(0, n, config.batch_size):
            batch = data.take(perm[start : start + config.batch_size])
            loss, grads = loss_and_grads(
                params, batch, keep_prob=config.keep_prob, rng=rng, training=True
            )
            if not np.isfinite(loss):
                raise NonFiniteLoss(
                    f"non-finite loss {loss} at epoch {epoch}, batch start {start}"
                )
            adam_step(params.tensors, grads, state, lr=config.lr)
            total += loss * len(batch)
        epoch_losses.append(total / n)
    return params, epoch_losses


# ---------------------------------------------------------------------------
# checkpoint container (shared with the linear models)


def write_tensor_container(
    path: str | Path, header: dict, tensors: list[tuple[str, np.ndarray]]
) -> None:
    """Magic, length-prefixed JSON header with a tensor directory, raw
    little-endian float32 blobs, trailing CRC32 of all preceding bytes."""
    directory, blobs, offset = [], [], 0
    for name, arr in tensors:
        raw = np.ascontiguousarray(arr, dtype="<f4").tobytes()
        directory.append(
            {"name": name, "shape": list(arr.shape), "offset": offset, "nbytes": len(raw)}
        )
        blobs.append(raw)
        offset += len(raw)
    full = dict(header)
    full["format_version"] = CHECKPOINT_VERSION
    full["tensors"] = directory
    hjson = json.dumps(full, sort_keys=True).encode("utf-8")
    body = CHECKPOINT_MAGIC + struct.pack("<I", len(hjson)) + hjson + b"".join(blobs)
    Path(path).write_bytes(body + struct.pack("<I", zlib.crc32(body) & 0xFFFFFFFF))


def read_tensor_container(path: str | Path) -> tuple[dict, dict[str, np.ndarray]]:
    data = Path(path).read_bytes()
    if len(data) < len(CHECKPOINT_MAGIC) + 8:
        raise CorruptCheckpoint(f"{path}: file too short")
    if data[: len(CHECKPOINT_MAGIC)] != CHECKPOINT_MAGIC:
        raise CorruptCheckpoint(f"{path}: bad magic")
    (stored_crc,) = struct.unpack("<I", data[-4:])
    if zlib.crc32(data[:-4]) & 0xFFFFFFFF != stored_crc:
        raise CorruptCheckpoint(f"{path}: CRC mismatch, file damaged or truncated")
    (hlen,) = struct.unpack("<I", data[8:12])
    try:
        header = json.loads(data[12 : 12 + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CorruptCheckpoint(f"{path}: unreadable header: {exc}") from exc
    version = header.get("format_version")
    if version != CHECKPOINT_VERSION:
        raise CorruptCheckpoint(
            f"{path}: format version {version!r}, this build reads {CHECKPOINT_VERSION}"
        )
    blob_start = 12 + hlen
    tensors: dict[str, np.ndarray] = {}
    for entry in header["tensors"]:
        lo = blob_start + entry["offset"]
        hi = lo + entry["nbytes"]
        if hi > len(data) - 4:
            raise CorruptCheckpoint(f"{path}: tensor {entry['name']!r} out of bounds")
        flat = np.frombuffer(data[lo:hi], dtype="<f4")
        tensors[entry["name"]] = flat.reshape(entry["shape"]).copy()
    return header, tensors


def _vocab_sha256(payload: object) -> str:
    canonical = json.dumps(payload, sort_keys=True).encode("utf-8")
    return hashlib.sha256(canonical).hexdigest()


def vocab_sidecar_path(path: str | Path) -> Path:
    return Path(f"{path}.vocab.json")


def save_checkpoint(params: ModelParams, meta: dict, path: str | Path) -> None:
    """Write the model container plus a JSON vocabulary sidecar whose
    sha256 is pinned in the container header."""
    meta = dict(meta)
    vocab_payload = {
        "char_vocab": meta.pop("char_vocab"),
        "disc_vocab": meta.pop("disc_vocab", None),
    }
    sidecar = vocab_sidecar_path(path)
    sidecar.write_text(
        json.dumps(vocab_payload, sort_keys=True, indent=1), encoding="utf-8"
    )
    header = {
        "kind": params.kind,
        "n_classes": params.n_classes,
        "pv_dim": params.pv_dim,
        "char_spec": vars(params.char_spec),
        "disc_spec": None if params.disc_spec is None else vars(params.disc_spec),
        "vocab_sha256": _vocab_sha256(vocab_payload),
        "meta": meta,
    }
    write_tensor_container(path, header, sorted(params.tensors.items()))


def load_checkpoint(path: str | Path) -> tuple[ModelParams, dict]:
    """Inverse of save_checkpoint; verifies the sidecar hash. The returned
    meta dict regains the vocabulary token lists."""
    header, tensors = read_tensor_container(path)
    if header.get("kind") not in MODEL_KINDS:
        raise CorruptCheckpoint(f"{path}: not a convolutional model checkpoint")
    sidecar = vocab_sidecar_path(path)
    if not sidecar.is_file():
        raise CorruptCheckpoint(f"{path}: vocabulary sidecar {sidecar} missing")
    vocab_payload = json.loads(sidecar.read_text(encoding="utf-8"))
    if _vocab_sha256(vocab_payload) != header["vocab_sha256"]:
        raise CorruptCheckpoint(f"{path}: vocabulary sidecar does not match header hash")
    params = ModelParams(
        kind=header["kind"],
        n_classes=header["n_classes"],
        char_spec=ConvSpec(**header["char_spec"]),
        disc_spec=None if header["disc_spec"] is None else ConvSpec(**header["disc_spec"]),
        pv_dim=header["pv_dim"],
        tensors=tensors,
    )
    meta = dict(header["meta"])
    meta["char_vocab"] = vocab_payload["char_vocab"]
    meta["disc_vocab"] = vocab_payload["disc_vocab"]
    return params, meta
