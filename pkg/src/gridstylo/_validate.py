"""Input validation shared by the estimators and the command line."""

from __future__ import annotations

from typing import Sequence

from .errors import ConfigError, SchemaViolation, ShapeMismatch

CNN_KINDS = ("cnn2", "cnn2-pv", "cnn2-de")
SVM_KINDS = ("svm2", "svm2-pv")
ALL_MODELS = CNN_KINDS + SVM_KINDS
DISC_KINDS = ("none", "gr", "rst")
READINGS = ("local", "global", "edu-order")


def validate_combo(model: str | None, disc: str, reading: str | None) -> None:
    """Reject inconsistent model/discourse/reading settings.

    Rules: disc=none forbids a reading; a reading belongs to cnn2-de
    only; edu-order exists only for rst; the -pv and -de variants need
    discourse annotations; plain cnn2/svm2 take none.
    """
    if model is not None and model not in ALL_MODELS:
        raise ConfigError(f"unknown model {model!r}, expected one of {ALL_MODELS}")
    if disc not in DISC_KINDS:
        raise ConfigError(f"unknown disc type {disc!r}, expected one of {DISC_KINDS}")
    if reading is not None and reading not in READINGS:
        raise ConfigError(f"unknown reading {reading!r}, expected one of {READINGS}")
    if disc == "none" and reading is not None:
        raise ConfigError("disc=none forbids a reading")
    if reading == "edu-order" and disc != "rst":
        raise ConfigError("edu-order reading requires disc=rst")
    if model in ("cnn2", "svm2") and disc != "none":
        raise ConfigError(f"{model} takes no discourse features; use disc=none")
    if model in ("cnn2-pv", "svm2-pv", "cnn2-de") and disc == "none":
        raise ConfigError(f"{model} requires disc=gr or disc=rst")
    if model == "cnn2-de" and reading is None:
        raise ConfigError("cnn2-de requires a reading (local, global, or edu-order)")
    if model in ("cnn2", "cnn2-pv", "svm2", "svm2-pv") and reading is not None:
        raise ConfigError(f"{model} takes no reading; that flag belongs to cnn2-de")


def ensure_annotated_chunks(x: Sequence) -> list:
    from .pipeline import AnnotatedChunk  # import cycle guard

    if len(x) == 0:
        raise SchemaViolation("empty chunk list")
    bad = [i for i, item in enumerate(x) if not isinstance(item, AnnotatedChunk)]
    if bad:
        raise SchemaViolation(
            f"expected AnnotatedChunk items, found {type(x[bad[0]]).__name__} at {bad[0]}"
        )
    return list(x)


def ensure_labels(y: Sequence, n: int) -> list[str]:
    labels = [str(v) for v in y]
    if len(labels) != n:
        raise ShapeMismatch(f"{len(labels)} labels for {n} chunks")
    return labels


def ensure_annotations_present(chunks: Sequence, purpose: str) -> None:
    from .errors import MissingFile

    missing = [c.chunk.id for c in chunks if c.annotation is None]
    if missing:
        raise MissingFile(
            f"{purpose} needs annotations, but {len(missing)} chunk(s) have none"
            f" (first: {missing[0]})"
        )
