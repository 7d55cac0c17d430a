"""Command-line entry point: `aa <subcommand>`.

Every run writes a `run.json` echo of its resolved configuration into the
output directory, and all JSON output uses sorted keys so identical
configurations reproduce identical bytes. Exit codes: 0 success, 2
configuration error, 3 data error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import models
from ._validate import ALL_MODELS, CNN_KINDS, validate_combo
from .errors import ConfigError, DataError, GridStyloError
from .estimators import CnnAuthorClassifier, DiscourseFeaturizer, SvmAuthorClassifier
from .featurize import Vocab
from .harness import (
    chunk_sweep,
    default_sweep_sizes,
    nearest_neighbors,
    run_multiclass,
    run_pairwise,
    write_result_json,
    write_results_csv,
    write_sweep_summary,
)
from .models import Batch, TrainConfig, init_params, kink_margins, loss_and_grads
from .pipeline import load_corpus
from .synth import CorpusSpec, generate_corpus
from .tensor import grad_check


def _parse_int_list(text: str) -> list[int]:
    if ":" in text:
        parts = [int(p) for p in text.split(":")]
        if len(parts) != 3:
            raise ConfigError(f"range spec {text!r} must be start:stop:step")
        start, stop, step = parts
        return list(range(start, stop + 1, step))
    return [int(p) for p in text.split(",") if p]


def _resolve_seed(args: argparse.Namespace) -> int:
    if args.seed is not None:
        return args.seed
    return int(os.environ.get("AA_SEED", "0"))


def _write_run_json(out: Path, command: str, config: dict) -> None:
    payload = {"command": command, "config": config}
    (out / "run.json").write_text(
        json.dumps(payload, sort_keys=True, indent=1) + "\n", encoding="utf-8"
    )


def _train_kwargs(args: argparse.Namespace) -> dict:
    return {
        "epochs": args.epochs,
        "batch_size": args.batch_size,
        "lr": args.lr,
        "keep_prob": args.keep_prob,
        "emb_dim_char": args.emb_dim_char,
        "emb_dim_disc": args.emb_dim_disc,
        "num_maps": args.num_maps,
        "num_maps_disc": args.num_maps_disc,
        "windows": tuple(_parse_int_list(args.windows)),
        "activation": args.activation,
        "max_char_len": args.max_char_len,
        "max_disc_len": args.max_disc_len,
        "min_count": args.min_count,
    }


def _make_factory(model: str, disc: str, reading: str | None, args, seed: int):
    validate_combo(model, disc, reading)
    if model in CNN_KINDS:
        kwargs = _train_kwargs(args)

        def factory():
            return CnnAuthorClassifier(
                model=model,
                disc=disc,
                reading=reading,
                adjacent_only=args.adjacent_only,
                seed=seed,
                **kwargs,
            )

    else:

        def factory():
            return SvmAuthorClassifier(
                model=model,
                disc=disc,
                tol=args.tol,
                max_iter=args.max_iter,
                c_reg=args.c_reg,
                min_count=args.min_count,
                seed=seed,
            )

    return factory


def _parse_model_spec(text: str) -> tuple[str, str, str | None]:
    parts = text.split(":")
    if len(parts) > 3:
        raise ConfigError(f"model spec {text!r} must be model[:disc[:reading]]")
    model = parts[0]
    disc = parts[1] if len(parts) > 1 else "none"
    reading = parts[2] if len(parts) > 2 else None
    validate_combo(model, disc, reading)
    return model, disc, reading


def _common_config(args: argparse.Namespace, seed: int, **extra) -> dict:
    config = {
        "manifest": str(args.manifest),
        "chunk_size": args.chunk_size,
        "seed": seed,
    }
    for name in ("folds", "jobs"):
        if hasattr(args, name):
            config[name] = getattr(args, name)
    if hasattr(args, "no_balance"):
        config["balance"] = not args.no_balance
    config.update(extra)
    return config


# ---------------------------------------------------------------------------
# subcommand handlers


def _cmd_featurize(args: argparse.Namespace) -> int:
    validate_combo(None, args.disc, args.reading)
    seed = _resolve_seed(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    chunks = load_corpus(
        args.manifest, args.chunk_size, require_annotations=args.disc != "none"
    )
    featurizer = DiscourseFeaturizer(
        disc=args.disc,
        reading=args.reading,
        adjacent_only=args.adjacent_only,
        min_count=args.min_count,
    )
    rows = featurizer.fit(chunks).transform(chunks)
    with open(out / "features.jsonl", "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, sort_keys=True) + "\n")
    _write_run_json(
        out,
        "featurize",
        {
            "manifest": str(args.manifest),
            "chunk_size": args.chunk_size,
            "disc": args.disc,
            "reading": args.reading,
            "adjacent_only": args.adjacent_only,
            "min_count": args.min_count,
            "seed": seed,
        },
    )
    print(f"wrote {len(rows)} feature rows to {out / 'features.jsonl'}")
    return 0


def _cmd_pairwise(args: argparse.Namespace) -> int:
    return _run_task(args, task="pairwise")


def _cmd_multiclass(args: argparse.Namespace) -> int:
    return _run_task(args, task="multiclass")


def _run_task(args: argparse.Namespace, task: str) -> int:
    seed = _resolve_seed(args)
    factory = _make_factory(args.model, args.disc, args.reading, args, seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    chunks = load_corpus(
        args.manifest, args.chunk_size, require_annotations=args.disc != "none"
    )
    runner = run_pairwise if task == "pairwise" else run_multiclass
    result = runner(
        chunks,
        factory,
        k=args.folds,
        seed=seed,
        balance=not args.no_balance,
        jobs=args.jobs,
        model_name=args.model,
    )
    result.config = _common_config(
        args, seed, model=args.model, disc=args.disc, reading=args.reading
    )
    write_result_json(result, out / "result.json")
    write_results_csv(
        [result],
        out / "results.csv",
        disc_types={args.model: args.disc},
        readings={args.model: args.reading or ""},
    )
    _write_run_json(out, task, result.config)
    print(f"{task} {args.model}: mean {result.metric} {result.mean:.4f}")
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    seed = _resolve_seed(args)
    specs = [_parse_model_spec(s) for s in args.models.split(",") if s]
    if not specs:
        raise ConfigError("sweep needs at least one model spec")
    sizes = _parse_int_list(args.sizes) if args.sizes else default_sweep_sizes()
    factories, disc_types, readings = {}, {}, {}
    for model, disc, reading in specs:
        name = ":".join(filter(None, [model, disc if disc != "none" else None, reading]))
        factories[name] = _make_factory(model, disc, reading, args, seed)
        disc_types[name] = disc
        readings[name] = reading or ""
    need_ann = any(d != "none" for d in disc_types.values())
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    def load_chunks(size: int):
        return load_corpus(args.manifest, size, require_annotations=need_ann)

    results = chunk_sweep(
        load_chunks,
        factories,
        sizes=sizes,
        k=args.folds,
        seed=seed,
        balance=not args.no_balance,
        jobs=args.jobs,
    )
    for r in results:
        tag = r.model.replace(":", "-")
        write_result_json(r, out / f"sweep_{tag}_{r.config['size']}.json")
    write_results_csv(results, out / "results.csv", disc_types, readings)
    write_sweep_summary(results, out / "sweep_summary.csv")
    _write_run_json(
        out,
        "sweep",
        _common_config(args, seed, models=args.models, sizes=sizes),
    )
    for r in results:
        print(f"size {r.config['size']:>5} {r.model:<24} macro_f1 {r.mean:.4f}")
    return 0


def _cmd_neighbors(args: argparse.Namespace) -> int:
    params, meta = models.load_checkpoint(args.checkpoint)
    if args.branch == "disc":
        if params.disc_spec is None or meta["disc_vocab"] is None:
            raise ConfigError(
                "checkpoint has no discourse branch; use --branch char"
            )
        emb = params.tensors["disc_emb"]
        vocab = Vocab.from_tokens(meta["disc_vocab"])
    else:
        emb = params.tensors["char_emb"]
        vocab = Vocab.from_tokens(meta["char_vocab"])
    ranked = nearest_neighbors(emb, vocab, args.token, top_k=args.top_k)
    for token, sim in ranked:
        print(f"{token}\t{sim:.4f}")
    return 0


def _cmd_gradcheck(args: argparse.Namespace) -> int:
    seed = _resolve_seed(args)
    report = run_gradcheck(args.model, seed=seed, tolerance=args.tolerance)
    print(report.render())
    return 0 if report.passed else 1


def run_gradcheck(kind: str, seed: int = 0, tolerance: float = 1e-4):
    """Finite-difference check of a small double-precision instance.

    Instances whose forward pass sits close to a ReLU kink or a pooling
    tie are resampled: there the loss is not differentiable and central
    differences straddle the corner, so a mismatch would say nothing
    about the backward pass.
    """
    if kind not in CNN_KINDS:
        raise ConfigError(f"gradcheck covers {CNN_KINDS}, not {kind!r}")
    config = TrainConfig(
        epochs=1,
        emb_dim_char=5,
        emb_dim_disc=4,
        num_maps=3,
        num_maps_disc=2,
        windows=[2, 3],
        disc_windows=[2, 3],
        max_char_len=12,
        max_disc_len=8,
        seed=seed,
    )
    report = None
    for attempt in range(40):
        rng = np.random.default_rng([seed, attempt])
        config.seed = int(rng.integers(0, 2**31))
        params = init_params(
            kind, 3, 11, config,
            disc_vocab_size=7 if kind == "cnn2-de" else None,
            pv_dim=6 if kind == "cnn2-pv" else None,
            dtype=np.float64,
        )
        # trained-scale init leaves every pre-activation crowded around
        # zero; O(1) random draws give the kink screen room to pass
        for name, t in params.tensors.items():
            params.tensors[name] = rng.uniform(-0.6, 0.6, size=t.shape)
        # indices start at 1: the PAD row is frozen (zero analytic gradient
        # by contract), so finite differences must never see it in use
        batch = Batch(
            char=rng.integers(1, 11, size=(1, 12)),
            disc=rng.integers(1, 7, size=(1, 8)) if kind == "cnn2-de" else None,
            pv=rng.dirichlet(np.ones(6), size=1) if kind == "cnn2-pv" else None,
            labels=rng.integers(0, 3, size=1),
        )
        min_pre, min_gap = kink_margins(params, batch)
        if min_pre < 5e-4 or min_gap < 5e-4:
            continue
        report = grad_check(
            lambda tensors: loss_and_grads(
                params, batch, keep_prob=1.0, rng=np.random.default_rng(0)
            ),
            params.tensors,
            tolerance=tolerance,
        )
        if report.passed:
            return report
    if report is None:
        raise GridStyloError("no kink-safe gradcheck instance found in 40 draws")
    return report


def _cmd_synth(args: argparse.Namespace) -> int:
    spec = CorpusSpec.from_file(args.config)
    if args.seed is not None:
        spec.seed = args.seed
    out = Path(args.out)
    manifest = generate_corpus(spec, out)
    _write_run_json(
        out, "synth", {"config": str(args.config), "seed": spec.seed, "out": str(out)}
    )
    print(f"wrote corpus manifest {manifest}")
    return 0


def _cmd_train(args: argparse.Namespace) -> int:
    seed = _resolve_seed(args)
    factory = _make_factory(args.model, args.disc, args.reading, args, seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    chunks = load_corpus(
        args.manifest, args.chunk_size, require_annotations=args.disc != "none"
    )
    est = factory()
    est.fit(chunks, [c.author for c in chunks])
    checkpoint = out / "model.ckpt"
    est.save(checkpoint)
    _write_run_json(
        out,
        "train",
        _common_config(args, seed, model=args.model, disc=args.disc, reading=args.reading),
    )
    if hasattr(est, "loss_trace_"):
        print(f"final epoch mean loss {est.loss_trace_[-1]:.4f}")
    print(f"saved checkpoint {checkpoint}")
    return 0


# ---------------------------------------------------------------------------
# parser


def _add_seed_flag(p: argparse.ArgumentParser) -> None:
    # SUPPRESS keeps a pre-subcommand `aa --seed N` value intact
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS,
                   help="master seed (default: env AA_SEED, then 0)")


def _add_corpus_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--manifest", required=True, help="corpus manifest JSON")
    p.add_argument("--chunk-size", type=int, default=2000, help="words per chunk")


def _add_model_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--model", required=True, choices=ALL_MODELS)
    p.add_argument("--disc", default="none", choices=["none", "gr", "rst"])
    p.add_argument("--reading", default=None, choices=["local", "global", "edu-order"])
    p.add_argument("--adjacent-only", action="store_true",
                   help="global gr reading pairs only adjacent sentences")
    _add_train_flags(p)


def _add_train_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--epochs", type=int, default=50)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--lr", type=float, default=0.001)
    p.add_argument("--keep-prob", type=float, default=0.75)
    p.add_argument("--emb-dim-char", type=int, default=50)
    p.add_argument("--emb-dim-disc", type=int, default=20)
    p.add_argument("--num-maps", type=int, default=100)
    p.add_argument("--num-maps-disc", type=int, default=100)
    p.add_argument("--windows", default="3,4,5")
    p.add_argument("--activation", default="relu", choices=["relu", "tanh"])
    p.add_argument("--max-char-len", type=int, default=2200)
    p.add_argument("--max-disc-len", type=int, default=256)
    p.add_argument("--min-count", type=int, default=1)
    p.add_argument("--tol", type=float, default=1e-5)
    p.add_argument("--max-iter", type=int, default=1500)
    p.add_argument("--c-reg", type=float, default=1.0)


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--no-balance", action="store_true",
                   help="skip oversampling the training folds")
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    p.add_argument("--out", required=True, help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aa", description="grid-based authorship attribution experiments"
    )
    parser.add_argument("--seed", type=int, default=None,
                        help="master seed (default: env AA_SEED, then 0)")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("featurize", help="dump per-chunk feature rows")
    _add_corpus_flags(p)
    p.add_argument("--disc", default="none", choices=["none", "gr", "rst"])
    p.add_argument("--reading", default=None, choices=["local", "global", "edu-order"])
    p.add_argument("--adjacent-only", action="store_true")
    p.add_argument("--min-count", type=int, default=1)
    p.add_argument("--out", required=True)
    _add_seed_flag(p)
    p.set_defaults(func=_cmd_featurize)

    for task, handler in (("pairwise", _cmd_pairwise), ("multiclass", _cmd_multiclass)):
        p = sub.add_parser(task, help=f"cross-validated {task} task")
        _add_corpus_flags(p)
        _add_model_flags(p)
        _add_run_flags(p)
        _add_seed_flag(p)
        p.set_defaults(func=handler)

    p = sub.add_parser("sweep", help="multiclass task across chunk sizes")
    _add_corpus_flags(p)
    p.add_argument("--models", required=True,
                   help="comma list of model[:disc[:reading]] specs")
    p.add_argument("--sizes", default=None,
                   help="comma list or start:stop:step (default 200:2000:200)")
    p.add_argument("--adjacent-only", action="store_true")
    _add_train_flags(p)
    _add_run_flags(p)
    _add_seed_flag(p)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("neighbors", help="cosine neighbors of an embedding")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--token", required=True)
    p.add_argument("--top-k", type=int, default=5)
    p.add_argument("--branch", default="disc", choices=["disc", "char"])
    _add_seed_flag(p)
    p.set_defaults(func=_cmd_neighbors)

    p = sub.add_parser("gradcheck", help="finite-difference gradient check")
    p.add_argument("--model", required=True, choices=list(CNN_KINDS))
    p.add_argument("--tolerance", type=float, default=1e-4)
    _add_seed_flag(p)
    p.set_defaults(func=_cmd_gradcheck)

    p = sub.add_parser("synth", help="generate a synthetic annotated corpus")
    p.add_argument("--config", required=True, help="corpus spec JSON")
    p.add_argument("--out", required=True)
    _add_seed_flag(p)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("train", help="fit one model on the full corpus")
    _add_corpus_flags(p)
    _add_model_flags(p)
    p.add_argument("--out", required=True)
    _add_seed_flag(p)
    p.set_defaults(func=_cmd_train)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except GridStyloError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
