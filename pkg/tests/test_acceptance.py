"""End-to-end acceptance gate.

One test per shipped promise, run against the checked-in synthetic
corpora under tests/fixtures/:

* corpus_a: four authors with identical character chains but disjoint
  grid habits (role transitions and relation labels), 200 forty-word
  chunks per author.
* corpus_b: four authors over disjoint alphabets, separable from
  characters alone.
* corpus_c: few long sentences per document, so discourse transitions
  only fit inside large chunks.

Each test asserts its numeric bars and its wall-clock budget, so the
suite doubles as a smoke test for the desk-scale runtime promises.
"""

from __future__ import annotations

import csv
import itertools
import json
import time
from collections import Counter
from pathlib import Path

from gridstylo import cli
from gridstylo.featurize import (
    SEP,
    TRANSITION_ORDER,
    gr_de_global,
    gr_de_local,
    gr_transition_pv,
)
from gridstylo.grid import build_gr_grid
from gridstylo.svm import predict, train_linear

from .conftest import grid_from_strings, make_excerpt_annotation
from .test_featurize import brute_global, brute_local, brute_pv
from .test_svm import separable_2d

FIXTURES = Path(__file__).resolve().parent / "fixtures"
MANIFEST_A = str(FIXTURES / "corpus_a" / "manifest.json")
MANIFEST_B = str(FIXTURES / "corpus_b" / "manifest.json")
MANIFEST_C = str(FIXTURES / "corpus_c" / "manifest.json")

# small-but-honest network: enough capacity to fit the fixtures, small
# enough that every criterion stays inside its wall-clock budget
CNN_ARGS = [
    "--epochs", "6", "--batch-size", "32", "--lr", "0.005",
    "--keep-prob", "1.0", "--emb-dim-char", "12", "--emb-dim-disc", "12",
    "--num-maps", "12", "--num-maps-disc", "12", "--windows", "3,4",
    "--max-char-len", "256", "--max-disc-len", "32",
]
SVM_ARGS = ["--tol", "1e-5", "--max-iter", "1500", "--c-reg", "1.0"]


def run_multiclass(
    out: Path, manifest: str, model_args: list[str], train_args: list[str],
    seed: int = 0, folds: int = 5,
) -> float:
    argv = [
        "--seed", str(seed), "multiclass", "--manifest", manifest,
        "--chunk-size", "40", *model_args, *train_args,
        "--folds", str(folds), "--out", str(out),
    ]
    assert cli.main(argv) == 0
    return json.loads((out / "result.json").read_text())["mean"]


def test_c1_worked_example_pv_exact():
    start = time.perf_counter()
    pv = gr_transition_pv(build_gr_grid(make_excerpt_annotation()))
    expected = {"ss": 0.25, "so": 0.25, "ox": 0.25, "-s": 0.25}
    for label, prob in zip(pv.labels, pv.probs):
        assert abs(prob - expected.get(label, 0.0)) <= 1e-12
    assert list(pv.labels) == list(TRANSITION_ORDER)
    assert time.perf_counter() - start < 1.0


def test_c2_featurizers_match_brute_force_on_all_3x3_grids():
    start = time.perf_counter()
    columns = [
        "".join(p)
        for p in itertools.product("sox-", repeat=3)
        if sum(ch != "-" for ch in p) >= 2
    ]
    assert len(columns) == 54

    for combo in itertools.product(columns, repeat=3):
        cols = list(combo)
        grid = grid_from_strings(cols)
        ref = brute_pv(cols)
        pv = gr_transition_pv(grid)
        assert all(
            abs(p - ref[label]) <= 1e-12 for label, p in zip(pv.labels, pv.probs)
        )
        assert list(gr_de_local(grid).tokens) == brute_local(cols)
        assert list(gr_de_global(grid).tokens) == brute_global(cols)

    # without gaps the two readings emit the same pairs, just reordered
    full = [c for c in columns if "-" not in c]
    assert len(full) == 27
    for combo in itertools.product(full, repeat=3):
        grid = grid_from_strings(list(combo))
        local = Counter(gr_de_local(grid).tokens)
        globl = Counter(t for t in gr_de_global(grid).tokens if t != SEP)
        assert local == globl

    assert time.perf_counter() - start < 60.0


def test_c3_gradients_match_finite_differences():
    start = time.perf_counter()
    for kind in ("cnn2", "cnn2-pv", "cnn2-de"):
        for seed in range(10):
            report = cli.run_gradcheck(kind, seed=seed, tolerance=1e-4)
            assert report.passed, f"{kind} seed {seed}: {report.max_rel_err:.3e}"
            assert report.max_rel_err < 1e-4
    assert time.perf_counter() - start < 120.0


def test_c4_discourse_separates_char_identical_authors(tmp_path):
    start = time.perf_counter()
    chars_only = run_multiclass(
        tmp_path / "cnn", MANIFEST_A, ["--model", "cnn2"], CNN_ARGS
    )
    with_discourse = run_multiclass(
        tmp_path / "de", MANIFEST_A,
        ["--model", "cnn2-de", "--disc", "rst", "--reading", "global"],
        CNN_ARGS,
    )
    char_separable = run_multiclass(
        tmp_path / "cnn_b", MANIFEST_B, ["--model", "cnn2"], CNN_ARGS
    )
    assert chars_only <= 0.35
    assert with_discourse >= 0.80
    assert with_discourse - chars_only >= 0.20
    assert char_separable >= 0.90
    assert time.perf_counter() - start < 900.0


def test_c5_richer_discourse_features_never_lose_ground(tmp_path):
    variants = {
        "cnn2": ["--model", "cnn2"],
        "pv": ["--model", "cnn2-pv", "--disc", "gr"],
        "local": ["--model", "cnn2-de", "--disc", "gr", "--reading", "local"],
        "global": ["--model", "cnn2-de", "--disc", "gr", "--reading", "global"],
    }
    means = {
        name: sum(
            run_multiclass(
                tmp_path / f"{name}_{seed}", MANIFEST_A, args, CNN_ARGS, seed=seed
            )
            for seed in (0, 1, 2)
        ) / 3
        for name, args in variants.items()
    }
    slack = 0.02
    assert means["global"] >= means["local"] - slack, means
    assert means["local"] >= means["pv"] - slack, means
    assert means["pv"] >= means["cnn2"] - slack, means


def test_c6_sweep_completes_and_discourse_gap_grows_with_size(tmp_path):
    out = tmp_path / "sweep"
    argv = [
        "--seed", "0", "sweep", "--manifest", MANIFEST_C,
        "--models", "cnn2,cnn2-de:gr:global", "--sizes", "200:2000:200",
        "--folds", "3", *CNN_ARGS, "--out", str(out),
    ]
    assert cli.main(argv) == 0

    sizes = list(range(200, 2001, 200))
    summary = {}
    with (out / "sweep_summary.csv").open() as fh:
        for row in csv.DictReader(fh):
            summary[(int(row["size"]), row["model"])] = float(row["macro_f1_mean"])
    assert len(summary) == len(sizes) * 2
    for size in sizes:
        assert (size, "cnn2") in summary
        assert (size, "cnn2-de:gr:global") in summary
        assert (out / f"sweep_cnn2_{size}.json").exists()
        assert (out / f"sweep_cnn2-de-gr-global_{size}.json").exists()

    with (out / "results.csv").open() as fh:
        detail = list(csv.DictReader(fh))
    assert len(detail) == len(sizes) * 2 * 3
    assert set(detail[0]) == {
        "experiment", "model", "disc_type", "reading",
        "size", "fold", "metric", "value",
    }

    def gap(size: int) -> float:
        return summary[(size, "cnn2-de:gr:global")] - summary[(size, "cnn2")]

    assert gap(200) < gap(2000)


def test_c7_linear_baseline_trains_exactly_and_gains_from_pv(tmp_path):
    x, y = separable_2d()
    model = train_linear(x, y, tol=1e-5, max_iter=1500)
    labels, _ = predict(model, x)
    assert (labels == y).all()
    assert model.stop_reasons == ["tol"] * len(model.classes)

    plain = run_multiclass(
        tmp_path / "svm", MANIFEST_A, ["--model", "svm2"], SVM_ARGS
    )
    with_pv = run_multiclass(
        tmp_path / "svm_pv", MANIFEST_A,
        ["--model", "svm2-pv", "--disc", "gr"], SVM_ARGS,
    )
    assert with_pv >= plain + 0.02


def test_c8_same_seed_single_worker_reruns_are_byte_identical(tmp_path):
    small = [
        "--epochs", "2", "--batch-size", "16", "--keep-prob", "1.0",
        "--emb-dim-char", "8", "--num-maps", "4", "--windows", "2,3",
        "--max-char-len", "64", "--jobs", "1",
    ]
    outs = []
    for rerun in ("first", "second"):
        out = tmp_path / rerun
        argv = [
            "--seed", "5", "multiclass", "--manifest", MANIFEST_B,
            "--chunk-size", "40", "--model", "cnn2", *small,
            "--folds", "2", "--out", str(out),
        ]
        assert cli.main(argv) == 0
        outs.append(out)
    for name in ("result.json", "results.csv"):
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()

    feats = []
    for rerun in ("feat1", "feat2"):
        out = tmp_path / rerun
        argv = [
            "--seed", "5", "featurize", "--manifest", MANIFEST_A,
            "--chunk-size", "40", "--disc", "gr", "--reading", "global",
            "--out", str(out),
        ]
        assert cli.main(argv) == 0
        feats.append(out / "features.jsonl")
    assert feats[0].read_bytes() == feats[1].read_bytes()
