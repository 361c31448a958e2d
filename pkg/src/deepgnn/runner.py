"""Experiment execution: repetitions, COM search, grids, epoch timing.

All artifacts are plain dicts validated by validate_results before they
are written, so a consumer can trust the shape of anything on disk.
Repetitions and grid cells may run on a bounded thread pool; each run is
seeded independently, so results never depend on worker count.
"""

from __future__ import annotations

import csv
import json
import os
import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import __version__
from .config import ExperimentSpec, set_option
from .data import Dataset, generate_sbm, load_dataset
from .errors import ConfigError, DataFormatError
from .train import aggregate_runs, train_run

DATA_DIR_ENV = "DEEPGNN_DATA_DIR"

COM_CHOICES = ("concat", "maxpool", "attention")


def resolve_dataset(name: str, data_dir=None) -> Dataset:
    """Map a spec's dataset field to a loaded Dataset.

    `sbm-demo` generates the synthetic benchmark graph in memory; anything
    else must be a converted dataset directory, either given as a path or
    found under --data-dir / $DEEPGNN_DATA_DIR.
    """
    if name == "sbm-demo":
        return generate_sbm()
    cand = Path(name)
    if cand.is_dir():
        return load_dataset(cand)
    root = data_dir or os.environ.get(DATA_DIR_ENV)
    if root:
        cand = Path(root) / name
        if cand.is_dir():
            return load_dataset(cand)
        raise DataFormatError(
            f"dataset {name!r} not found under {root} (expected {cand})")
    raise DataFormatError(
        f"dataset {name!r} is not a directory and {DATA_DIR_ENV} is not set")


def _run_seeds(dataset, spec: ExperimentSpec, threads: int):
    """Train spec.repetitions times; return (results, failures)."""
    seeds = [spec.seed_base + i for i in range(spec.repetitions)]
    results, failures = [], []

    def one(seed):
        return train_run(dataset, spec.trick, spec.train, seed)

    if threads <= 1:
        outcomes = []
        for s in seeds:
            try:
                outcomes.append((s, one(s), None))
            except Exception as e:  # noqa: BLE001 - diagnostics belong in the artifact
                outcomes.append((s, None, e))
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futs = [(s, pool.submit(one, s)) for s in seeds]
            outcomes = []
            for s, f in futs:
                try:
                    outcomes.append((s, f.result(), None))
                except Exception as e:  # noqa: BLE001
                    outcomes.append((s, None, e))
    for seed, res, err in outcomes:
        if err is None:
            results.append(res)
        else:
            failures.append({"seed": seed, "error": f"{type(err).__name__}: {err}"})
    return results, failures


def run_experiment(spec: ExperimentSpec, out_dir=None, threads: int = 1,
                   dataset: Dataset | None = None, data_dir=None) -> dict:
    """Execute one spec and return (optionally write) its results artifact.

    When spec.com_search is set, all three COM variants are trained and the
    artifact's headline numbers come from the best mean test accuracy; the
    per-variant aggregates are kept under "com_search".
    """
    spec.validate()
    if dataset is None:
        dataset = resolve_dataset(spec.dataset, data_dir)

    com_search = None
    if spec.com_search:
        per_com = {}
        for com in COM_CHOICES:
            variant = spec.copy()
            variant.com_search = False
            set_option(variant, "trick.skip.com", com)
            per_com[com] = _run_seeds(dataset, variant, threads)
        scored = {c: aggregate_runs(r)["mean_test_acc"]
                  for c, (r, _) in per_com.items() if r}
        if not scored:
            results, failures = [], [f for _, (r, fs) in per_com.items() for f in fs]
            best_com = None
        else:
            best_com = max(scored, key=scored.get)
            results, failures = per_com[best_com]
        com_search = {
            "best_com": best_com,
            "aggregates": {c: (aggregate_runs(r) if r else None)
                           for c, (r, _) in per_com.items()},
        }
        if best_com is not None:
            spec = spec.copy()
            spec.com_search = False
            set_option(spec, "trick.skip.com", best_com)
    else:
        results, failures = _run_seeds(dataset, spec, threads)

    artifact = {
        "spec": spec.to_dict(),
        "code_version": __version__,
        "runs": [r.to_dict() for r in results],
        "failed": failures,
        "aggregate": (aggregate_runs(results) if results
                      else {"mean_test_acc": None, "std_test_acc": None, "n": 0}),
    }
    if com_search is not None:
        artifact["com_search"] = com_search
    validate_results(artifact)
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        with open(out_dir / "results.json", "w", encoding="utf-8") as f:
            json.dump(artifact, f, indent=2, sort_keys=True)
            f.write("\n")
        with open(out_dir / "summary.md", "w", encoding="utf-8") as f:
            f.write(summary_markdown(artifact))
    return artifact


_SUMMARY_COLS = ("dataset", "backbone", "depth", "skip", "norm", "drop",
                 "idmap", "test acc (%)", "reps")


def summary_markdown(artifact: dict) -> str:
    """One table row describing the experiment outcome."""
    s = artifact["spec"]
    t = s["trick"]
    agg = artifact["aggregate"]
    if agg["n"]:
        acc = f"{100 * agg['mean_test_acc']:.2f} ± {100 * agg['std_test_acc']:.2f}"
    else:
        acc = "all runs failed"
    skip = t["skip"]["mode"]
    if skip in ("dense", "jumping"):
        skip += f"/{t['skip']['com']}"
    drop = []
    if t["drop"]["feature_dropout"] > 0:
        drop.append(f"dropout {t['drop']['feature_dropout']}")
    if t["drop"]["scheme"] != "none":
        drop.append(f"{t['drop']['scheme']} {t['drop']['graph_rate']}")
    idmap = f"λ={t['identity_lambda']}" if t["identity_mapping"] else "off"
    row = (s["dataset"], t["backbone"], str(t["depth"]), skip, t["norm"]["kind"],
           "; ".join(drop) or "none", idmap, acc, str(agg["n"]))
    lines = ["| " + " | ".join(_SUMMARY_COLS) + " |",
             "|" + "---|" * len(_SUMMARY_COLS),
             "| " + " | ".join(row) + " |"]
    return "\n".join(lines) + "\n"


def grid_search(spec: ExperimentSpec, out_dir=None, threads: int = 1,
                dataset: Dataset | None = None, data_dir=None) -> list:
    """One run_experiment per grid cell; rows of (axis values, mean, std).

    Cells are seeded exactly like standalone runs, so a cell's numbers match
    a run_experiment with the same overrides bit for bit.
    """
    spec.validate()
    if not spec.grid:
        raise ConfigError("grid_search needs at least one grid axis")
    for key, values in spec.grid.items():
        if len(values) == 0:
            raise ConfigError(f"grid axis {key} is empty")
    if dataset is None:
        dataset = resolve_dataset(spec.dataset, data_dir)
    axes = list(spec.grid.items())
    (ax1, vals1) = axes[0]
    (ax2, vals2) = axes[1] if len(axes) > 1 else (None, [None])

    cells = []
    for v1 in vals1:
        for v2 in vals2:
            cell_spec = spec.copy()
            cell_spec.grid = {}
            set_option(cell_spec, ax1, str(v1))
            if ax2 is not None:
                set_option(cell_spec, ax2, str(v2))
            artifact = run_experiment(cell_spec, out_dir=None, threads=threads,
                                      dataset=dataset)
            agg = artifact["aggregate"]
            cells.append({ax1: v1, **({ax2: v2} if ax2 else {}),
                          "mean_test_acc": agg["mean_test_acc"],
                          "std_test_acc": agg["std_test_acc"],
                          "n": agg["n"],
                          "artifact": artifact})
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        with open(out_dir / "heatmap.csv", "w", encoding="utf-8", newline="") as f:
            w = csv.writer(f)
            w.writerow([ax1, ax2 or "", "mean_test_acc", "std_test_acc", "n"])
            for c in cells:
                w.writerow([c[ax1], c[ax2] if ax2 else "",
                            c["mean_test_acc"], c["std_test_acc"], c["n"]])
    return cells


def profile_epoch(spec: ExperimentSpec, out_dir=None, warmup: int = 5,
                  timed: int = 20, dataset: Dataset | None = None,
                  data_dir=None) -> dict:
    """Median wall-clock ms per training epoch, after warmup epochs."""
    spec.validate()
    if dataset is None:
        dataset = resolve_dataset(spec.dataset, data_dir)
    cfg = spec.copy().train
    cfg.max_epochs = warmup + timed
    cfg.patience = cfg.max_epochs + 1  # never stop early while timing
    t0 = time.perf_counter()
    res = train_run(dataset, spec.trick, cfg, spec.seed_base)
    total_s = time.perf_counter() - t0
    samples = res.epoch_ms[warmup:]
    report = {
        "spec": spec.to_dict(),
        "code_version": __version__,
        "median_epoch_ms": float(statistics.median(samples)),
        "mean_epoch_ms": float(statistics.fmean(samples)),
        "warmup_epochs": warmup,
        "timed_epochs": len(samples),
        "total_wall_s": total_s,
    }
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        with open(out_dir / "timing.json", "w", encoding="utf-8") as f:
            json.dump(report, f, indent=2, sort_keys=True)
            f.write("\n")
    return report


# results.json schema: key -> checker. Kept by hand; the artifact is small
# and a dependency-free validator keeps install light.
def _is_num(x):
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def _check(cond, msg):
    if not cond:
        raise DataFormatError(f"results artifact invalid: {msg}")


_RUN_FIELDS = {"seed": int, "best_epoch": int, "epochs_run": int}
_RUN_NUM_FIELDS = ("test_acc", "best_val_acc", "mean_epoch_ms")
_RUN_LIST_FIELDS = ("train_loss", "val_acc")


def validate_results(artifact: dict):
    """Structural check of a results artifact; raises DataFormatError."""
    _check(isinstance(artifact, dict), "not a dict")
    for key in ("spec", "code_version", "runs", "failed", "aggregate"):
        _check(key in artifact, f"missing key {key}")
    _check(isinstance(artifact["code_version"], str), "code_version not a string")
    spec = artifact["spec"]
    _check(isinstance(spec, dict), "spec echo not a dict")
    for key in ("dataset", "trick", "train", "repetitions", "seed_base"):
        _check(key in spec, f"spec echo missing {key}")
    _check(isinstance(artifact["runs"], list), "runs not a list")
    for i, run in enumerate(artifact["runs"]):
        for key, typ in _RUN_FIELDS.items():
            _check(isinstance(run.get(key), typ) and not isinstance(run.get(key), bool),
                   f"runs[{i}].{key}")
        for key in _RUN_NUM_FIELDS:
            _check(_is_num(run.get(key)), f"runs[{i}].{key}")
        for key in _RUN_LIST_FIELDS:
            seq = run.get(key)
            _check(isinstance(seq, list) and all(_is_num(v) for v in seq),
                   f"runs[{i}].{key}")
        _check(len(run["val_acc"]) == run["epochs_run"], f"runs[{i}].val_acc length")
    for i, item in enumerate(artifact["failed"]):
        _check(isinstance(item, dict) and isinstance(item.get("seed"), int)
               and isinstance(item.get("error"), str), f"failed[{i}]")
    agg = artifact["aggregate"]
    _check(isinstance(agg, dict) and isinstance(agg.get("n"), int), "aggregate.n")
    if agg["n"] > 0:
        _check(_is_num(agg.get("mean_test_acc")), "aggregate.mean_test_acc")
        _check(_is_num(agg.get("std_test_acc")), "aggregate.std_test_acc")
        _check(len(artifact["runs"]) == agg["n"], "aggregate.n mismatch")
    else:
        _check(len(artifact["runs"]) == 0, "runs present but n == 0")
