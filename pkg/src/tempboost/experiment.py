"""Cross-validated benchmark harness with per-round traces.

For every (fold, temperature) cell the harness injects label noise into
the training split only, boosts tempered-loss trees, and evaluates the
plain and the clamped model on the untouched test fold after every round.
It emits a flat ``trace.csv``, a per-temperature ``summary.csv`` with
paired t-test verdicts against t=1, tidy per-panel plot data, and a
``manifest.json`` recording enough to rerun the whole thing bit for bit.

Cells are independent: each derives its own RNG stream from
(seed, fold, temperature-index), so results do not depend on execution
order and --jobs N can fan cells out across processes.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy import stats as scipy_stats

from . import __version__
from .booster import boost, zero_one_error
from .dataio import Dataset, inject_label_noise, load_csv, stratified_folds
from .errors import TempBoostError
from .talgebra import TemperConfig
from .tree import DEFAULT_SPLIT_CAP, TreeWeakLearner

DEFAULT_T_VALUES = (0.0, 0.2, 0.4, 0.6, 0.8, 0.9, 1.0, 1.1)

TRACE_FIELDS = (
    "fold",
    "t",
    "j",
    "train_err",
    "test_err_unclamped",
    "test_err_clamped",
    "min_codensity",
    "max_codensity",
    "rho",
    "mu",
    "alpha",
    "z",
    "m_dagger",
    "infinite_weights",
)

PLOT_PANELS = (
    "test_err_unclamped",
    "test_err_clamped",
    "min_codensity",
    "max_codensity",
)


@dataclass(frozen=True)
class RunSpec:
    """Everything one benchmark run depends on."""

    data_path: str
    label_column: str = "last"
    t_values: tuple = DEFAULT_T_VALUES
    rounds: int = 20
    tree_nodes: int = 15
    folds: int = 10
    noise: float = 0.0
    clamped: str = "both"
    seed: int = 0
    jobs: int = 1
    out_dir: str = "results"
    split_cap: int = DEFAULT_SPLIT_CAP

    def __post_init__(self):
        object.__setattr__(self, "t_values", tuple(float(t) for t in self.t_values))
        if not self.t_values or any(not 0.0 <= t < 2.0 for t in self.t_values):
            raise ValueError("temperatures must lie in [0, 2)")
        if self.rounds < 1:
            raise ValueError("need at least one boosting round")
        if self.folds < 2:
            raise ValueError("need at least two folds")
        if not 0.0 <= self.noise < 1.0:
            raise ValueError("noise rate must lie in [0, 1)")
        if self.clamped not in ("both", "on", "off"):
            raise ValueError("clamped must be both|on|off")
        if self.jobs < 1:
            raise ValueError("jobs must be positive")


@dataclass(frozen=True)
class TraceRow:
    fold: int
    t: float
    j: int
    train_err: float
    test_err_unclamped: float
    test_err_clamped: float  # nan when the clamped model is unavailable
    min_codensity: float
    max_codensity: float
    rho: float
    mu: float
    alpha: float
    z: float
    m_dagger: int
    infinite_weights: int


@dataclass
class CellStatus:
    fold: int
    t: float
    status: str = "ok"
    error: str = ""
    noise_flips: int = 0
    infinite_weights: int = 0


@dataclass
class RunResult:
    out_dir: Path
    rows: list
    cells: list = field(default_factory=list)

    @property
    def failed_cells(self) -> int:
        return sum(1 for cell in self.cells if cell.status != "ok")


def _evaluate_clamped(spec: RunSpec, t: float) -> bool:
    if spec.clamped == "off":
        return False
    return t < 1.0 and abs(t - 1.0) >= 1e-9


def _run_cell(data: Dataset, fold: int, train_idx, test_idx, t: float, t_idx: int, spec: RunSpec):
    """One (fold, temperature) cell; returns (rows, status)."""
    status = CellStatus(fold=fold, t=t)
    rows: list = []
    seed_sequence = np.random.SeedSequence(entropy=(spec.seed, fold, t_idx))
    noise_stream, tree_stream = seed_sequence.spawn(2)
    train = data.take(train_idx)
    test = data.take(test_idx)
    if spec.noise > 0:
        noisy = inject_label_noise(train, spec.noise, noise_stream)
        status.noise_flips = int(np.sum(noisy.labels != train.labels))
        train = noisy

    cfg = TemperConfig(t)
    learner = TreeWeakLearner(
        spec.tree_nodes, spec.split_cap, rng=np.random.default_rng(tree_stream)
    )
    track_clamped = _evaluate_clamped(spec, t)
    delta = 1.0 / (1.0 - t) if track_clamped else math.inf

    train_scores = np.zeros(train.m)
    test_scores = np.zeros(test.m)
    test_scores_clamped = np.zeros(test.m)
    round_index = 0

    def on_round(member, record, weights):
        nonlocal round_index, train_scores, test_scores, test_scores_clamped
        round_index += 1
        h_train = member.alpha * member.hypothesis.predict(train)
        h_test = member.alpha * member.hypothesis.predict(test)
        train_scores = train_scores + h_train
        test_scores = test_scores + h_test
        if track_clamped:
            test_scores_clamped = np.clip(
                test_scores_clamped + h_test, -delta, delta
            )
            clamped_err = zero_one_error(test_scores_clamped, test.labels)
        else:
            clamped_err = math.nan
        rows.append(
            TraceRow(
                fold=fold,
                t=t,
                j=round_index,
                train_err=zero_one_error(train_scores, train.labels),
                test_err_unclamped=zero_one_error(test_scores, test.labels),
                test_err_clamped=clamped_err,
                min_codensity=record.min_codensity,
                max_codensity=record.max_codensity,
                rho=record.rho,
                mu=record.mu,
                alpha=record.alpha,
                z=record.z,
                m_dagger=record.m_dagger,
                infinite_weights=record.infinite_weights,
            )
        )
        return False

    try:
        boost(train, learner, spec.rounds, cfg, on_round=on_round)
    except TempBoostError as exc:
        status.status = "failed"
        status.error = f"{type(exc).__name__}: {exc}"
        if hasattr(exc, "count"):
            status.infinite_weights = exc.count
    except (ValueError, RuntimeError) as exc:
        status.status = "failed"
        status.error = f"{type(exc).__name__}: {exc}"
    return rows, status


_FOLD_STREAM_TAG = 0x5F01D  # keeps the fold stream apart from cell streams


def _cell_payloads(data: Dataset, spec: RunSpec):
    folds = stratified_folds(
        data, spec.folds, np.random.SeedSequence(entropy=(spec.seed, _FOLD_STREAM_TAG))
    )
    for fold, (train_idx, test_idx) in enumerate(folds):
        for t_idx, t in enumerate(spec.t_values):
            yield (data, fold, train_idx, test_idx, t, t_idx, spec)


def run(spec: RunSpec) -> RunResult:
    """Execute the whole grid and write results under ``spec.out_dir``."""
    data = load_csv(spec.data_path, spec.label_column)
    payloads = list(_cell_payloads(data, spec))
    if spec.jobs == 1:
        outcomes = [_run_cell(*payload) for payload in payloads]
    else:
        with ProcessPoolExecutor(max_workers=spec.jobs) as pool:
            outcomes = list(pool.map(_run_cell_star, payloads))

    rows: list = []
    cells: list = []
    for cell_rows, status in outcomes:
        rows.extend(cell_rows)
        cells.append(status)
    rows.sort(key=lambda r: (r.fold, r.t, r.j))

    out_dir = Path(spec.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_trace(out_dir / "trace.csv", rows)
    _write_summary(out_dir / "summary.csv", rows, spec)
    emit_plots(rows, out_dir)
    _write_manifest(out_dir / "manifest.json", spec, data, cells)
    return RunResult(out_dir=out_dir, rows=rows, cells=cells)


def _run_cell_star(payload):
    return _run_cell(*payload)


def _format_value(value) -> str:
    if isinstance(value, float):
        if math.isnan(value):
            return ""
        return repr(value)
    return str(value)


def _write_trace(path: Path, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(TRACE_FIELDS)
        for row in rows:
            writer.writerow([_format_value(getattr(row, name)) for name in TRACE_FIELDS])


def paired_ttest(errors_a, errors_b, alpha: float = 0.1) -> str:
    """Two-sided paired Student t-test verdict on per-fold errors.

    "better" means the first sequence has significantly lower error at the
    given p-value threshold, "worse" the opposite, "equivalent" otherwise.
    """
    a = np.asarray(errors_a, dtype=float)
    b = np.asarray(errors_b, dtype=float)
    if a.shape != b.shape or a.ndim != 1 or a.size < 2:
        raise ValueError("need two equal-length per-fold error vectors")
    diff = a - b
    mean = float(diff.mean())
    sd = float(diff.std(ddof=1))
    if sd == 0.0:
        if mean == 0.0:
            return "equivalent"
        return "better" if mean < 0 else "worse"
    statistic = mean / (sd / math.sqrt(diff.size))
    p_value = 2.0 * float(scipy_stats.t.sf(abs(statistic), df=diff.size - 1))
    if p_value >= alpha:
        return "equivalent"
    return "better" if mean < 0 else "worse"


def _final_errors(rows, t: float, attr: str) -> dict:
    """fold -> error at the last round present for (fold, t)."""
    per_fold: dict = {}
    for row in rows:
        if row.t == t:
            current = per_fold.get(row.fold)
            if current is None or row.j > current[0]:
                per_fold[row.fold] = (row.j, getattr(row, attr))
    return {fold: err for fold, (_, err) in per_fold.items()}


def _write_summary(path: Path, rows, spec: RunSpec) -> None:
    reference = 1.0 if 1.0 in spec.t_values else None
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(
            [
                "t",
                "folds",
                "mean_test_err_unclamped",
                "std_test_err_unclamped",
                "mean_test_err_clamped",
                "std_test_err_clamped",
                "vs_reference_unclamped",
                "vs_reference_clamped",
            ]
        )
        ref_unclamped = (
            _final_errors(rows, reference, "test_err_unclamped") if reference is not None else {}
        )
        for t in spec.t_values:
            unclamped = _final_errors(rows, t, "test_err_unclamped")
            clamped = _final_errors(rows, t, "test_err_clamped")
            clamped_vals = [e for e in clamped.values() if not math.isnan(e)]
            verdict_u = verdict_c = ""
            if reference is not None and t != reference and len(unclamped) >= 2:
                shared = sorted(set(unclamped) & set(ref_unclamped))
                if len(shared) >= 2:
                    verdict_u = paired_ttest(
                        [unclamped[f] for f in shared],
                        [ref_unclamped[f] for f in shared],
                    )
                    if clamped_vals and len(clamped) == len(unclamped):
                        verdict_c = paired_ttest(
                            [clamped[f] for f in shared],
                            [ref_unclamped[f] for f in shared],
                        )
            values = list(unclamped.values())
            writer.writerow(
                [
                    _format_value(t),
                    len(values),
                    _format_value(float(np.mean(values)) if values else math.nan),
                    _format_value(float(np.std(values, ddof=1)) if len(values) > 1 else math.nan),
                    _format_value(float(np.mean(clamped_vals)) if clamped_vals else math.nan),
                    _format_value(
                        float(np.std(clamped_vals, ddof=1)) if len(clamped_vals) > 1 else math.nan
                    ),
                    verdict_u,
                    verdict_c,
                ]
            )


def emit_plots(rows, out_dir) -> list:
    """Tidy per-panel CSVs: columns (t, j, mean over folds).

    One file per plotted quantity; any plotting tool can consume them.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if not rows:
        raise ValueError("empty trace")
    written = []
    for panel in PLOT_PANELS:
        groups: dict = {}
        for row in rows:
            value = getattr(row, panel)
            if isinstance(value, float) and math.isnan(value):
                continue
            groups.setdefault((row.t, row.j), []).append(value)
        path = out_dir / f"plot_{panel}.csv"
        with open(path, "w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle)
            writer.writerow(["t", "j", "mean"])
            for (t, j) in sorted(groups):
                writer.writerow(
                    [_format_value(t), j, _format_value(float(np.mean(groups[(t, j)])))]
                )
        written.append(path)
    return written


def _write_manifest(path: Path, spec: RunSpec, data: Dataset, cells) -> None:
    manifest = {
        "library_version": __version__,
        "spec": asdict(spec),
        "dataset": {"path": spec.data_path, "m": data.m, "d": data.d},
        "cells": [asdict(cell) for cell in cells],
    }
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(manifest, handle, indent=2, sort_keys=True)
        handle.write("\n")


def spec_from_manifest(path) -> RunSpec:
    """Rebuild the RunSpec recorded in a manifest (for exact reruns)."""
    with open(path, encoding="utf-8") as handle:
        manifest = json.load(handle)
    raw = dict(manifest["spec"])
    raw["t_values"] = tuple(raw["t_values"])
    return RunSpec(**raw)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="tempboost-experiment",
        description="Cross-validated tempered-boosting benchmark over a temperature grid.",
    )
    parser.add_argument("--data", required=True, help="CSV file with a header row")
    parser.add_argument("--label-col", default="last", help="label column name, or 'last'")
    parser.add_argument(
        "--t",
        default=",".join(str(t) for t in DEFAULT_T_VALUES),
        help="comma-separated temperatures in [0, 2)",
    )
    parser.add_argument("--iters", type=int, default=20, help="boosting rounds per cell")
    parser.add_argument("--tree-nodes", type=int, default=15, help="nodes per weak tree (odd)")
    parser.add_argument("--folds", type=int, default=10, help="stratified CV folds")
    parser.add_argument("--noise", type=float, default=0.0, help="training label-flip rate")
    parser.add_argument("--clamped", choices=("both", "on", "off"), default="both")
    parser.add_argument("--seed", type=int, default=0, help="master seed (u64)")
    parser.add_argument("--jobs", type=int, default=1, help="parallel cells")
    parser.add_argument("--out", default="results", help="output directory")
    parser.add_argument("--split-cap", type=int, default=DEFAULT_SPLIT_CAP)
    args = parser.parse_args(argv)

    spec = RunSpec(
        data_path=args.data,
        label_column=args.label_col,
        t_values=tuple(float(v) for v in args.t.split(",") if v.strip() != ""),
        rounds=args.iters,
        tree_nodes=args.tree_nodes,
        folds=args.folds,
        noise=args.noise,
        clamped=args.clamped,
        seed=args.seed,
        jobs=args.jobs,
        out_dir=args.out,
        split_cap=args.split_cap,
    )
    result = run(spec)
    print(f"wrote {result.out_dir / 'trace.csv'} ({len(result.rows)} rows)")
    if result.failed_cells:
        print(f"{result.failed_cells} cell(s) failed; see manifest.json", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
