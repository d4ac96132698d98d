"""Sweep orchestration, aggregation, bootstrap CI and report files.

A sweep runs n_runs seeded repetitions. Each run trains one tracked
full-data baseline, scores the samples from its gradient log, then for
every p retrains from scratch on the top-p% subset and evaluates on the
held-out tail. Rows are keyed by (run, p) and assembled in a fixed order,
so the report content is identical for any worker count.

results.csv and summary.json contain only deterministic values; measured
wall times go to timings.csv so that two sweeps with the same master seed
produce byte-identical gated files.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import kernels
from .data import DatasetSpec, SynthProfile, build_supervised, resolve_series
from .errors import ConfigError
from .importance import importance_scores, select_top_p
from .training import TrainConfig, evaluate, retrain_subset, train_tracked

SCHEMA_VERSION = 1
DEFAULT_P_VALUES = (10, 20, 30, 40, 50, 60, 70, 80, 90, 100)
_BOOTSTRAP_TAG = 0x424F4F54  # disambiguates the CI seed from run seeds

RESULTS_COLUMNS = [
    "kind", "run", "p", "run_seed", "mae", "rmse",
    "sample_visits", "param_updates", "estimated_flops",
]
TIMINGS_COLUMNS = ["kind", "run", "p", "run_seed", "wall_time_s"]


@dataclass(frozen=True)
class SweepConfig:
    """Full description of a sweep: data source, trainer, and protocol."""

    dataset: DatasetSpec = field(default_factory=DatasetSpec)
    train: TrainConfig = field(default_factory=TrainConfig)
    p_values: tuple = DEFAULT_P_VALUES
    n_runs: int = 5
    bootstrap_resamples: int = 1000
    ci_level: float = 0.95
    master_seed: int = 0

    def __post_init__(self):
        ps = tuple(sorted(set(float(p) for p in self.p_values)))
        for p in ps:
            if not 0.0 < p <= 100.0:
                raise ConfigError(f"p value {p} outside (0, 100]")
        object.__setattr__(self, "p_values", ps)
        if self.n_runs < 1:
            raise ConfigError(f"n_runs must be >= 1, got {self.n_runs}")
        if self.bootstrap_resamples < 1:
            raise ConfigError("bootstrap_resamples must be >= 1")
        if not 0.0 < self.ci_level < 1.0:
            raise ConfigError(f"ci_level must be in (0, 1), got {self.ci_level}")


def derive_run_seed(master_seed: int, run_index: int) -> int:
    """Stable per-run seed; platform-independent."""
    seq = np.random.SeedSequence((int(master_seed), int(run_index)))
    return int(seq.generate_state(1)[0])


def _fmt_p(p: float):
    # sweep p values are almost always integers; keep them readable
    return int(p) if float(p).is_integer() else float(p)


def sweep_config_to_flat(cfg: SweepConfig) -> dict:
    """Flatten to the dotted-key form used by config files and the echo."""
    ds = cfg.dataset
    flat = {"dataset.kind": ds.kind}
    if ds.kind == "csv":
        flat["dataset.path"] = ds.path
        flat["dataset.value_column"] = ds.value_column
        flat["dataset.timestamp_column"] = ds.timestamp_column
    else:
        prof = ds.profile
        flat["dataset.seed"] = ds.seed
        flat["dataset.length"] = ds.length
        flat["dataset.base"] = prof.base
        flat["dataset.daily_amplitude"] = prof.daily_amplitude
        flat["dataset.weekly_amplitude"] = prof.weekly_amplitude
        flat["dataset.noise_std"] = prof.noise_std
        flat["dataset.spike_rate"] = prof.spike_rate
        flat["dataset.spike_scale"] = prof.spike_scale
        flat["dataset.samples_per_day"] = prof.samples_per_day
    flat["dataset.train_fraction"] = ds.train_fraction
    flat["dataset.window"] = ds.window
    tr = cfg.train
    flat["train.epochs"] = tr.epochs
    flat["train.batch_size"] = tr.batch_size
    flat["train.learning_rate"] = tr.learning_rate
    flat["train.hidden_size"] = tr.hidden_size
    flat["train.beta1"] = tr.beta1
    flat["train.beta2"] = tr.beta2
    flat["train.adam_eps"] = tr.adam_eps
    flat["sweep.p_values"] = [_fmt_p(p) for p in cfg.p_values]
    flat["sweep.n_runs"] = cfg.n_runs
    flat["sweep.bootstrap_resamples"] = cfg.bootstrap_resamples
    flat["sweep.ci_level"] = cfg.ci_level
    flat["sweep.master_seed"] = cfg.master_seed
    return flat


_CSV_KEYS = {"dataset.path", "dataset.value_column", "dataset.timestamp_column"}
_SYNTH_KEYS = {
    "dataset.seed", "dataset.length", "dataset.base", "dataset.daily_amplitude",
    "dataset.weekly_amplitude", "dataset.noise_std", "dataset.spike_rate",
    "dataset.spike_scale", "dataset.samples_per_day",
}
_SHARED_KEYS = {
    "dataset.kind", "dataset.train_fraction", "dataset.window",
    "train.epochs", "train.batch_size", "train.learning_rate", "train.hidden_size",
    "train.beta1", "train.beta2", "train.adam_eps",
    "sweep.p_values", "sweep.n_runs", "sweep.bootstrap_resamples",
    "sweep.ci_level", "sweep.master_seed",
}
KNOWN_KEYS = _CSV_KEYS | _SYNTH_KEYS | _SHARED_KEYS


def _coerce(flat: dict, key: str, kind, default):
    if key not in flat:
        return default
    value = flat[key]
    try:
        if kind is int:
            out = int(value)
            if isinstance(value, float) and value != out:
                raise ValueError
            return out
        if kind is float:
            return float(value)
        if kind is str:
            if not isinstance(value, str):
                raise ValueError
            return value
        raise AssertionError(kind)
    except (TypeError, ValueError):
        raise ConfigError(f"config key {key!r} has invalid value {value!r}") from None


def sweep_config_from_flat(flat: dict) -> SweepConfig:
    """Build a SweepConfig from dotted keys; unknown keys are rejected."""
    unknown = sorted(set(flat) - KNOWN_KEYS)
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
    kind = _coerce(flat, "dataset.kind", str, None)
    if kind is None:
        raise ConfigError("config must set dataset.kind (synthetic or csv)")
    if kind not in ("synthetic", "csv"):
        raise ConfigError(f"dataset.kind must be 'synthetic' or 'csv', got {kind!r}")
    wrong_family = _CSV_KEYS if kind == "synthetic" else _SYNTH_KEYS
    misplaced = sorted(set(flat) & wrong_family)
    if misplaced:
        raise ConfigError(
            f"key(s) {', '.join(misplaced)} do not apply to dataset.kind={kind}"
        )
    if kind == "csv":
        path = _coerce(flat, "dataset.path", str, None)
        if not path:
            raise ConfigError("csv dataset requires dataset.path")
        dataset = DatasetSpec(
            kind="csv",
            path=path,
            value_column=_coerce(flat, "dataset.value_column", str, "value"),
            timestamp_column=_coerce(flat, "dataset.timestamp_column", str, "timestamp"),
            train_fraction=_coerce(flat, "dataset.train_fraction", float, 0.8),
            window=_coerce(flat, "dataset.window", int, 1),
        )
    else:
        profile = SynthProfile(
            base=_coerce(flat, "dataset.base", float, SynthProfile.base),
            daily_amplitude=_coerce(
                flat, "dataset.daily_amplitude", float, SynthProfile.daily_amplitude
            ),
            weekly_amplitude=_coerce(
                flat, "dataset.weekly_amplitude", float, SynthProfile.weekly_amplitude
            ),
            noise_std=_coerce(flat, "dataset.noise_std", float, SynthProfile.noise_std),
            spike_rate=_coerce(flat, "dataset.spike_rate", float, SynthProfile.spike_rate),
            spike_scale=_coerce(
                flat, "dataset.spike_scale", float, SynthProfile.spike_scale
            ),
            samples_per_day=_coerce(
                flat, "dataset.samples_per_day", int, SynthProfile.samples_per_day
            ),
        )
        dataset = DatasetSpec(
            kind="synthetic",
            seed=_coerce(flat, "dataset.seed", int, 0),
            length=_coerce(flat, "dataset.length", int, 5000),
            profile=profile,
            train_fraction=_coerce(flat, "dataset.train_fraction", float, 0.8),
            window=_coerce(flat, "dataset.window", int, 1),
        )
    p_values = flat.get("sweep.p_values", list(DEFAULT_P_VALUES))
    if not isinstance(p_values, (list, tuple)):
        raise ConfigError("sweep.p_values must be a list")
    try:
        train = TrainConfig(
            epochs=_coerce(flat, "train.epochs", int, 30),
            batch_size=_coerce(flat, "train.batch_size", int, 32),
            learning_rate=_coerce(flat, "train.learning_rate", float, 1e-3),
            hidden_size=_coerce(flat, "train.hidden_size", int, 32),
            beta1=_coerce(flat, "train.beta1", float, 0.9),
            beta2=_coerce(flat, "train.beta2", float, 0.999),
            adam_eps=_coerce(flat, "train.adam_eps", float, 1e-8),
        )
        return SweepConfig(
            dataset=dataset,
            train=train,
            p_values=tuple(p_values),
            n_runs=_coerce(flat, "sweep.n_runs", int, 5),
            bootstrap_resamples=_coerce(flat, "sweep.bootstrap_resamples", int, 1000),
            ci_level=_coerce(flat, "sweep.ci_level", float, 0.95),
            master_seed=_coerce(flat, "sweep.master_seed", int, 0),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def config_hash(flat: dict) -> str:
    return hashlib.sha256(
        json.dumps(flat, sort_keys=True).encode("utf-8")
    ).hexdigest()


@dataclass
class RunRow:
    """One trained-and-evaluated model: the full baseline or a p% subset."""

    kind: str  # "full" | "subset"
    run: int
    p: float
    run_seed: int
    mae: float
    rmse: float
    wall_time_s: float
    sample_visits: int
    param_updates: int
    estimated_flops: int


@dataclass
class PAggregate:
    p: float
    n: int
    mean_mae: float
    std_mae: float
    mean_rmse: float


@dataclass
class ExperimentReport:
    config: dict
    rows: list
    aggregates: list
    baseline: dict
    best_p: float | None
    improvement: dict | None
    environment: dict
    partial: bool
    failures: list
    n_train_samples: int
    schema_version: int = SCHEMA_VERSION


def bootstrap_ci(diffs, resamples: int = 1000, level: float = 0.95, seed: int = 0):
    """Seeded percentile bootstrap of the mean of `diffs`.

    Resamples with replacement `resamples` times, takes the mean of each
    resample and returns the ((1-level)/2, 1-(1-level)/2) percentiles.
    """
    d = np.asarray(diffs, dtype=np.float64)
    if d.size < 1:
        raise ValueError("need at least one difference")
    if resamples < 1:
        raise ValueError("resamples must be >= 1")
    if not 0.0 < level < 1.0:
        raise ValueError(f"level must be in (0, 1), got {level}")
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, d.size, size=(resamples, d.size))
    means = d[idx].mean(axis=1)
    alpha = (1.0 - level) / 2.0
    lo, hi = np.percentile(means, [100.0 * alpha, 100.0 * (1.0 - alpha)])
    return float(lo), float(hi)


def _std_sample(values: np.ndarray) -> float:
    # sample (n-1) convention; a single run has no spread
    if values.size < 2:
        return 0.0
    return float(np.std(values, ddof=1))


def _baseline_task(cfg: SweepConfig, train_ds, test_ds, scaler, run: int):
    seed = derive_run_seed(cfg.master_seed, run)
    run_cfg = dataclasses.replace(cfg.train, seed=seed)
    model, glog, ledger = train_tracked(run_cfg, train_ds)
    metrics = evaluate(model, test_ds, scaler)
    row = RunRow(
        kind="full", run=run, p=100.0, run_seed=seed,
        mae=metrics.mae, rmse=metrics.rmse, wall_time_s=ledger.wall_time_s,
        sample_visits=ledger.sample_visits, param_updates=ledger.param_update_count,
        estimated_flops=ledger.estimated_flops,
    )
    return row, importance_scores(glog), run_cfg


def _subset_task(run_cfg, train_ds, test_ds, scaler, ranking, run: int, p: float):
    selection = select_top_p(ranking, p)
    model, ledger = retrain_subset(run_cfg, train_ds, selection)
    metrics = evaluate(model, test_ds, scaler)
    return RunRow(
        kind="subset", run=run, p=p, run_seed=run_cfg.seed,
        mae=metrics.mae, rmse=metrics.rmse, wall_time_s=ledger.wall_time_s,
        sample_visits=ledger.sample_visits, param_updates=ledger.param_update_count,
        estimated_flops=ledger.estimated_flops,
    )


def run_sweep(cfg: SweepConfig, workers: int = 1) -> ExperimentReport:
    """Execute the full protocol and aggregate into an ExperimentReport.

    Task failures are recorded and the report is marked partial instead of
    being discarded. Content is invariant to `workers`.
    """
    if workers < 1:
        raise ConfigError(f"workers must be >= 1, got {workers}")
    series = resolve_series(cfg.dataset)
    train_ds, test_ds, scaler = build_supervised(
        series, cfg.dataset.train_fraction, cfg.dataset.window
    )
    failures: list[str] = []
    baselines: dict[int, RunRow] = {}
    rankings: dict[int, object] = {}
    run_cfgs: dict[int, TrainConfig] = {}
    runs = range(cfg.n_runs)

    with ThreadPoolExecutor(max_workers=workers) as pool:
        futs = {
            run: pool.submit(_baseline_task, cfg, train_ds, test_ds, scaler, run)
            for run in runs
        }
        for run in runs:
            try:
                row, ranking, run_cfg = futs[run].result()
            except Exception as exc:  # noqa: BLE001 - recorded, not fatal
                failures.append(f"run {run} baseline: {exc}")
                continue
            baselines[run] = row
            rankings[run] = ranking
            run_cfgs[run] = run_cfg

        subset_rows: dict[tuple[int, float], RunRow] = {}
        futs2 = {}
        for run in runs:
            if run not in rankings:
                continue
            for p in cfg.p_values:
                futs2[(run, p)] = pool.submit(
                    _subset_task, run_cfgs[run], train_ds, test_ds, scaler,
                    rankings[run], run, p,
                )
        for key in sorted(futs2):
            try:
                subset_rows[key] = futs2[key].result()
            except Exception as exc:  # noqa: BLE001
                failures.append(f"run {key[0]} p={_fmt_p(key[1])}: {exc}")

    rows: list[RunRow] = []
    for run in runs:
        if run in baselines:
            rows.append(baselines[run])
        for p in cfg.p_values:
            if (run, p) in subset_rows:
                rows.append(subset_rows[(run, p)])

    aggregates = []
    for p in cfg.p_values:
        maes = np.array([r.mae for r in rows if r.kind == "subset" and r.p == p])
        if maes.size == 0:
            continue
        rmses = np.array([r.rmse for r in rows if r.kind == "subset" and r.p == p])
        aggregates.append(
            PAggregate(
                p=p, n=int(maes.size), mean_mae=float(maes.mean()),
                std_mae=_std_sample(maes), mean_rmse=float(rmses.mean()),
            )
        )

    base_maes = np.array([r.mae for r in rows if r.kind == "full"])
    baseline = {
        "n": int(base_maes.size),
        "mean_mae": float(base_maes.mean()) if base_maes.size else None,
        "std_mae": _std_sample(base_maes) if base_maes.size else None,
        "mean_rmse": float(
            np.mean([r.rmse for r in rows if r.kind == "full"])
        ) if base_maes.size else None,
    }

    # flag the smallest p whose mean MAE does not exceed the full baseline
    best_p = None
    if baseline["mean_mae"] is not None:
        for agg in aggregates:
            if agg.mean_mae <= baseline["mean_mae"]:
                best_p = agg.p
                break

    improvement = None
    if best_p is not None:
        diffs = []
        for run in runs:
            if run in baselines and (run, best_p) in subset_rows:
                diffs.append(baselines[run].mae - subset_rows[(run, best_p)].mae)
        if diffs:
            ci_seed = int(
                np.random.SeedSequence(
                    (int(cfg.master_seed), _BOOTSTRAP_TAG)
                ).generate_state(1)[0]
            )
            lo, hi = bootstrap_ci(
                diffs, cfg.bootstrap_resamples, cfg.ci_level, seed=ci_seed
            )
            mean_delta = float(np.mean(diffs))
            improvement = {
                "p": _fmt_p(best_p),
                "n": len(diffs),
                "mean_delta_mae": mean_delta,
                "pct_of_baseline": 100.0 * mean_delta / baseline["mean_mae"]
                if baseline["mean_mae"] else None,
                "ci_level": cfg.ci_level,
                "ci_lo": lo,
                "ci_hi": hi,
                "bootstrap_method": "percentile",
                "bootstrap_resamples": cfg.bootstrap_resamples,
            }

    expected = cfg.n_runs * (1 + len(cfg.p_values))
    return ExperimentReport(
        config=sweep_config_to_flat(cfg),
        rows=rows,
        aggregates=aggregates,
        baseline=baseline,
        best_p=best_p,
        improvement=improvement,
        environment={"kernel_backend": kernels.backend_name()},
        partial=len(rows) != expected,
        failures=failures,
        n_train_samples=len(train_ds),
    )


def _write_results_csv(report: ExperimentReport, path: Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(RESULTS_COLUMNS)
        for r in report.rows:
            writer.writerow([
                r.kind, r.run, _fmt_p(r.p), r.run_seed, repr(r.mae), repr(r.rmse),
                r.sample_visits, r.param_updates, r.estimated_flops,
            ])


def _write_timings_csv(report: ExperimentReport, path: Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(TIMINGS_COLUMNS)
        for r in report.rows:
            writer.writerow([r.kind, r.run, _fmt_p(r.p), r.run_seed, repr(r.wall_time_s)])


def _summary_dict(report: ExperimentReport) -> dict:
    return {
        "schema_version": report.schema_version,
        "generator": "gradsift",
        "config": report.config,
        "config_hash": config_hash(report.config),
        "environment": report.environment,
        "n_train_samples": report.n_train_samples,
        "baseline": report.baseline,
        "per_p": [
            {
                "p": _fmt_p(a.p), "n": a.n, "mean_mae": a.mean_mae,
                "std_mae": a.std_mae, "mean_rmse": a.mean_rmse,
            }
            for a in report.aggregates
        ],
        "best_p": _fmt_p(report.best_p) if report.best_p is not None else None,
        "improvement": report.improvement,
        "partial": report.partial,
        "failures": report.failures,
    }


def _write_summary_json(report: ExperimentReport, path: Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_summary_dict(report), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_curves_svg(report: ExperimentReport, path: Path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    ps = [a.p for a in report.aggregates]
    means = [a.mean_mae for a in report.aggregates]
    stds = [a.std_mae for a in report.aggregates]
    with plt.rc_context({"svg.hashsalt": "gradsift"}):
        fig, ax = plt.subplots(figsize=(7, 4.5))
        ax.errorbar(ps, means, yerr=stds, fmt="o-", capsize=3,
                    label="top-p% subset (mean ± 1σ)")
        if report.baseline.get("mean_mae") is not None:
            ax.axhline(report.baseline["mean_mae"], color="tab:green", ls="--",
                       label="full model (mean)")
        ax.set_xlabel("share of training samples kept (%)")
        ax.set_ylabel("test MAE (original units)")
        ax.set_title("accuracy vs. fraction of high-importance samples")
        ax.legend()
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)


def _fmt_cell(value, digits: int = 4) -> str:
    if value is None:
        return "n/a"
    return f"{value:.{digits}g}"


def _write_table_md(report: ExperimentReport, path: Path) -> None:
    base_mae = report.baseline.get("mean_mae")
    best = report.best_p
    mae_abs = mae_pct = time_abs = time_pct = None
    if best is not None and base_mae:
        agg = next(a for a in report.aggregates if a.p == best)
        mae_abs = base_mae - agg.mean_mae
        mae_pct = 100.0 * mae_abs / base_mae
        full_times = [r.wall_time_s for r in report.rows if r.kind == "full"]
        sub_times = [
            r.wall_time_s for r in report.rows if r.kind == "subset" and r.p == best
        ]
        # all-zero walls mean "times unknown" (re-render without timings.csv)
        if full_times and sub_times and any(t > 0 for t in full_times):
            time_abs = float(np.mean(full_times)) - float(np.mean(sub_times))
            time_pct = 100.0 * time_abs / float(np.mean(full_times))
    lines = [
        "| Dataset Size (Samples) | Percentage of Samples Used (%) "
        "| MAE Improvement (absolute) | MAE Improvement (% of baseline) "
        "| Training Time Improvement (seconds) | Training Time Improvement (%) |",
        "|---|---|---|---|---|---|",
        "| {} | {} | {} | {} | {} | {} |".format(
            report.n_train_samples if report.n_train_samples else "n/a",
            _fmt_cell(_fmt_p(best) if best is not None else None),
            _fmt_cell(mae_abs),
            _fmt_cell(mae_pct),
            _fmt_cell(time_abs),
            _fmt_cell(time_pct),
        ),
    ]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def emit_report(report: ExperimentReport, out_dir) -> dict:
    """Write results.csv, timings.csv, summary.json, table.md and (when
    there is at least one aggregate) curves.svg. Returns {name: Path}."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc
    files = {}
    files["results"] = out / "results.csv"
    _write_results_csv(report, files["results"])
    files["timings"] = out / "timings.csv"
    _write_timings_csv(report, files["timings"])
    files["summary"] = out / "summary.json"
    _write_summary_json(report, files["summary"])
    files["table"] = out / "table.md"
    _write_table_md(report, files["table"])
    if report.aggregates:
        files["curves"] = out / "curves.svg"
        _write_curves_svg(report, files["curves"])
    return files


def load_results_csv(path) -> list:
    """Read results.csv rows back (wall times zeroed; see timings.csv)."""
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        for rec in csv.DictReader(fh):
            rows.append(
                RunRow(
                    kind=rec["kind"], run=int(rec["run"]), p=float(rec["p"]),
                    run_seed=int(rec["run_seed"]), mae=float(rec["mae"]),
                    rmse=float(rec["rmse"]), wall_time_s=0.0,
                    sample_visits=int(rec["sample_visits"]),
                    param_updates=int(rec["param_updates"]),
                    estimated_flops=int(rec["estimated_flops"]),
                )
            )
    return rows


def load_timings_csv(path, rows: list) -> None:
    """Attach wall times from timings.csv onto already-loaded rows."""
    by_key = {(r.kind, r.run, r.p): r for r in rows}
    with open(path, newline="", encoding="utf-8") as fh:
        for rec in csv.DictReader(fh):
            key = (rec["kind"], int(rec["run"]), float(rec["p"]))
            if key in by_key:
                by_key[key].wall_time_s = float(rec["wall_time_s"])


def report_from_rows(rows: list) -> ExperimentReport:
    """Rebuild the derivable parts of a report from results.csv rows.

    Used by the re-render command; config echo, the bootstrap CI and the
    training-set size are not recoverable from rows alone and stay empty.
    """
    p_values = sorted({r.p for r in rows if r.kind == "subset"})
    aggregates = []
    for p in p_values:
        maes = np.array([r.mae for r in rows if r.kind == "subset" and r.p == p])
        rmses = np.array([r.rmse for r in rows if r.kind == "subset" and r.p == p])
        aggregates.append(
            PAggregate(p=p, n=int(maes.size), mean_mae=float(maes.mean()),
                       std_mae=_std_sample(maes), mean_rmse=float(rmses.mean()))
        )
    base_maes = np.array([r.mae for r in rows if r.kind == "full"])
    baseline = {
        "n": int(base_maes.size),
        "mean_mae": float(base_maes.mean()) if base_maes.size else None,
        "std_mae": _std_sample(base_maes) if base_maes.size else None,
        "mean_rmse": float(
            np.mean([r.rmse for r in rows if r.kind == "full"])
        ) if base_maes.size else None,
    }
    best_p = None
    if baseline["mean_mae"] is not None:
        for agg in aggregates:
            if agg.mean_mae <= baseline["mean_mae"]:
                best_p = agg.p
                break
    return ExperimentReport(
        config={}, rows=rows, aggregates=aggregates, baseline=baseline,
        best_p=best_p, improvement=None,
        environment={"kernel_backend": kernels.backend_name()},
        partial=False, failures=[], n_train_samples=0,
    )
