"""Command-line front end: synth, rank, sweep and report subcommands.

Exit codes: 0 success, 2 config error, 3 data error, 4 numerical failure,
5 partial sweep (some tasks failed but a report was still written).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from pathlib import Path

from .data import (
    SynthProfile,
    build_supervised,
    resolve_series,
    synth_series,
    write_series_csv,
)
from .errors import ConfigError, DataError, NumericalError
from .experiment import (
    derive_run_seed,
    emit_report,
    load_results_csv,
    load_timings_csv,
    report_from_rows,
    run_sweep,
    sweep_config_from_flat,
    sweep_config_to_flat,
    _write_curves_svg,
    _write_table_md,
)
from .importance import export_ranking_csv, importance_scores, save_gradient_log
from .training import train_tracked

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4
EXIT_PARTIAL = 5

OUT_DIR_ENV = "GRADSIFT_OUT_DIR"
WORKERS_ENV = "GRADSIFT_WORKERS"


def _parse_set_overrides(pairs) -> dict:
    flat = {}
    for pair in pairs or []:
        key, sep, raw = pair.partition("=")
        if not sep or not key:
            raise ConfigError(f"--set expects KEY=VALUE, got {pair!r}")
        try:
            flat[key] = json.loads(raw)
        except json.JSONDecodeError:
            flat[key] = raw
    return flat


def _parse_p_values(raw: str) -> list:
    try:
        values = [float(tok) for tok in raw.replace(";", ",").split(",") if tok.strip()]
    except ValueError:
        raise ConfigError(f"cannot parse --p-values {raw!r}") from None
    if not values:
        raise ConfigError("--p-values is empty")
    return [int(v) if v.is_integer() else v for v in values]


def _load_flat_config(path, args) -> tuple[dict, str | None]:
    """Merge config file, --set overrides and dedicated flags (that order).

    Returns the flat config plus any output.dir from the file, which is an
    execution setting and never enters the SweepConfig echo.
    """
    try:
        with open(path, encoding="utf-8") as fh:
            flat = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(flat, dict):
        raise ConfigError("config file must be a JSON object of dotted keys")
    out_dir = flat.pop("output.dir", None)
    flat.update(_parse_set_overrides(getattr(args, "set", None)))
    if getattr(args, "p_values", None):
        flat["sweep.p_values"] = _parse_p_values(args.p_values)
    if getattr(args, "runs", None) is not None:
        flat["sweep.n_runs"] = args.runs
    if getattr(args, "epochs", None) is not None:
        flat["train.epochs"] = args.epochs
    if getattr(args, "master_seed", None) is not None:
        flat["sweep.master_seed"] = args.master_seed
    return flat, out_dir


def _resolve_out_dir(args, config_out: str | None, default: str) -> Path:
    if getattr(args, "out", None):
        return Path(args.out)
    env = os.environ.get(OUT_DIR_ENV)
    if env:
        return Path(env)
    if config_out:
        return Path(config_out)
    return Path(default)


def _resolve_workers(args) -> int:
    if getattr(args, "workers", None) is not None:
        workers = args.workers
    else:
        env = os.environ.get(WORKERS_ENV)
        try:
            workers = int(env) if env else 1
        except ValueError:
            raise ConfigError(f"{WORKERS_ENV} must be an integer, got {env!r}") from None
    if workers < 1:
        raise ConfigError(f"workers must be >= 1, got {workers}")
    return workers


def cmd_synth(args) -> int:
    if args.length < 1:
        raise ConfigError(f"--length must be >= 1, got {args.length}")
    if args.seed < 0:
        raise ConfigError(f"--seed must be >= 0, got {args.seed}")
    profile = SynthProfile(
        base=args.base,
        daily_amplitude=args.daily_amplitude,
        weekly_amplitude=args.weekly_amplitude,
        noise_std=args.noise_std,
        spike_rate=args.spike_rate,
        spike_scale=args.spike_scale,
        samples_per_day=args.samples_per_day,
    )
    series = synth_series(args.seed, args.length, profile)
    out = Path(args.out)
    if out.parent != Path(""):
        out.parent.mkdir(parents=True, exist_ok=True)
    write_series_csv(series, out)
    print(f"wrote {len(series)} points to {out}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    flat, config_out = _load_flat_config(args.config, args)
    cfg = sweep_config_from_flat(flat)
    workers = _resolve_workers(args)
    out_dir = _resolve_out_dir(args, config_out, "runs/sweep")
    report = run_sweep(cfg, workers=workers)
    files = emit_report(report, out_dir)
    for name in sorted(files):
        print(f"{name}: {files[name]}")
    if not any(r.kind == "full" for r in report.rows):
        print("all runs failed; see summary.json failures", file=sys.stderr)
        return EXIT_NUMERIC
    if report.partial:
        print("sweep completed partially; see summary.json failures", file=sys.stderr)
        return EXIT_PARTIAL
    return EXIT_OK


def cmd_rank(args) -> int:
    flat, config_out = _load_flat_config(args.config, args)
    cfg = sweep_config_from_flat(flat)
    out_dir = _resolve_out_dir(args, config_out, "runs/rank")
    series = resolve_series(cfg.dataset)
    train_ds, _, _ = build_supervised(series, cfg.dataset.train_fraction, cfg.dataset.window)
    run_cfg = dataclasses.replace(cfg.train, seed=derive_run_seed(cfg.master_seed, 0))
    _, glog, _ = train_tracked(run_cfg, train_ds)
    ranking = importance_scores(glog)
    out_dir.mkdir(parents=True, exist_ok=True)
    ranking_path = out_dir / "ranking.csv"
    export_ranking_csv(ranking, ranking_path)
    gmatrix_path = out_dir / "gradient_norms.csv"
    save_gradient_log(glog, gmatrix_path)
    with open(out_dir / "config_echo.json", "w", encoding="utf-8") as fh:
        json.dump(sweep_config_to_flat(cfg), fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"ranking: {ranking_path}")
    print(f"gradient matrix: {gmatrix_path}")
    return EXIT_OK


def cmd_report(args) -> int:
    results = Path(args.results)
    if results.is_dir():
        results_csv = results / "results.csv"
        timings_csv = results / "timings.csv"
    else:
        results_csv = results
        timings_csv = results.parent / "timings.csv"
    if not results_csv.exists():
        raise DataError(f"results file not found: {results_csv}")
    rows = load_results_csv(results_csv)
    have_timings = timings_csv.exists()
    if have_timings:
        load_timings_csv(timings_csv, rows)
    report = report_from_rows(rows)
    if not have_timings:
        # wall times unknown: blank them so the table shows n/a
        for r in report.rows:
            r.wall_time_s = 0.0
    out_dir = _resolve_out_dir(args, None, str(results_csv.parent))
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_table_md(report, out_dir / "table.md")
    if report.aggregates:
        _write_curves_svg(report, out_dir / "curves.svg")
        print(f"curves: {out_dir / 'curves.svg'}")
    print(f"table: {out_dir / 'table.md'}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gradsift",
        description="Gradient-norm sample importance: rank training samples, "
        "retrain on top-p%% subsets, and report the accuracy/compute trade-off.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_synth = sub.add_parser("synth", help="generate a synthetic activity CSV")
    p_synth.add_argument("--out", required=True, help="output CSV path")
    p_synth.add_argument("--seed", type=int, default=0)
    p_synth.add_argument("--length", type=int, default=5000)
    p_synth.add_argument("--base", type=float, default=SynthProfile.base)
    p_synth.add_argument("--daily-amplitude", type=float, default=SynthProfile.daily_amplitude)
    p_synth.add_argument("--weekly-amplitude", type=float, default=SynthProfile.weekly_amplitude)
    p_synth.add_argument("--noise-std", type=float, default=SynthProfile.noise_std)
    p_synth.add_argument("--spike-rate", type=float, default=SynthProfile.spike_rate)
    p_synth.add_argument("--spike-scale", type=float, default=SynthProfile.spike_scale)
    p_synth.add_argument("--samples-per-day", type=int, default=SynthProfile.samples_per_day)
    p_synth.set_defaults(func=cmd_synth)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="JSON config (flat dotted keys)")
    common.add_argument("--out", help="output directory (overrides env and config)")
    common.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override any config key; repeatable")

    p_sweep = sub.add_parser("sweep", parents=[common],
                             help="run the full p-sweep and write report files")
    p_sweep.add_argument("--p-values", help="comma-separated p list, e.g. 10,20,50")
    p_sweep.add_argument("--runs", type=int, help="number of seeded runs")
    p_sweep.add_argument("--epochs", type=int, help="training epochs per run")
    p_sweep.add_argument("--master-seed", type=int, help="sweep master seed")
    p_sweep.add_argument("--workers", type=int,
                         help=f"concurrent tasks (or set {WORKERS_ENV})")
    p_sweep.set_defaults(func=cmd_sweep)

    p_rank = sub.add_parser("rank", parents=[common],
                            help="train once and export the importance ranking")
    p_rank.set_defaults(func=cmd_rank)

    p_report = sub.add_parser("report", help="re-render table/curves from results.csv")
    p_report.add_argument("--results", required=True,
                          help="results.csv or the directory containing it")
    p_report.add_argument("--out", help="output directory (default: alongside results)")
    p_report.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on usage errors, 0 on --help
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    sys.exit(main())
