"""Gradient-norm sample importance for time-series training.

Scores every training sample by its epoch-averaged gradient norm, selects
the top-p% most influential samples, retrains on that subset, and reports
the accuracy / compute trade-off.
"""

from .data import (
    DatasetSpec,
    RawSeries,
    SynthProfile,
    TimeSeriesDataset,
    apply_scaler,
    build_supervised,
    chrono_split,
    fit_scaler,
    ingest_csv,
    invert_scaler,
    make_windows,
    resolve_series,
    synth_series,
)
from .errors import ConfigError, DataError, NumericalError
from .experiment import (
    ExperimentReport,
    SweepConfig,
    bootstrap_ci,
    derive_run_seed,
    emit_report,
    run_sweep,
    sweep_config_from_flat,
    sweep_config_to_flat,
)
from .importance import (
    GradientLog,
    ImportanceRanking,
    SelectionResult,
    export_ranking_csv,
    importance_scores,
    load_gradient_log,
    save_gradient_log,
    select_top_p,
)
from .model import (
    AdamParams,
    AdamState,
    ModelState,
    Topology,
    adam_state_for,
    adam_step,
    backward_per_sample,
    forward,
    grad_norm,
    init_model,
    load_checkpoint,
    loss_mse,
    save_checkpoint,
)
from .training import (
    CostLedger,
    EvalMetrics,
    TrainConfig,
    evaluate,
    retrain_subset,
    train_tracked,
)

__version__ = "0.1.0"

__all__ = [
    "AdamParams", "AdamState", "ConfigError", "CostLedger", "DataError",
    "DatasetSpec", "EvalMetrics", "ExperimentReport", "GradientLog",
    "ImportanceRanking", "ModelState", "NumericalError", "RawSeries",
    "SelectionResult", "SweepConfig", "SynthProfile", "TimeSeriesDataset",
    "Topology", "TrainConfig", "adam_state_for", "adam_step", "apply_scaler",
    "backward_per_sample", "bootstrap_ci", "build_supervised", "chrono_split",
    "derive_run_seed", "emit_report", "evaluate", "export_ranking_csv",
    "fit_scaler", "forward", "grad_norm", "importance_scores", "ingest_csv",
    "init_model", "invert_scaler", "load_checkpoint", "load_gradient_log",
    "loss_mse", "make_windows", "resolve_series", "retrain_subset",
    "run_sweep", "save_checkpoint", "save_gradient_log", "select_top_p",
    "sweep_config_from_flat", "sweep_config_to_flat", "synth_series",
    "train_tracked",
]
