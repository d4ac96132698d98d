"""Training loops: tracked full-data training, subset retraining, evaluation.

Samples are always visited in temporal order (no shuffling). Mini-batch
updates apply the mean of the batch's per-sample gradients, so the norms
entering the gradient log are exact per-sample quantities, measured at the
parameter state current when the sample's batch is visited.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import kernels
from .data import ScalerParams, TimeSeriesDataset, invert_scaler
from .errors import NumericalError
from .importance import GradientLog, SelectionResult
from .model import (
    AdamParams,
    ModelState,
    Topology,
    _adam_update,
    grad_norms_rows,
    init_model,
)


@dataclass(frozen=True)
class TrainConfig:
    """Everything a single training run depends on besides the data."""

    epochs: int = 30
    batch_size: int = 32
    learning_rate: float = 1e-3
    seed: int = 0
    hidden_size: int = 32
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.learning_rate <= 0:
            raise ValueError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.hidden_size < 1:
            raise ValueError(f"hidden_size must be >= 1, got {self.hidden_size}")

    def topology(self, input_size: int = 1) -> Topology:
        return Topology(input_size=input_size, hidden_size=self.hidden_size, output_size=1)

    def adam(self) -> AdamParams:
        return AdamParams(
            learning_rate=self.learning_rate,
            beta1=self.beta1,
            beta2=self.beta2,
            eps=self.adam_eps,
        )


@dataclass
class CostLedger:
    """Deterministic compute counters plus the measured wall time.

    sample_visits is exact: epochs * samples trained on, no approximation.
    """

    wall_time_s: float
    sample_visits: int
    param_update_count: int
    estimated_flops: int


@dataclass(frozen=True)
class EvalMetrics:
    """Test-set errors in original (de-normalized) units."""

    mae: float
    rmse: float
    n_test: int


def estimate_flops(topology: Topology, timesteps: int, sample_visits: int, param_updates: int) -> int:
    """Analytic flop model: multiply-add counted as 2, backward as 2x forward."""
    h, i = topology.hidden_size, topology.input_size
    fwd = timesteps * (2 * 4 * h * (i + h) + 16 * h) + 2 * h + 1
    per_visit = 3 * fwd
    return sample_visits * per_visit + param_updates * 10 * topology.param_count()


def _run_training(config: TrainConfig, X: np.ndarray, y: np.ndarray,
                  log: GradientLog | None, batch_hook=None):
    """Shared loop behind train_tracked and retrain_subset.

    batch_hook(epoch, batch_start, params_copy), when given, is called
    before each update; it exists so tests can replay recorded visits.
    """
    n = int(y.size)
    if n < 1:
        raise ValueError("dataset is empty")
    topology = config.topology(input_size=X.shape[2])
    model = init_model(topology, config.seed)
    wx, wh, b, wd, bd = model.views()
    p = model.params.size
    m = np.zeros(p)
    v = np.zeros(p)
    t = 0
    hyper = config.adam()
    visits = 0
    updates = 0
    # one untimed batch so JIT compilation/cache load stays out of wall time
    kernels.grads_batch(wx, wh, b, wd, bd, X[:1], y[:1])
    start = time.perf_counter()
    for epoch in range(config.epochs):
        norms_row = np.empty(n) if log is not None else None
        for lo in range(0, n, config.batch_size):
            hi = min(lo + config.batch_size, n)
            if batch_hook is not None:
                batch_hook(epoch, lo, model.params.copy())
            preds, grads = kernels.grads_batch(wx, wh, b, wd, bd, X[lo:hi], y[lo:hi])
            gbar = grads.mean(axis=0)
            if not (np.all(np.isfinite(preds)) and np.all(np.isfinite(gbar))):
                bad = int(np.argmax(~np.isfinite(preds))) if not np.all(
                    np.isfinite(preds)
                ) else 0
                raise NumericalError(
                    f"non-finite loss/gradient at epoch {epoch}, sample {lo + bad}"
                )
            if log is not None:
                norms = grad_norms_rows(grads)
                if not np.all(np.isfinite(norms)):
                    bad = int(np.argmax(~np.isfinite(norms)))
                    raise NumericalError(
                        f"non-finite gradient norm at epoch {epoch}, sample {lo + bad}"
                    )
                norms_row[lo:hi] = norms
            t = _adam_update(model.params, gbar, m, v, t, hyper)
            updates += 1
        if log is not None:
            log.record_epoch(epoch, norms_row)
        visits += n
    wall = time.perf_counter() - start
    ledger = CostLedger(
        wall_time_s=wall,
        sample_visits=visits,
        param_update_count=updates,
        estimated_flops=estimate_flops(topology, X.shape[1], visits, updates),
    )
    return model, ledger


def train_tracked(config: TrainConfig, dataset: TimeSeriesDataset, batch_hook=None):
    """Train on the full dataset while recording every per-sample norm.

    Returns (model, gradient_log, cost_ledger); the log has exactly
    config.epochs rows of len(dataset) norms each.
    """
    log = GradientLog(len(dataset))
    model, ledger = _run_training(config, dataset.X, dataset.y, log=log, batch_hook=batch_hook)
    return model, log, ledger


def retrain_subset(config: TrainConfig, dataset: TimeSeriesDataset, selection: SelectionResult):
    """Reinitialize from config.seed and train only on the selected samples.

    Selection indices are consumed in ascending (temporal) order; with the
    full selection this reproduces train_tracked's parameters bit for bit.
    """
    idx = np.asarray(selection.indices, dtype=np.int64)
    if idx.size == 0:
        raise ValueError("selection is empty")
    if idx.min() < 0 or idx.max() >= len(dataset):
        raise ValueError("selection indices out of range for dataset")
    sub = dataset.take(idx)
    return _run_training(config, sub.X, sub.y, log=None)


def evaluate(model: ModelState, dataset: TimeSeriesDataset, scaler: ScalerParams) -> EvalMetrics:
    """MAE/RMSE on de-normalized predictions against de-normalized targets."""
    if len(dataset) < 1:
        raise ValueError("evaluation dataset is empty")
    wx, wh, b, wd, bd = model.views()
    preds = kernels.forward_batch(wx, wh, b, wd, bd, dataset.X)
    d = invert_scaler(preds, scaler) - invert_scaler(dataset.y, scaler)
    return EvalMetrics(
        mae=float(np.mean(np.abs(d))),
        rmse=float(np.sqrt(np.mean(np.square(d)))),
        n_test=len(dataset),
    )
