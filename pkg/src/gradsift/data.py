"""Series ingestion, normalization, chronological splitting and windowing.

The pipeline is: raw series -> chronological 80/20 split -> min-max scaler
fit on the training side only -> lag-w sliding windows built per side (a
window never straddles the split boundary).
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError

log = logging.getLogger(__name__)

EPOCH_MS_ORIGIN = 1_600_000_000_000  # fixed start for synthetic timestamps


@dataclass
class RawSeries:
    """Univariate series: epoch-ms timestamps plus one value per timestamp."""

    timestamps: np.ndarray
    values: np.ndarray
    dropped_rows: int = 0  # rows discarded during ingestion

    def __post_init__(self):
        self.timestamps = np.ascontiguousarray(self.timestamps, dtype=np.int64)
        self.values = np.ascontiguousarray(self.values, dtype=np.float64)
        if self.timestamps.shape != self.values.shape or self.timestamps.ndim != 1:
            raise DataError("timestamps and values must be equal-length 1-D arrays")
        if self.timestamps.size == 0:
            raise DataError("series is empty")
        if self.timestamps.size > 1 and not np.all(np.diff(self.timestamps) > 0):
            raise DataError("timestamps must be strictly increasing")
        if not np.all(np.isfinite(self.values)):
            raise DataError("series values must be finite")

    def __len__(self) -> int:
        return int(self.values.size)


def ingest_csv(
    path, value_column: str = "value", timestamp_column: str = "timestamp"
) -> RawSeries:
    """Load a (timestamp, value) CSV, sorting by timestamp.

    Rows with unparseable or non-finite fields are dropped and counted, as
    are later duplicates of an already-seen timestamp; the count is logged
    and kept on the returned series.
    """
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot open dataset file {path}: {exc}") from exc
    rows: list[tuple[int, float]] = []
    dropped = 0
    with fh:
        reader = csv.DictReader(fh)
        fieldnames = reader.fieldnames or []
        for col in (timestamp_column, value_column):
            if col not in fieldnames:
                raise DataError(f"column {col!r} not found in {path} (has {fieldnames})")
        for row in reader:
            try:
                ts = int(float(row[timestamp_column]))
                val = float(row[value_column])
            except (TypeError, ValueError):
                dropped += 1
                continue
            if not math.isfinite(val):
                dropped += 1
                continue
            rows.append((ts, val))
    rows.sort(key=lambda r: r[0])
    deduped: list[tuple[int, float]] = []
    for ts, val in rows:
        if deduped and deduped[-1][0] == ts:
            dropped += 1
            continue
        deduped.append((ts, val))
    if not deduped:
        raise DataError(f"no usable rows in {path}")
    if dropped:
        log.warning("dropped %d unusable row(s) while ingesting %s", dropped, path)
    ts_arr = np.array([r[0] for r in deduped], dtype=np.int64)
    val_arr = np.array([r[1] for r in deduped], dtype=np.float64)
    return RawSeries(timestamps=ts_arr, values=val_arr, dropped_rows=dropped)


def write_series_csv(series: RawSeries, path) -> None:
    """Write a series in the same format ingest_csv reads."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["timestamp", "value"])
        for ts, val in zip(series.timestamps, series.values):
            writer.writerow([int(ts), repr(float(val))])


@dataclass(frozen=True)
class ScalerParams:
    """Min-max normalization bounds, fit on the training split only."""

    min: float
    max: float

    def __post_init__(self):
        if not (math.isfinite(self.min) and math.isfinite(self.max)):
            raise DataError("scaler bounds must be finite")
        if self.max < self.min:
            raise DataError("scaler max must be >= min")


def fit_scaler(train_values) -> ScalerParams:
    values = np.asarray(train_values, dtype=np.float64)
    if values.size == 0:
        raise DataError("cannot fit scaler on an empty array")
    return ScalerParams(min=float(values.min()), max=float(values.max()))


def apply_scaler(values, scaler: ScalerParams) -> np.ndarray:
    """Map [min, max] linearly onto [0, 1]; a constant series maps to 0.5."""
    values = np.asarray(values, dtype=np.float64)
    span = scaler.max - scaler.min
    if span == 0.0:
        return np.full_like(values, 0.5)
    return (values - scaler.min) / span


def invert_scaler(values, scaler: ScalerParams) -> np.ndarray:
    values = np.asarray(values, dtype=np.float64)
    return scaler.min + values * (scaler.max - scaler.min)


def chrono_split(series: RawSeries, train_fraction: float = 0.8):
    """First floor(fraction * n) points train, remainder test; order kept."""
    if not 0.0 < train_fraction < 1.0:
        raise DataError(f"train_fraction must be in (0, 1), got {train_fraction}")
    n = len(series)
    if n < 2:
        raise DataError("series too short to split (need at least 2 points)")
    n_train = int(math.floor(train_fraction * n))
    if n_train == 0 or n_train == n:
        raise DataError(f"split of {n} points at {train_fraction} leaves a side empty")
    train = RawSeries(series.timestamps[:n_train].copy(), series.values[:n_train].copy())
    test = RawSeries(series.timestamps[n_train:].copy(), series.values[n_train:].copy())
    return train, test


@dataclass
class TimeSeriesDataset:
    """Supervised samples: X (n, window, 1), y (n,), source positions."""

    X: np.ndarray
    y: np.ndarray
    origin_index: np.ndarray

    def __post_init__(self):
        self.X = np.ascontiguousarray(self.X, dtype=np.float64)
        self.y = np.ascontiguousarray(self.y, dtype=np.float64)
        self.origin_index = np.ascontiguousarray(self.origin_index, dtype=np.int64)
        if self.X.ndim != 3:
            raise DataError(f"X must be (n, window, features), got {self.X.shape}")
        n = self.X.shape[0]
        if self.y.shape != (n,) or self.origin_index.shape != (n,):
            raise DataError("X, y and origin_index must have matching lengths")
        if n > 1 and not np.all(np.diff(self.origin_index) > 0):
            raise DataError("origin_index must be strictly increasing")

    def __len__(self) -> int:
        return int(self.y.size)

    def take(self, indices) -> "TimeSeriesDataset":
        """Subset by sample position, preserving the given order."""
        idx = np.asarray(indices, dtype=np.int64)
        return TimeSeriesDataset(
            X=self.X[idx].copy(),
            y=self.y[idx].copy(),
            origin_index=self.origin_index[idx].copy(),
        )


def make_windows(values, window: int = 1) -> TimeSeriesDataset:
    """Sliding windows: X_i = values[i : i+window], y_i = values[i+window]."""
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 1:
        raise DataError("windowing expects a 1-D value array")
    if window < 1:
        raise DataError(f"window must be >= 1, got {window}")
    if values.size <= window:
        raise DataError(
            f"need more than window={window} values to build samples, got {values.size}"
        )
    n = values.size - window
    x = np.lib.stride_tricks.sliding_window_view(values, window)[:n]
    return TimeSeriesDataset(
        X=x[:, :, None].copy(),
        y=values[window:].copy(),
        origin_index=np.arange(n, dtype=np.int64),
    )


@dataclass(frozen=True)
class SynthProfile:
    """Shape of the generated series: daily cycle, weekly modulation, noise
    and occasional positive spikes."""

    base: float = 100.0
    daily_amplitude: float = 40.0
    weekly_amplitude: float = 0.3
    noise_std: float = 2.0
    spike_rate: float = 0.01
    spike_scale: float = 25.0
    samples_per_day: int = 144

    def __post_init__(self):
        if self.samples_per_day < 1:
            raise DataError("samples_per_day must be >= 1")
        if self.noise_std < 0 or self.spike_scale < 0:
            raise DataError("noise_std and spike_scale must be non-negative")
        if not 0.0 <= self.spike_rate <= 1.0:
            raise DataError("spike_rate must be in [0, 1]")


def synth_series(seed: int, length: int, profile: SynthProfile = SynthProfile()) -> RawSeries:
    """Deterministic synthetic activity series.

    value[i] = base
             + daily_amplitude * sin(2*pi*i/spd) * (1 + weekly_amplitude * sin(2*pi*i/(7*spd)))
             + Gaussian noise
             + Bernoulli(spike_rate) * Exponential(spike_scale) spikes

    Draw order is fixed (noise, spike mask, spike magnitudes) so a replayed
    generator with the same seed reproduces every random component.
    """
    if length < 1:
        raise DataError(f"length must be >= 1, got {length}")
    rng = np.random.default_rng(seed)
    i = np.arange(length, dtype=np.float64)
    spd = float(profile.samples_per_day)
    daily = np.sin(2.0 * np.pi * i / spd)
    weekly = np.sin(2.0 * np.pi * i / (7.0 * spd))
    smooth = profile.base + profile.daily_amplitude * daily * (
        1.0 + profile.weekly_amplitude * weekly
    )
    noise = rng.normal(0.0, profile.noise_std, size=length)
    spike_mask = rng.random(length) < profile.spike_rate
    spike_magnitudes = rng.exponential(profile.spike_scale, size=length)
    values = smooth + noise + spike_mask * spike_magnitudes
    step_ms = 86_400_000 // profile.samples_per_day
    timestamps = EPOCH_MS_ORIGIN + np.arange(length, dtype=np.int64) * step_ms
    return RawSeries(timestamps=timestamps, values=values)


@dataclass(frozen=True)
class DatasetSpec:
    """Where the series comes from and how it becomes supervised samples."""

    kind: str = "synthetic"  # "synthetic" | "csv"
    path: str | None = None
    value_column: str = "value"
    timestamp_column: str = "timestamp"
    seed: int = 0
    length: int = 5000
    profile: SynthProfile = field(default_factory=SynthProfile)
    train_fraction: float = 0.8
    window: int = 1

    def __post_init__(self):
        if self.kind not in ("synthetic", "csv"):
            raise DataError(f"unknown dataset kind {self.kind!r}")
        if self.kind == "csv" and not self.path:
            raise DataError("csv dataset requires a path")


def resolve_series(spec: DatasetSpec) -> RawSeries:
    if spec.kind == "csv":
        return ingest_csv(spec.path, spec.value_column, spec.timestamp_column)
    return synth_series(spec.seed, spec.length, spec.profile)


def build_supervised(series: RawSeries, train_fraction: float = 0.8, window: int = 1):
    """Split, scale on train only, window each side independently.

    Returns (train_dataset, test_dataset, scaler).
    """
    train_raw, test_raw = chrono_split(series, train_fraction)
    scaler = fit_scaler(train_raw.values)
    train_ds = make_windows(apply_scaler(train_raw.values, scaler), window)
    test_ds = make_windows(apply_scaler(test_raw.values, scaler), window)
    return train_ds, test_ds, scaler
