"""Per-sample gradient-norm bookkeeping, importance scores, top-p selection.

Scores are the per-sample mean of the recorded norms across epochs. The
top-p subset is the k = ceil(p/100 * n) highest-score samples; because
scores are non-negative this is exactly the size-at-most-k subset with the
largest score sum. Ties break toward the lower sample index so rankings
are reproducible.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np


class GradientLog:
    """Epoch-major record of per-sample gradient norms (the E x N matrix).

    Rows must arrive in epoch order and each row must be complete before
    the next starts; entries are validated to be finite and non-negative.
    """

    def __init__(self, n_samples: int):
        if n_samples < 1:
            raise ValueError(f"n_samples must be >= 1, got {n_samples}")
        self.n_samples = int(n_samples)
        self._rows: list[np.ndarray] = []

    @property
    def epochs_completed(self) -> int:
        return len(self._rows)

    def record_epoch(self, epoch: int, norms_row) -> None:
        if epoch != self.epochs_completed:
            raise ValueError(
                f"epoch {epoch} out of order (next expected: {self.epochs_completed})"
            )
        row = np.asarray(norms_row, dtype=np.float64)
        if row.shape != (self.n_samples,):
            raise ValueError(f"row has shape {row.shape}, expected ({self.n_samples},)")
        if not np.all(np.isfinite(row)):
            raise ValueError("gradient norms must be finite")
        if np.any(row < 0):
            raise ValueError("gradient norms must be non-negative")
        self._rows.append(row.copy())

    def matrix(self) -> np.ndarray:
        if not self._rows:
            return np.empty((0, self.n_samples))
        return np.vstack(self._rows)


def save_gradient_log(log: GradientLog, path) -> None:
    """Dump the matrix epoch-major; .npy is binary, anything else is CSV."""
    m = log.matrix()
    path = str(path)
    if path.endswith(".npy"):
        np.save(path, m)
    else:
        np.savetxt(path, m, delimiter=",", fmt="%.17g")


def load_gradient_log(path) -> GradientLog:
    path = str(path)
    if path.endswith(".npy"):
        m = np.load(path)
    else:
        m = np.loadtxt(path, delimiter=",", ndmin=2)
    log = GradientLog(m.shape[1])
    for epoch in range(m.shape[0]):
        log.record_epoch(epoch, m[epoch])
    return log


@dataclass
class ImportanceRanking:
    """Per-sample scores and the descending-score sample order."""

    scores: np.ndarray
    order: np.ndarray

    def __post_init__(self):
        self.scores = np.ascontiguousarray(self.scores, dtype=np.float64)
        self.order = np.ascontiguousarray(self.order, dtype=np.int64)
        if self.scores.shape != self.order.shape or self.scores.ndim != 1:
            raise ValueError("scores and order must be equal-length 1-D arrays")

    def __len__(self) -> int:
        return int(self.scores.size)


def importance_scores(log: GradientLog) -> ImportanceRanking:
    """Mean norm per sample across all recorded epochs, ranked descending."""
    if log.epochs_completed == 0:
        raise ValueError("cannot score an empty gradient log")
    m = log.matrix()
    scores = m.mean(axis=0)
    n = scores.size
    # primary key: descending score; tie-break: ascending sample index
    order = np.lexsort((np.arange(n), -scores))
    return ImportanceRanking(scores=scores, order=order)


@dataclass(frozen=True)
class SelectionResult:
    """The chosen subset: percentage, its sample count, ascending indices."""

    p: float
    k: int
    indices: np.ndarray

    def __post_init__(self):
        object.__setattr__(
            self, "indices", np.ascontiguousarray(self.indices, dtype=np.int64)
        )
        if self.indices.shape != (self.k,):
            raise ValueError(f"expected {self.k} indices, got {self.indices.shape}")


def select_top_p(ranking: ImportanceRanking, p) -> SelectionResult:
    """Top k = ceil(p/100 * n) samples by score, returned in temporal order.

    The product is computed before dividing so integral (p, n) pairs like
    (30, 10) never ceil up from representation error.
    """
    p = float(p)
    if not 0.0 < p <= 100.0:
        raise ValueError(f"p must be in (0, 100], got {p}")
    n = len(ranking)
    k = math.ceil((p * n) / 100.0)
    indices = np.sort(ranking.order[:k])
    return SelectionResult(p=p, k=k, indices=indices)


def export_ranking_csv(ranking: ImportanceRanking, path) -> None:
    """One row per sample: sample_index, score, rank (1 = most important)."""
    n = len(ranking)
    rank_of = np.empty(n, dtype=np.int64)
    rank_of[ranking.order] = np.arange(1, n + 1)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["sample_index", "score", "rank"])
        for s in range(n):
            writer.writerow([s, repr(float(ranking.scores[s])), int(rank_of[s])])
