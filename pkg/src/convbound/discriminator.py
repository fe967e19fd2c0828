"""
Discriminator-level classification of summed photon counts.

Two thresholds split the count axis into ``[0, t1)``, ``[t1, t2)`` and
``[t2, N]``. The conventional reading labels these zero-, one- and two-bright.
The "rowe" and "other" joint densities below are two equally valid placements
of the same histogram that support opposite readings of the upper bands.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Iterable, TextIO

import numpy as np

from .errors import ConfigError, ValidationError
from .histogram import FrequencyDist
from .jointdensity import JointDensity, diagonal_placement, edge_placement


@dataclass(frozen=True)
class ThresholdConfig:
    t1: int = 25
    t2: int = 86

    def __post_init__(self):
        if int(self.t1) != self.t1 or int(self.t2) != self.t2:
            raise ConfigError("thresholds must be integers")
        if not (0 < self.t1 < self.t2):
            raise ConfigError(f"need 0 < t1 < t2, got t1={self.t1}, t2={self.t2}")


@dataclass(frozen=True)
class CategoryCounts:
    n0: float
    n1: float
    n2: float
    total: float

    def __post_init__(self):
        if min(self.n0, self.n1, self.n2) < 0 or self.total <= 0:
            raise ValidationError("category counts must be non-negative with positive total")
        if abs(self.n0 + self.n1 + self.n2 - self.total) > 1e-9 * max(1.0, self.total):
            raise ValidationError("n0 + n1 + n2 must equal total")


def _bands(size: int, t: ThresholdConfig):
    n = np.arange(size)
    return n < t.t1, (n >= t.t1) & (n < t.t2), n >= t.t2


def classify_counts(f: FrequencyDist, t: ThresholdConfig) -> CategoryCounts:
    low, mid, high = _bands(f.probs.size, t)
    total = f.total_experiments
    n0 = float(f.probs[low].sum()) * total
    n1 = float(f.probs[mid].sum()) * total
    n2 = float(f.probs[high].sum()) * total
    return CategoryCounts(n0, n1, n2, float(total))


def parity_correlation(c: CategoryCounts) -> float:
    """Same-state minus different-state fraction, ``(n0 + n2 - n1) / total``."""
    return (c.n0 + c.n2 - c.n1) / c.total


def flipped_category_correlation(c: CategoryCounts) -> float:
    """Parity statistic with the one- and two-bright labels swapped."""
    return (c.n0 + c.n1 - c.n2) / c.total


def _banded(f: FrequencyDist, t: ThresholdConfig, edge_band: np.ndarray) -> JointDensity:
    w = f.probs
    size = w.size
    return JointDensity(
        edge_placement(np.where(edge_band, w, 0.0), size)
        + diagonal_placement(np.where(edge_band, 0.0, w), size)
    )


def interpret_rowe(f: FrequencyDist, t: ThresholdConfig) -> JointDensity:
    """Mid band on the edges (one ion on), top band on the diagonal (both on).

    Counts below ``t1`` are placed on the diagonal in both interpretations.
    """
    _, mid, _ = _bands(f.probs.size, t)
    return _banded(f, t, mid)


def interpret_other(f: FrequencyDist, t: ThresholdConfig) -> JointDensity:
    """Mid band on the diagonal, top band on the edges."""
    _, _, high = _bands(f.probs.size, t)
    return _banded(f, t, high)


def blend_interpretations(f: FrequencyDist, t: ThresholdConfig, lam: float) -> JointDensity:
    """``lam * rowe + (1 - lam) * other``."""
    if not (0.0 <= lam <= 1.0):
        raise ConfigError(f"blend weight must lie in [0, 1], got {lam}")
    rowe = interpret_rowe(f, t).p
    other = interpret_other(f, t).p
    return JointDensity(lam * rowe + (1.0 - lam) * other)


def _cdf_before(d: FrequencyDist, cut: int) -> float:
    if cut <= 0:
        return 0.0
    cdf = d.cdf()
    return float(cdf[min(cut, cdf.size) - 1])


def pcc(dark: FrequencyDist, bright: FrequencyDist, w_dark: float, cut: int) -> float:
    """Probability of correct classification when counts ``< cut`` are called dark."""
    if not (0.0 <= w_dark <= 1.0):
        raise ConfigError("w_dark must lie in [0, 1]")
    return w_dark * _cdf_before(dark, cut) + (1.0 - w_dark) * (1.0 - _cdf_before(bright, cut))


def optimal_cut(dark: FrequencyDist, bright: FrequencyDist, w_dark: float) -> tuple[int, float]:
    """Cut in ``0..N+1`` maximizing :func:`pcc`; ties go to the smallest cut.

    ``N+1`` is the "everything dark" rule, needed when ``w_dark`` dominates.
    """
    if not (0.0 <= w_dark <= 1.0):
        raise ConfigError("w_dark must lie in [0, 1]")
    size = max(dark.probs.size, bright.probs.size)
    scores = [pcc(dark, bright, w_dark, cut) for cut in range(size + 1)]
    best = int(np.argmax(scores))
    return best, scores[best]


def write_category_report(rows: Iterable[tuple[str, CategoryCounts]], stream: TextIO) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(["label", "n0", "n1", "n2", "q", "q_flipped"])
    for label, c in rows:
        w.writerow([label, repr(c.n0), repr(c.n1), repr(c.n2),
                    repr(parity_correlation(c)), repr(flipped_category_correlation(c))])
