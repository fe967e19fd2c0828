"""Correlation-range reports and the CHSH combination."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence, TextIO

import numpy as np

from .errors import ValidationError
from .histogram import FrequencyDist
from .jointdensity import (
    JointDensity,
    construct_diagonal,
    construct_edge,
    construct_random,
    construct_uniform,
    extremal_asymmetric,
    pearson_correlation,
)


@dataclass(frozen=True)
class SettingPair:
    """Analyzer angles; carried as report metadata only."""

    phi1: float = 3 * math.pi / 8
    phi2: float = 3 * math.pi / 8
    label: str = ""

    def __post_init__(self):
        if not (math.isfinite(self.phi1) and math.isfinite(self.phi2)):
            raise ValidationError("setting angles must be finite")

    @property
    def name(self) -> str:
        return self.label or f"phi1={self.phi1:.6g};phi2={self.phi2:.6g}"


@dataclass(frozen=True)
class CorrelationReport:
    setting: SettingPair
    per_constructor: dict[str, float] = field(default_factory=dict)

    @property
    def min_r(self) -> float:
        return min(self.per_constructor.values())

    @property
    def max_r(self) -> float:
        return max(self.per_constructor.values())

    @property
    def argmin(self) -> str:
        return min(self.per_constructor, key=self.per_constructor.__getitem__)

    @property
    def argmax(self) -> str:
        return max(self.per_constructor, key=self.per_constructor.__getitem__)


def constructor_family(seeds: Sequence[int]) -> dict[str, Callable[[FrequencyDist], JointDensity]]:
    """Named constructors evaluated by :func:`correlation_bounds`, in report order."""
    fam: dict[str, Callable[[FrequencyDist], JointDensity]] = {
        "edge": construct_edge,
        "diagonal": construct_diagonal,
        "uniform": construct_uniform,
    }
    for s in seeds:
        fam[f"random[{s}]"] = lambda f, s=s: construct_random(f, s)
    fam["extremal_uniform"] = lambda f: extremal_asymmetric(construct_uniform(f))
    return fam


def correlation_bounds(f: FrequencyDist, setting: SettingPair, seeds: Sequence[int] = (0,)) -> CorrelationReport:
    """Pearson correlation of every constructor consistent with ``f``."""
    per = {name: pearson_correlation(build(f)) for name, build in constructor_family(seeds).items()}
    return CorrelationReport(setting, per)


def chsh(q11: float, q12: float, q21: float, q22: float) -> float:
    """``q11 + q12 + q21 - q22``; callers choose which setting takes the minus slot."""
    qs = (q11, q12, q21, q22)
    for q in qs:
        if not (-1.0 <= q <= 1.0):
            raise ValidationError(f"correlation {q!r} outside [-1, 1]")
    return q11 + q12 + q21 - q22


def normalized_counts(samples) -> np.ndarray:
    """Scale ``(a, b)`` count pairs by the largest count seen anywhere."""
    arr = np.asarray(samples, dtype=float).reshape(-1, 2)
    if arr.shape[0] == 0:
        raise ValidationError("no samples")
    if np.any(arr < 0):
        raise ValidationError("counts must be non-negative")
    top = arr.max()
    return arr / top if top > 0 else np.zeros_like(arr)


def write_report(report: CorrelationReport, stream: TextIO) -> None:
    """``setting,constructor,r`` rows followed by ``min``/``max`` summary rows."""
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(["setting", "constructor", "r"])
    name = report.setting.name
    for k, r in report.per_constructor.items():
        w.writerow([name, k, repr(r)])
    w.writerow([name, f"min:{report.argmin}", repr(report.min_r)])
    w.writerow([name, f"max:{report.argmax}", repr(report.max_r)])
