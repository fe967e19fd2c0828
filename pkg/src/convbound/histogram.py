"""
Photon-count histograms and their normalized frequency distributions.

A histogram ``h`` holds the raw number of experiments that recorded ``n``
photons; normalizing gives ``f_n = h_n / sum(h)``.
"""

from __future__ import annotations

import csv
import io
import json
import os
from dataclasses import dataclass, field
from typing import Iterable, TextIO

import numpy as np

from .errors import ParseError, ValidationError

#: Global tolerance for "sums to one".
NORM_TOL = 1e-12


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Histogram:
    """Integer counts per photon number, indexed 0..N."""

    bins: np.ndarray
    label: str = ""

    def __post_init__(self):
        b = np.asarray(self.bins)
        if b.ndim != 1 or b.size == 0:
            raise ValidationError("histogram bins must be a non-empty 1-D sequence")
        if not np.issubdtype(b.dtype, np.integer):
            if not np.all(np.equal(np.mod(b, 1), 0)):
                raise ValidationError("histogram bins must be integers")
            b = b.astype(np.int64)
        if np.any(b < 0):
            raise ValidationError("histogram bins must be non-negative")
        if not np.any(b > 0):
            raise ValidationError("histogram is all zero")
        nz = np.flatnonzero(b)
        b = np.array(b[: nz[-1] + 1], dtype=np.int64)
        object.__setattr__(self, "bins", _readonly(b))

    @property
    def N(self) -> int:
        """Highest photon count with a nonzero bin."""
        return self.bins.size - 1

    @property
    def total(self) -> int:
        return int(self.bins.sum())


@dataclass(frozen=True)
class FrequencyDist:
    """Probability mass over counts 0..N, tagged with the experiment total.

    Trailing zero bins are dropped so that ``N`` is always the last count
    carrying mass.
    """

    probs: np.ndarray
    total_experiments: int = 1

    def __post_init__(self):
        p = np.array(self.probs, dtype=float).ravel()
        if p.size == 0:
            raise ValidationError("distribution is empty")
        if not np.all(np.isfinite(p)) or np.any(p < 0):
            raise ValidationError("probabilities must be finite and non-negative")
        s = p.sum()
        if abs(s - 1.0) > NORM_TOL:
            raise ValidationError(f"probabilities sum to {s!r}, not 1")
        nz = np.flatnonzero(p)
        p = p[: nz[-1] + 1]
        if self.total_experiments <= 0:
            raise ValidationError("total_experiments must be positive")
        object.__setattr__(self, "probs", _readonly(p))
        object.__setattr__(self, "total_experiments", int(self.total_experiments))

    @classmethod
    def from_weights(cls, weights, total_experiments: int = 1) -> "FrequencyDist":
        """Normalize arbitrary non-negative weights into a distribution."""
        w = np.asarray(weights, dtype=float)
        if np.any(w < 0) or not np.any(w > 0):
            raise ValidationError("weights must be non-negative with positive sum")
        return cls(w / w.sum(), total_experiments)

    @property
    def N(self) -> int:
        return self.probs.size - 1

    def padded(self, size: int) -> np.ndarray:
        """Probabilities zero-padded (never truncated) to ``size`` entries."""
        out = np.zeros(max(size, self.probs.size))
        out[: self.probs.size] = self.probs
        return out

    def cdf(self) -> np.ndarray:
        return np.cumsum(self.probs)


def normalize(h: Histogram) -> FrequencyDist:
    total = h.total
    return FrequencyDist(h.bins / total, total)


def empirical_stats(f: FrequencyDist) -> tuple[float, float]:
    """Mean and variance of the count distribution."""
    n = np.arange(f.probs.size)
    mean = float(n @ f.probs)
    return mean, float((n * n) @ f.probs - mean * mean)


def _parse_rows(lines: Iterable[str]) -> dict[int, int]:
    rows: dict[int, int] = {}
    seen_data = False
    for lineno, rec in enumerate(csv.reader(lines), start=1):
        if not rec or all(not c.strip() for c in rec):
            continue
        if rec[0].lstrip().startswith("#"):
            continue
        if len(rec) != 2:
            raise ParseError(f"expected 2 columns, got {len(rec)}", lineno)
        a, b = rec[0].strip(), rec[1].strip()
        try:
            count, freq = int(a), int(b)
        except ValueError:
            if not seen_data and not _is_number(a):
                seen_data = True  # header row
                continue
            raise ParseError(f"non-integer value in {rec!r}", lineno) from None
        seen_data = True
        if count < 0 or freq < 0:
            raise ValidationError(f"line {lineno}: negative value in {rec!r}")
        if count in rows:
            raise ValidationError(f"line {lineno}: duplicate count {count}")
        rows[count] = freq
    return rows


def _is_number(s: str) -> bool:
    try:
        float(s)
    except ValueError:
        return False
    return True


def load_histogram(source: TextIO | str, label: str = "", fmt: str = "csv") -> Histogram:
    """Read a histogram from a ``count,frequency`` CSV stream or JSON text.

    ``source`` may be an open text stream or a string. Missing counts are
    zero-filled. A single non-numeric header row is tolerated and ``#`` lines
    are skipped.
    """
    text = source if isinstance(source, str) else source.read()
    if fmt == "json":
        return _load_json(text, label)
    rows = _parse_rows(io.StringIO(text, newline=None))
    if not rows:
        raise ValidationError("empty histogram input")
    bins = np.zeros(max(rows) + 1, dtype=np.int64)
    for k, v in rows.items():
        bins[k] = v
    return Histogram(bins, label)


def _load_json(text: str, label: str) -> Histogram:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno) from None
    if not isinstance(obj, dict) or "bins" not in obj:
        raise ValidationError("JSON histogram must be an object with a 'bins' array")
    bins = obj["bins"]
    if not isinstance(bins, list) or not bins:
        raise ValidationError("empty histogram input")
    if not all(isinstance(b, int) and not isinstance(b, bool) for b in bins):
        raise ValidationError("JSON bins must be integers")
    return Histogram(np.array(bins, dtype=np.int64), obj.get("label", label))


def read_histogram(path: str | os.PathLike) -> Histogram:
    """Load a histogram file, choosing the parser from the extension."""
    path = os.fspath(path)
    fmt = "json" if path.lower().endswith(".json") else "csv"
    stem = os.path.splitext(os.path.basename(path))[0]
    with open(path, encoding="utf-8", newline="") as fh:
        return load_histogram(fh, label=stem, fmt=fmt)


def write_histogram(h: Histogram, stream: TextIO) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(["count", "frequency"])
    for n, v in enumerate(h.bins):
        w.writerow([n, int(v)])


def write_distribution(f: FrequencyDist, stream: TextIO, header=("count", "probability")) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(header)
    for n, p in enumerate(f.probs):
        w.writerow([n, repr(float(p))])
