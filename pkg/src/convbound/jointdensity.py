"""
Joint densities over the photon counts of two emitters.

``P[i, j]`` is the probability that ion 1 contributed ``i`` photons and ion 2
contributed ``j``. A single summing detector only sees the anti-diagonal sums
of ``P``, so many different matrices (with very different correlations) are
consistent with the same measured histogram. The constructors here build the
named members of that family.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import TextIO

import numpy as np

from .errors import DegenerateDistributionError, ParseError, ValidationError
from .histogram import NORM_TOL, FrequencyDist

#: Bit generator used for the random constructor; fixed for portability.
RANDOM_BITGEN = "PCG64"


@dataclass(frozen=True)
class JointDensity:
    """Square non-negative matrix summing to one. Rows index ion 1."""

    p: np.ndarray

    def __post_init__(self):
        p = np.array(self.p, dtype=float)
        if p.ndim != 2 or p.shape[0] != p.shape[1] or p.size == 0:
            raise ValidationError(f"joint density must be a non-empty square matrix, got shape {p.shape}")
        if not np.all(np.isfinite(p)) or np.any(p < 0):
            raise ValidationError("joint density entries must be finite and non-negative")
        s = p.sum()
        if abs(s - 1.0) > NORM_TOL:
            raise ValidationError(f"joint density sums to {s!r}, not 1")
        p.setflags(write=False)
        object.__setattr__(self, "p", p)

    @property
    def N(self) -> int:
        return self.p.shape[0] - 1


@dataclass(frozen=True)
class SymAntisymPair:
    s: np.ndarray
    a: np.ndarray

    def __post_init__(self):
        if not np.array_equal(self.s, self.s.T):
            raise ValidationError("s is not symmetric")
        if not np.array_equal(self.a, -self.a.T):
            raise ValidationError("a is not antisymmetric")
        if np.any(np.abs(self.a) > self.s + NORM_TOL):
            raise ValidationError("-s <= a <= s violated")


def _square(size: int) -> np.ndarray:
    return np.zeros((size, size))


def _sum_index(size: int) -> np.ndarray:
    i = np.arange(size)
    return i[:, None] + i[None, :]


def antidiagonal_sums(p: np.ndarray) -> np.ndarray:
    """Sums over cells with ``i + j == n`` for n in 0..2N (untrimmed)."""
    size = p.shape[0]
    return np.bincount(_sum_index(size).ravel(), weights=p.ravel(), minlength=2 * size - 1)


def antidiagonal_convolve(P: JointDensity) -> FrequencyDist:
    """Distribution of the summed count ``A + B``."""
    return FrequencyDist(antidiagonal_sums(P.p))


def marginal_ion1(P: JointDensity) -> FrequencyDist:
    return FrequencyDist(P.p.sum(axis=1))


def marginal_ion2(P: JointDensity) -> FrequencyDist:
    return FrequencyDist(P.p.sum(axis=0))


# Array-level placements. Each takes a non-negative weight vector ``w``
# indexed by total count and returns a ``size x size`` matrix whose
# anti-diagonal sums equal ``w``. Used directly by the banded
# interpretations in ``discriminator``.

def edge_placement(w: np.ndarray, size: int) -> np.ndarray:
    p = _square(size)
    p[0, 0] = w[0]
    half = 0.5 * w[1:]
    k = np.arange(1, w.size)
    p[0, k] += half
    p[k, 0] += half
    return p


def diagonal_placement(w: np.ndarray, size: int) -> np.ndarray:
    p = _square(size)
    n = np.arange(w.size)
    even, odd = n[n % 2 == 0], n[n % 2 == 1]
    p[even // 2, even // 2] = w[even]
    lo, hi = (odd - 1) // 2, (odd + 1) // 2
    p[lo, hi] = 0.5 * w[odd]
    p[hi, lo] = 0.5 * w[odd]
    return p


def uniform_placement(w: np.ndarray, size: int) -> np.ndarray:
    n = _sum_index(size)
    wp = np.zeros(2 * size - 1)
    wp[: w.size] = w
    return wp[n] / (1.0 + n)


def weighted_placement(w: np.ndarray, m: np.ndarray) -> np.ndarray:
    """Spread ``w[n]`` over anti-diagonal ``n`` proportionally to ``m``."""
    size = m.shape[0]
    n = _sum_index(size)
    msum = antidiagonal_sums(m)
    wp = np.zeros(2 * size - 1)
    wp[: w.size] = w
    out = np.zeros_like(m)
    ok = msum[n] > 0
    out[ok] = wp[n][ok] * m[ok] / msum[n][ok]
    # All-zero anti-diagonal of m: fall back to spreading uniformly.
    dead = (msum[: w.size] <= 0) & (w > 0)
    if np.any(dead):
        out += uniform_placement(np.where(dead, w, 0.0), size)
    return out


def construct_edge(f: FrequencyDist) -> JointDensity:
    """Negatively correlated form: one ion carries every photon."""
    return JointDensity(edge_placement(f.probs, f.N + 1))


def construct_diagonal(f: FrequencyDist) -> JointDensity:
    """Positively correlated form: both ions share the count as evenly as possible."""
    return JointDensity(diagonal_placement(f.probs, f.N + 1))


def construct_uniform(f: FrequencyDist) -> JointDensity:
    """Symmetric form with each anti-diagonal held constant."""
    return JointDensity(uniform_placement(f.probs, f.N + 1))


def construct_random(f: FrequencyDist, seed: int, m: np.ndarray | None = None) -> JointDensity:
    """Anti-diagonals weighted by a seeded uniform(0, 1) matrix.

    ``m`` overrides the random weights (must be ``(N+1) x (N+1)``, non-negative).
    """
    size = f.N + 1
    if m is None:
        rng = np.random.Generator(np.random.PCG64(seed))
        m = rng.random((size, size))
    else:
        m = np.asarray(m, dtype=float)
        if m.shape != (size, size) or np.any(m < 0):
            raise ValidationError("weight matrix must be non-negative with shape (N+1, N+1)")
    return JointDensity(weighted_placement(f.probs, m))


def construct_independent(g: FrequencyDist, h: FrequencyDist) -> JointDensity:
    size = max(g.probs.size, h.probs.size)
    return JointDensity(np.outer(g.padded(size), h.padded(size)))


def sym_antisym_split(P: JointDensity) -> SymAntisymPair:
    return SymAntisymPair(0.5 * (P.p + P.p.T), 0.5 * (P.p - P.p.T))


def extremal_asymmetric(P: JointDensity) -> JointDensity:
    """Push all off-diagonal mass of the symmetrized ``P`` below the diagonal.

    This maximizes the difference between the two marginals while leaving
    every anti-diagonal sum unchanged.
    """
    s = sym_antisym_split(P).s
    out = np.tril(2.0 * s, k=-1)
    out[np.diag_indices_from(out)] = np.diag(s)
    return JointDensity(out)


def _centered(p: np.ndarray):
    k = np.arange(p.shape[0], dtype=float)
    pa, pb = p.sum(axis=1), p.sum(axis=0)
    da, db = k - k @ pa, k - k @ pb
    return da, db, (da * da) @ pa, (db * db) @ pb


def pearson_correlation(P: JointDensity) -> float:
    """Product-moment correlation of the two ions' photon counts."""
    da, db, var_a, var_b = _centered(P.p)
    if not (var_a > 0 and var_b > 0):
        raise DegenerateDistributionError("a marginal has zero variance; correlation undefined")
    # standardize first and weight the outer product last: every term stays
    # representable even when a marginal carries only ~1e-300 of mass off its mode
    z = np.outer(da / np.sqrt(var_a), db / np.sqrt(var_b))
    with np.errstate(over="ignore", invalid="ignore"):
        r = float((P.p * z).sum())
    if not np.isfinite(r):
        raise DegenerateDistributionError("correlation not representable for this density")
    return float(np.clip(r, -1.0, 1.0))


def marginal_difference(P: JointDensity) -> float:
    """L1 distance between the ion-1 and ion-2 marginals."""
    return float(np.abs(P.p.sum(axis=1) - P.p.sum(axis=0)).sum())


def write_matrix_csv(P: JointDensity, stream: TextIO) -> None:
    """One row per ion-1 count; header names the ion-2 columns."""
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(["i\\j", *range(P.N + 1)])
    for i, row in enumerate(P.p):
        w.writerow([i, *(repr(float(x)) for x in row)])


def write_triplets_csv(P: JointDensity, stream: TextIO) -> None:
    """Nonzero cells as ``i,j,p`` rows."""
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(["i", "j", "p"])
    for i, j in zip(*np.nonzero(P.p)):
        w.writerow([int(i), int(j), repr(float(P.p[i, j]))])


def read_matrix_csv(stream: TextIO) -> np.ndarray:
    rows = [r for r in csv.reader(stream) if r]
    if len(rows) < 2:
        raise ParseError("matrix CSV has no data rows")
    try:
        return np.array([[float(x) for x in r[1:]] for r in rows[1:]])
    except ValueError as exc:
        raise ParseError(str(exc)) from None


def read_triplets_csv(stream: TextIO) -> np.ndarray:
    rows = [r for r in csv.reader(stream) if r][1:]
    try:
        trip = [(int(i), int(j), float(v)) for i, j, v in rows]
    except ValueError as exc:
        raise ParseError(str(exc)) from None
    size = 1 + max(max(i, j) for i, j, _ in trip) if trip else 1
    m = np.zeros((size, size))
    for i, j, v in trip:
        m[i, j] = v
    return m
