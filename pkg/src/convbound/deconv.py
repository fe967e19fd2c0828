"""
Independent-ion deconvolution of a summed-count distribution.

Given ``f`` we search for two distributions ``g`` and ``h`` whose ordinary
convolution reproduces it, using a seeded genetic algorithm over pairs of
simplex vectors. The factorization is not unique; the point is that
independent (zero-correlation) ions suffice to regenerate the data.
"""

from __future__ import annotations

import csv
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields
from enum import Enum
from typing import TextIO

import numpy as np
import scipy.fft
from scipy.special import gammaln

from .errors import ConfigError
from .histogram import FrequencyDist

# floor applied to every gene so multiplicative mutation can regrow empty bins
_GENE_FLOOR = 1e-6
_KL_EPS = 1e-12


class Metric(str, Enum):
    L1 = "l1"
    L2 = "l2"
    KL = "kl"


@dataclass(frozen=True)
class DeconvConfig:
    population_size: int = 200
    generations: int = 5000
    mutation_scale: float = 0.1
    crossover_rate: float = 0.7
    seed: int = 0
    fitness_metric: Metric = Metric.L1
    #: upper end of the per-child fraction of bins perturbed
    mutation_fraction: float = 0.3
    #: threads used for fitness evaluation; results do not depend on it
    workers: int = 1

    def __post_init__(self):
        m = self.fitness_metric
        try:
            object.__setattr__(self, "fitness_metric", m if isinstance(m, Metric) else Metric(str(m).lower()))
        except ValueError:
            raise ConfigError(f"unknown fitness metric {self.fitness_metric!r}") from None
        if self.population_size < 4:
            raise ConfigError("population_size must be >= 4")
        if self.generations < 1:
            raise ConfigError("generations must be >= 1")
        if not self.mutation_scale > 0:
            raise ConfigError("mutation_scale must be positive")
        if not 0.0 <= self.crossover_rate <= 1.0:
            raise ConfigError("crossover_rate must lie in [0, 1]")
        if not 0.0 < self.mutation_fraction <= 1.0:
            raise ConfigError("mutation_fraction must lie in (0, 1]")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")


def load_config(path: str | os.PathLike, **overrides) -> DeconvConfig:
    """Read a :class:`DeconvConfig` from a JSON or TOML key-value file."""
    path = os.fspath(path)
    with open(path, "rb") as fh:
        raw = fh.read()
    try:
        if path.lower().endswith(".toml"):
            try:
                import tomllib
            except ModuleNotFoundError:  # Python < 3.11
                import tomli as tomllib
            data = tomllib.loads(raw.decode("utf-8"))
        else:
            data = json.loads(raw)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    known = {f.name for f in fields(DeconvConfig)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    data.update({k: v for k, v in overrides.items() if v is not None})
    return DeconvConfig(**data)


@dataclass(frozen=True)
class IonPair:
    g: FrequencyDist
    h: FrequencyDist


@dataclass(frozen=True)
class DeconvResult:
    pair: IonPair
    residual: float
    trace: list[tuple[int, float]] = field(default_factory=list)


def convolve_pair(g: FrequencyDist, h: FrequencyDist) -> FrequencyDist:
    return FrequencyDist(np.convolve(g.probs, h.probs))


def fitness(model: np.ndarray, target: np.ndarray, metric: Metric | str = Metric.L1) -> float:
    """Discrepancy between two probability vectors (zero-padded to equal length)."""
    size = max(model.size, target.size)
    m = np.zeros(size)
    t = np.zeros(size)
    m[: model.size] = model
    t[: target.size] = target
    return float(_batch_fitness(m[None, :], t, Metric(metric))[0])


def _batch_fitness(models: np.ndarray, target: np.ndarray, metric: Metric) -> np.ndarray:
    diff = models - target
    if metric is Metric.L1:
        return np.abs(diff).sum(axis=1)
    if metric is Metric.L2:
        return np.sqrt((diff * diff).sum(axis=1))
    # KL(target || model); eps keeps it finite where the model has no mass
    mask = target > 0
    t = target[mask]
    return (t * (np.log(t) - np.log(np.maximum(models[:, mask], 0.0) + _KL_EPS))).sum(axis=1)


class _Evaluator:
    """Batched FFT convolution + fitness, optionally split across threads.

    Genomes are ``(pop, 2, L)`` arrays holding ``g`` and ``h`` per row.
    """

    def __init__(self, target: np.ndarray, length: int, metric: Metric, workers: int):
        self.out = 2 * length - 1
        self.nfft = 1 << (self.out - 1).bit_length()
        self.target = np.zeros(self.out, dtype=np.float32)
        self.target[: target.size] = target
        self.metric = metric
        self.workers = workers

    def _eval(self, x: np.ndarray) -> np.ndarray:
        spec = scipy.fft.rfft(x, self.nfft)
        conv = scipy.fft.irfft(spec[:, 0] * spec[:, 1], self.nfft)
        return _batch_fitness(conv[:, : self.out], self.target, self.metric).astype(float)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        if self.workers == 1:
            return self._eval(x)
        bounds = np.linspace(0, x.shape[0], self.workers + 1).astype(int)
        parts = [x[a:b] for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
        with ThreadPoolExecutor(max_workers=self.workers) as ex:
            return np.concatenate(list(ex.map(self._eval, parts)))


def _normalize(x: np.ndarray) -> np.ndarray:
    return x / x.sum(axis=-1, keepdims=True)


def _poisson_rows(means: np.ndarray, length: int) -> np.ndarray:
    k = np.arange(length)
    lm = np.log(means)[:, None]
    return np.exp(k * lm - means[:, None] - gammaln(k + 1))


def _peaks(target: np.ndarray) -> np.ndarray:
    """Local maxima of a lightly smoothed copy of ``target`` (at least 1% of the top)."""
    kernel = np.exp(-0.5 * (np.arange(-6, 7) / 2.0) ** 2)
    sm = np.convolve(target, kernel / kernel.sum(), mode="same")
    padded = np.concatenate([[-1.0], sm, [-1.0]])
    is_peak = (sm >= padded[:-2]) & (sm > padded[2:]) & (sm >= 0.01 * sm.max())
    return np.flatnonzero(is_peak).astype(float)


def _initial_population(rng: np.random.Generator, pop: int, target: np.ndarray) -> np.ndarray:
    """Two-lobe Poisson mixtures for the first half, uniform noise for the rest.

    Lobe means come either from the target's peaks or from counts drawn from
    the target, whole or halved (one ion carrying everything or both sharing
    it), then jittered.
    """
    length = target.size
    n_lobe = pop // 2
    peaks = _peaks(target)

    def lobes():
        shape = (2, n_lobe)
        drawn = rng.choice(length, size=shape, p=target).astype(float)
        if peaks.size:
            drawn = np.where(rng.random(shape) < 0.5, rng.choice(peaks, size=shape), drawn)
        share = rng.choice([0.5, 1.0], size=shape)
        means = np.clip(drawn * share + rng.uniform(-2, 2, shape), 0.05, None)
        w = rng.random(n_lobe)[:, None]
        return w * _poisson_rows(means[0], length) + (1 - w) * _poisson_rows(means[1], length)

    g = np.vstack([lobes(), rng.random((pop - n_lobe, length))])
    h = np.vstack([lobes(), rng.random((pop - n_lobe, length))])
    x = np.stack([g, h], axis=1) + _GENE_FLOOR
    return _normalize(x.astype(np.float32))


def _canonical(x: np.ndarray) -> np.ndarray:
    """Swap g and h where needed so g has the lower mean (crossover then lines up)."""
    k = np.arange(x.shape[-1], dtype=x.dtype)
    m = x @ k
    flip = m[:, 0] > m[:, 1]
    x[flip] = x[flip][:, ::-1]
    return x


def _tournament(rng: np.random.Generator, fit: np.ndarray, n: int, size: int = 3) -> np.ndarray:
    cand = rng.integers(0, fit.size, (n, size))
    return cand[np.arange(n), np.argmin(fit[cand], axis=1)]


def _crossover(rng, a: np.ndarray, b: np.ndarray, rate: float) -> np.ndarray:
    """Single-point crossover, drawn independently for the g and h vectors."""
    n, two, length = a.shape
    do = rng.random((n, two)) < rate
    point = rng.integers(1, max(length, 2), (n, two))
    take_b = (np.arange(length) >= point[..., None]) & do[..., None]
    return np.where(take_b, b, a)


def _mutate(rng, x: np.ndarray, scale: float, fraction: float) -> np.ndarray:
    """Log-normal multiplicative noise on a random subset of bins.

    Step size and subset size vary per child (log-uniform over
    ``scale * [0.03, 3]`` and ``[1/L, fraction]``) so the population keeps both
    coarse and fine moves.
    """
    n, two, length = x.shape
    step = (scale * 10.0 ** rng.uniform(-1.5, 0.5, (n, 1, 1))).astype(np.float32)
    lo = min(1.0 / length, fraction)
    rate = np.exp(rng.uniform(np.log(lo), np.log(fraction), (n, 1, 1)))
    idx = np.flatnonzero(rng.random(x.shape) < rate)
    child = idx // (two * length)
    flat = x.reshape(-1)
    genes = np.maximum(flat[idx], np.float32(_GENE_FLOOR))
    flat[idx] = genes * np.exp(step.ravel()[child] * rng.standard_normal(idx.size, dtype=np.float32))
    return _normalize(x)


def deconvolve(f: FrequencyDist, cfg: DeconvConfig = DeconvConfig()) -> DeconvResult:
    """Search for independent ``g``, ``h`` with ``g * h`` close to ``f``.

    Elitist GA: each generation keeps the best member and refills the rest by
    tournament selection (size 3), single-point crossover on each vector and
    log-normal multiplicative mutation. Members are stored with the
    lower-mean vector first so crossover combines like with like. The traced
    best fitness never rises.

    The population is held in single precision; the returned residual is
    recomputed in double precision from the winning pair.
    """
    if f.N < 1:
        raise ConfigError("deconvolution needs a distribution with N >= 1")
    length = f.N + 1
    pop = cfg.population_size
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    X = _canonical(_initial_population(rng, pop, f.probs))
    evaluate = _Evaluator(f.probs, length, cfg.fitness_metric, cfg.workers)
    fit = evaluate(X)
    trace: list[tuple[int, float]] = []
    for gen in range(cfg.generations):
        best = int(np.argmin(fit))
        trace.append((gen, float(fit[best])))
        if gen == cfg.generations - 1:
            break
        pa = _tournament(rng, fit, pop - 1)
        pb = _tournament(rng, fit, pop - 1)
        kids = _crossover(rng, X[pa], X[pb], cfg.crossover_rate)
        kids = _canonical(_mutate(rng, kids, cfg.mutation_scale, cfg.mutation_fraction))
        X = np.concatenate([X[best:best + 1], kids])
        fit = np.concatenate([fit[best:best + 1], evaluate(kids)])
    best = int(np.argmin(fit))
    g = FrequencyDist.from_weights(X[best, 0].astype(float))
    h = FrequencyDist.from_weights(X[best, 1].astype(float))
    if np.arange(g.probs.size) @ g.probs > np.arange(h.probs.size) @ h.probs:
        g, h = h, g
    residual = fitness(convolve_pair(g, h).probs, f.probs, cfg.fitness_metric)
    return DeconvResult(IonPair(g, h), residual, trace)


def two_lobe_split(d: FrequencyDist) -> tuple[int, float, float, float]:
    """Best two-class split of a count distribution (maximal between-class variance).

    Returns ``(cut, low_weight, low_mean, high_mean)``; counts ``< cut`` form the
    low lobe.
    """
    k = np.arange(d.probs.size, dtype=float)
    w = np.cumsum(d.probs)[:-1]
    mu = np.cumsum(k * d.probs)[:-1]
    total_mu = float(k @ d.probs)
    with np.errstate(divide="ignore", invalid="ignore"):
        between = (total_mu * w - mu) ** 2 / (w * (1 - w))
    between[~np.isfinite(between)] = -1.0
    if between.size == 0:
        return 1, 1.0, 0.0, 0.0
    i = int(np.argmax(between))
    w0 = float(w[i])
    low = float(mu[i] / w0) if w0 > 0 else 0.0
    high = float((total_mu - mu[i]) / (1 - w0)) if w0 < 1 else low
    return i + 1, w0, low, high


def write_ion_csv(d: FrequencyDist, stream: TextIO) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(["count", "probability"])
    for n, p in enumerate(d.probs):
        w.writerow([n, repr(float(p))])


def write_trace_csv(trace, stream: TextIO) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(["generation", "best_fitness"])
    for gen, fit in trace:
        w.writerow([gen, repr(fit)])
