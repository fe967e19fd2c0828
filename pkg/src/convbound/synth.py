"""
Synthetic two-ion detection data drawn from a Poisson mixture.

Each experiment picks a class (both dark, one bright, both bright), assigns a
Poisson rate to each ion and draws the two photon counts independently. In
``single_pmt`` mode only the sum is kept; ``two_detector`` mode keeps the pair.

Seed derivation: experiments are processed in consecutive chunks of
``CHUNK_SIZE``; chunk ``k`` draws from ``PCG64`` seeded with the ``k``-th child
of ``numpy.random.SeedSequence(seed)``. Output therefore does not depend on how
many workers process the chunks.
"""

from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import TextIO

import numpy as np

from .errors import ConfigError, ParseError, ValidationError
from .histogram import Histogram
from .jointdensity import JointDensity

CHUNK_SIZE = 8192


class Mode(str, Enum):
    SINGLE_PMT = "single_pmt"
    TWO_DETECTOR = "two_detector"


@dataclass(frozen=True)
class ExperimentConfig:
    n_experiments: int = 20000
    lambda_dark: float = 1.0
    lambda_bright: float = 64.0
    class_weights: tuple[float, float, float] = (0.11, 0.775, 0.115)
    seed: int = 0
    mode: Mode = Mode.SINGLE_PMT

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        object.__setattr__(self, "class_weights", tuple(float(w) for w in self.class_weights))
        if self.n_experiments <= 0:
            raise ConfigError("n_experiments must be positive")
        if not (0 < self.lambda_dark < self.lambda_bright):
            raise ConfigError("need 0 < lambda_dark < lambda_bright")
        w = self.class_weights
        if len(w) != 3 or min(w) < 0 or abs(sum(w) - 1.0) > 1e-12:
            raise ConfigError(f"class weights must be 3 non-negative reals summing to 1, got {w}")


# Class weights are the published category counts divided by 20,000.
FIG2A = ExperimentConfig(class_weights=(0.11, 0.775, 0.115))
FIG2B = ExperimentConfig(class_weights=(0.385, 0.22, 0.395))
PRESETS = {"fig2a": FIG2A, "fig2b": FIG2B}


@dataclass(frozen=True)
class JointSamples:
    """Per-experiment photon counts ``(a, b)`` for ion 1 and ion 2."""

    pairs: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.pairs)
        if a.ndim != 2 or a.shape[1] != 2 or a.shape[0] == 0:
            raise ValidationError("joint samples must be a non-empty (n, 2) table")
        if np.any(a < 0):
            raise ValidationError("photon counts must be non-negative")
        a = a.astype(np.int64)
        a.setflags(write=False)
        object.__setattr__(self, "pairs", a)

    def summed(self, label: str = "") -> Histogram:
        return Histogram(np.bincount(self.pairs.sum(axis=1)), label)


def _draw_chunk(cfg: ExperimentConfig, seq: np.random.SeedSequence, n: int) -> np.ndarray:
    rng = np.random.Generator(np.random.PCG64(seq))
    p0, p1, _ = cfg.class_weights
    u = rng.random(n)
    cls = np.where(u < p0, 0, np.where(u < p0 + p1, 1, 2))
    ion1_bright = rng.random(n) < 0.5
    bright_a = (cls == 2) | ((cls == 1) & ion1_bright)
    bright_b = (cls == 2) | ((cls == 1) & ~ion1_bright)
    rate_a = np.where(bright_a, cfg.lambda_bright, cfg.lambda_dark)
    rate_b = np.where(bright_b, cfg.lambda_bright, cfg.lambda_dark)
    return np.column_stack([rng.poisson(rate_a), rng.poisson(rate_b)])


def draw_pairs(cfg: ExperimentConfig, workers: int = 1) -> np.ndarray:
    sizes = [CHUNK_SIZE] * (cfg.n_experiments // CHUNK_SIZE)
    if cfg.n_experiments % CHUNK_SIZE:
        sizes.append(cfg.n_experiments % CHUNK_SIZE)
    seqs = np.random.SeedSequence(cfg.seed).spawn(len(sizes))
    jobs = list(zip(seqs, sizes))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            chunks = list(ex.map(lambda j: _draw_chunk(cfg, *j), jobs))
    else:
        chunks = [_draw_chunk(cfg, s, n) for s, n in jobs]
    return np.concatenate(chunks)


def simulate(cfg: ExperimentConfig, workers: int = 1, label: str = "") -> Histogram | JointSamples:
    pairs = draw_pairs(cfg, workers)
    if cfg.mode is Mode.TWO_DETECTOR:
        return JointSamples(pairs)
    return Histogram(np.bincount(pairs.sum(axis=1)), label)


def empirical_joint(samples: JointSamples) -> JointDensity:
    """Normalized 2-D count matrix over the observed range."""
    size = int(samples.pairs.max()) + 1
    counts = np.zeros((size, size))
    np.add.at(counts, (samples.pairs[:, 0], samples.pairs[:, 1]), 1.0)
    return JointDensity(counts / samples.pairs.shape[0])


def sample_correlation(samples: JointSamples) -> float:
    a, b = samples.pairs.T.astype(float)
    return float(np.corrcoef(a, b)[0, 1])


def write_samples(samples: JointSamples, stream: TextIO) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(["a", "b"])
    w.writerows(samples.pairs.tolist())


def read_samples(stream: TextIO) -> JointSamples:
    rows = [r for r in csv.reader(stream) if r and not r[0].startswith("#")]
    if rows and not rows[0][0].strip().lstrip("-").isdigit():
        rows = rows[1:]
    try:
        return JointSamples(np.array([[int(a), int(b)] for a, b in rows], dtype=np.int64).reshape(-1, 2))
    except ValueError as exc:
        raise ParseError(str(exc)) from None
