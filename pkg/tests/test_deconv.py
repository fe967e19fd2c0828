import json

import numpy as np
import pytest
from scipy.stats import poisson

from convbound import (
    DeconvConfig,
    FrequencyDist,
    Metric,
    antidiagonal_convolve,
    construct_independent,
    convolve_pair,
    deconvolve,
    fitness,
    pearson_correlation,
    two_lobe_split,
)
from convbound.deconv import load_config
from convbound.errors import ConfigError

import oracles

F = FrequencyDist
QUICK = DeconvConfig(population_size=60, generations=300)


def test_convolve_pair_examples():
    h = F.from_weights([1, 2, 3])
    np.testing.assert_array_equal(convolve_pair(F([1.0]), h).probs, h.probs)
    np.testing.assert_allclose(convolve_pair(F([0.5, 0.5]), F([0.5, 0.5])).probs, [0.25, 0.5, 0.25])
    np.testing.assert_allclose(convolve_pair(F([0.9, 0.1]), F([0.2, 0.8])).probs, [0.18, 0.74, 0.08], atol=1e-15)


def test_convolve_pair_matches_loop_oracle_and_joint_view():
    rng = np.random.default_rng(1)
    for _ in range(10):
        g = F.from_weights(rng.random(rng.integers(1, 30)))
        h = F.from_weights(rng.random(rng.integers(1, 30)))
        want = oracles.convolve(g.probs.tolist(), h.probs.tolist())
        got = convolve_pair(g, h)
        np.testing.assert_allclose(got.padded(len(want)), want, atol=1e-15)
        np.testing.assert_allclose(
            antidiagonal_convolve(construct_independent(g, h)).padded(len(want)), want, atol=1e-15)


@pytest.mark.parametrize("metric,want", [("l1", 0.4), ("l2", np.sqrt(0.08)), ("kl", None)])
def test_fitness_metrics(metric, want):
    m, t = np.array([0.6, 0.4]), np.array([0.8, 0.2])
    got = fitness(m, t, metric)
    if want is None:
        want = 0.8 * np.log(0.8 / 0.6) + 0.2 * np.log(0.2 / 0.4)
        assert got == pytest.approx(want, abs=1e-9)
    else:
        assert got == pytest.approx(want, abs=1e-15)
    assert fitness(t, t, metric) == pytest.approx(0, abs=1e-9)


def test_config_validation(tmp_path):
    for bad in (dict(population_size=3), dict(generations=0), dict(mutation_scale=0),
                dict(crossover_rate=1.5), dict(fitness_metric="l3"), dict(workers=0)):
        with pytest.raises(ConfigError):
            DeconvConfig(**bad)
    assert DeconvConfig(fitness_metric="KL").fitness_metric is Metric.KL
    assert DeconvConfig() == DeconvConfig(200, 5000, 0.1, 0.7, 0, Metric.L1)


def test_load_config(tmp_path):
    p = tmp_path / "ga.toml"
    p.write_text('population_size = 50\nfitness_metric = "l2"\n')
    cfg = load_config(p, seed=3)
    assert (cfg.population_size, cfg.fitness_metric, cfg.seed) == (50, Metric.L2, 3)
    j = tmp_path / "ga.json"
    j.write_text(json.dumps({"generations": 10}))
    assert load_config(j).generations == 10
    j.write_text(json.dumps({"generation": 10}))
    with pytest.raises(ConfigError, match="unknown"):
        load_config(j)


def test_needs_two_bins():
    with pytest.raises(ConfigError):
        deconvolve(F([1.0]), QUICK)


def test_binomial_target():
    f = F([0.25, 0.5, 0.25])
    res = deconvolve(f)
    regen = convolve_pair(res.pair.g, res.pair.h)
    assert res.residual <= 1e-3
    assert np.abs(regen.padded(3) - f.padded(regen.probs.size)).sum() <= 1e-3


def test_point_mass_target():
    # delta_1 * delta_1 and delta_0 * delta_2 both factor delta_2; either is acceptable
    res = deconvolve(F([0, 0, 1]))
    assert res.residual <= 1e-6
    g, h = res.pair.g.probs, res.pair.h.probs
    assert g.max() > 1 - 1e-6 and h.max() > 1 - 1e-6
    assert np.argmax(g) + np.argmax(h) == 2


def test_trace_monotone_and_residual_consistent():
    f = F.from_weights(poisson.pmf(np.arange(40), 6) + poisson.pmf(np.arange(40), 20))
    res = deconvolve(f, QUICK)
    best = [b for _, b in res.trace]
    assert [g for g, _ in res.trace] == list(range(QUICK.generations))
    assert all(b2 <= b1 for b1, b2 in zip(best, best[1:]))
    assert res.residual == fitness(convolve_pair(res.pair.g, res.pair.h).probs, f.probs)
    assert res.residual == pytest.approx(best[-1], abs=1e-5)


def test_lower_mean_first():
    f = F.from_weights(poisson.pmf(np.arange(60), 3) * 0.5 + poisson.pmf(np.arange(60), 30))
    res = deconvolve(f, QUICK)
    mean = lambda d: np.arange(d.probs.size) @ d.probs
    assert mean(res.pair.g) <= mean(res.pair.h)


def test_deterministic_and_thread_independent():
    f = F.from_weights(poisson.pmf(np.arange(50), 8) + 0.3 * poisson.pmf(np.arange(50), 30))
    a = deconvolve(f, QUICK)
    b = deconvolve(f, QUICK)
    c = deconvolve(f, DeconvConfig(population_size=60, generations=300, workers=3))
    for other in (b, c):
        assert a.trace == other.trace
        np.testing.assert_array_equal(a.pair.g.probs, other.pair.g.probs)
        np.testing.assert_array_equal(a.pair.h.probs, other.pair.h.probs)
    d = deconvolve(f, DeconvConfig(population_size=60, generations=300, seed=1))
    assert d.trace != a.trace


def test_independence_certificate():
    f = F.from_weights(poisson.pmf(np.arange(50), 5) + poisson.pmf(np.arange(50), 25))
    res = deconvolve(f, QUICK)
    assert abs(pearson_correlation(construct_independent(res.pair.g, res.pair.h))) <= 1e-9


def test_two_lobe_split():
    k = np.arange(120)
    d = F.from_weights(0.8 * poisson.pmf(k, 1) + 0.2 * poisson.pmf(k, 64))
    cut, w, lo, hi = two_lobe_split(d)
    assert 5 < cut < 40
    assert w == pytest.approx(0.8, abs=1e-4)  # bright tail leaks below the cut
    assert lo == pytest.approx(1, abs=1e-3) and hi == pytest.approx(64, abs=1e-3)
