import io

import numpy as np
import pytest

from convbound import (
    ExperimentConfig,
    Mode,
    ThresholdConfig,
    antidiagonal_convolve,
    classify_counts,
    normalize,
    simulate,
)
from convbound.errors import ConfigError
from convbound.synth import (
    CHUNK_SIZE,
    FIG2A,
    JointSamples,
    empirical_joint,
    read_samples,
    sample_correlation,
    write_samples,
)

TWO = Mode.TWO_DETECTOR


def test_config_validation():
    with pytest.raises(ConfigError):
        ExperimentConfig(class_weights=(0.5, 0.5, 0.1))
    with pytest.raises(ConfigError):
        ExperimentConfig(lambda_dark=70)
    with pytest.raises(ConfigError):
        ExperimentConfig(n_experiments=0)
    assert ExperimentConfig(mode="two_detector").mode is TWO


def test_degenerate_dark_class():
    h = simulate(ExperimentConfig(n_experiments=1000, lambda_dark=1e-9, class_weights=(1, 0, 0)))
    assert h.bins.tolist() == [1000]


def test_fig2a_categories(fig2a):
    c = classify_counts(fig2a, ThresholdConfig())
    assert c.total == 20000
    assert c.n0 == pytest.approx(2200, rel=0.02)
    assert c.n1 == pytest.approx(15500, rel=0.02)


def test_sum_identity_every_seed():
    for seed in range(5):
        cfg = ExperimentConfig(n_experiments=3000, seed=seed, class_weights=(0.3, 0.3, 0.4))
        hist = simulate(cfg)
        joint = simulate(ExperimentConfig(**{**cfg.__dict__, "mode": TWO}))
        np.testing.assert_array_equal(joint.summed().bins, hist.bins)
        proj = antidiagonal_convolve(empirical_joint(joint))
        np.testing.assert_allclose(proj.probs, normalize(hist).probs, atol=1e-12, rtol=0)


def test_p1_zero_correlation():
    # cov = 0.25 * 63^2, var = 0.25 * 63^2 + mean Poisson variance 32.5
    want = 992.25 / (992.25 + 32.5)
    s = simulate(ExperimentConfig(n_experiments=100_000, class_weights=(0.5, 0, 0.5), mode=TWO))
    assert sample_correlation(s) == pytest.approx(want, abs=0.01)
    assert want == pytest.approx(0.968, abs=1e-3)


def test_mean_within_three_standard_errors():
    cfg = ExperimentConfig(n_experiments=40_000, class_weights=(0.2, 0.5, 0.3), seed=9)
    f = normalize(simulate(cfg))
    n = np.arange(f.probs.size)
    mean = n @ f.probs
    sd = np.sqrt(n**2 @ f.probs - mean**2)
    want = 0.2 * 2 + 0.5 * 65 + 0.3 * 128
    assert abs(mean - want) <= 3 * sd / np.sqrt(cfg.n_experiments)


def test_workers_do_not_change_output():
    cfg = ExperimentConfig(n_experiments=3 * CHUNK_SIZE + 17, seed=4, mode=TWO)
    np.testing.assert_array_equal(simulate(cfg, workers=1).pairs, simulate(cfg, workers=3).pairs)


def test_empirical_joint_examples():
    P = empirical_joint(JointSamples(np.zeros((100, 2), dtype=int)))
    assert P.p.tolist() == [[1.0]]
    P = empirical_joint(JointSamples(np.array([[0, 1]] * 50 + [[1, 0]] * 50)))
    assert P.p.tolist() == [[0, 0.5], [0.5, 0]]


def test_samples_csv_roundtrip():
    s = simulate(ExperimentConfig(n_experiments=50, mode=TWO))
    buf = io.StringIO()
    write_samples(s, buf)
    buf.seek(0)
    np.testing.assert_array_equal(read_samples(buf).pairs, s.pairs)


def test_presets_reproduce_default():
    assert FIG2A == ExperimentConfig()
