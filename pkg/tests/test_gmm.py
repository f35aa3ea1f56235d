import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rfspectrum import gmm
from rfspectrum.config import ConfigError, parse_mixture

from conftest import random_model


def test_zero_covariance_gives_exact_means():
    p, K = 6, 2
    means = np.arange(p * K, dtype=float).reshape(p, K)
    model = gmm.MixtureModel(means, np.zeros((K, p, p)), np.array([0.5, 0.5]))
    data = gmm.sample_mixture(model, 10, seed=3)
    expected = means[:, data.labels - 1] / np.sqrt(p)
    np.testing.assert_array_equal(data.X, expected)
    np.testing.assert_array_equal(data.phi, 0.0)


def test_two_class_mean_norm_matches_tau(base_model, base_data):
    tau_hat = gmm.estimate_tau(base_data.X)
    assert abs(np.mean((base_data.X ** 2).sum(axis=0)) - tau_hat) < 0.1
    stats = gmm.class_statistics(base_model, base_data.class_sizes)
    assert abs(tau_hat - stats.tau) < 0.1


def test_sample_covariance_law_of_large_numbers():
    p = 4
    model = gmm.MixtureModel(np.zeros((p, 1)), np.eye(p)[None], np.array([1.0]))
    data = gmm.sample_mixture(model, 100_000, seed=7)
    Z = np.sqrt(p) * data.X
    cov = Z @ Z.T / Z.shape[1]
    assert np.abs(cov - np.eye(p)).max() < 0.05


def test_non_psd_covariance_names_class():
    p = 3
    bad = -np.eye(p)
    model = gmm.MixtureModel(np.zeros((p, 2)), np.stack([np.eye(p), bad]), np.array([0.5, 0.5]))
    with pytest.raises(ValueError, match="class 2"):
        gmm.sample_mixture(model, 4, 0)


def test_slightly_negative_eigenvalue_is_clipped():
    C = np.diag([1.0, 0.0, -1e-13])
    root = gmm.psd_factor(C)
    np.testing.assert_allclose(root @ root, np.diag([1.0, 0.0, 0.0]), atol=1e-12)


def test_sampling_is_bit_reproducible(base_model):
    a = gmm.sample_mixture(base_model, 32, 11)
    b = gmm.sample_mixture(base_model, 32, 11)
    assert a.X.tobytes() == b.X.tobytes()
    c = gmm.sample_mixture(base_model, 32, 12)
    assert a.X.tobytes() != c.X.tobytes()


def test_identity_covariances_statistics():
    p, K = 16, 3
    model = gmm.MixtureModel(np.ones((p, K)), np.stack([np.eye(p)] * K), np.full(K, 1 / 3))
    stats = gmm.class_statistics(model, [4, 4, 5])
    np.testing.assert_allclose(stats.t, 0.0, atol=1e-14)
    np.testing.assert_allclose(stats.S, np.ones((K, K)))
    assert stats.tau == pytest.approx(1.0)


def test_spread_covariance_tau_by_trace():
    p = 512
    model = gmm.two_class_model(p, 0.0, 15.0)
    stats = gmm.class_statistics(model, [128, 128])
    assert stats.tau == pytest.approx(1 + 15 / (2 * np.sqrt(p)), rel=1e-14)


def test_single_class_statistics(rng):
    model = random_model(rng, 8, 1)
    stats = gmm.class_statistics(model, [10])
    C = model.covariances[0]
    np.testing.assert_array_equal(stats.t, [0.0])
    np.testing.assert_allclose(stats.S, [[np.trace(C @ C) / 8]])
    np.testing.assert_allclose(stats.Cbar, C)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), K=st.integers(1, 4), p=st.integers(2, 12))
def test_weighted_t_sums_to_zero(seed, K, p):
    rng = np.random.default_rng(seed)
    model = random_model(rng, p, K)
    sizes = rng.integers(1, 20, size=K)
    stats = gmm.class_statistics(model, sizes)
    assert abs(np.dot(sizes / sizes.sum(), stats.t)) < 1e-10


@settings(max_examples=50, deadline=None)
@given(props=st.lists(st.floats(0.01, 1.0), min_size=1, max_size=6), T=st.integers(6, 500))
def test_apportion_sums_exactly(props, T):
    c = np.asarray(props) / np.sum(props)
    sizes = gmm.apportion(c, T)
    assert sizes.sum() == T
    assert np.all(np.abs(sizes - c * T) < 1)


def test_estimate_tau_trivial_cases():
    assert gmm.estimate_tau(np.zeros((5, 3))) == 0.0
    x = np.zeros((4, 1))
    x[0, 0] = np.sqrt(2.5)
    assert gmm.estimate_tau(x) == pytest.approx(2.5, rel=1e-15)
    with pytest.raises(ValueError):
        gmm.estimate_tau(np.zeros((4, 0)))


def test_round_trip_error_decreases(rng):
    p = 5
    model = random_model(rng, p, 2)
    errs = []
    for T in (1_000, 10_000):
        data = gmm.sample_mixture(model, T, seed=1)
        fit = gmm.fit_empirical_model(data.X, data.labels)
        errs.append(np.abs(fit.means - model.means).max() + np.abs(fit.covariances - model.covariances).max())
    assert errs[1] < errs[0]


def test_fit_recovers_means_within_two_percent():
    p = 4
    means = np.array([[5.0, -4.0], [3.0, 6.0], [-2.0, 4.0], [4.0, 3.0]])
    model = gmm.MixtureModel(means, np.stack([np.eye(p)] * 2), np.array([0.5, 0.5]))
    data = gmm.sample_mixture(model, 200_000, seed=2)
    fit = gmm.fit_empirical_model(data.X, data.labels)
    np.testing.assert_allclose(fit.means, means, rtol=0.02)


def test_fit_identical_samples_zero_covariance():
    x = np.array([[1.0, 1.0, 2.0, 2.0], [0.5, 0.5, -1.0, -1.0]])
    fit = gmm.fit_empirical_model(x, [1, 1, 2, 2])
    np.testing.assert_array_equal(fit.covariances, 0.0)


def test_fit_rejects_singleton_class():
    with pytest.raises(ValueError, match="fewer than 2"):
        gmm.fit_empirical_model(np.zeros((2, 3)), [1, 1, 2])


def test_statistic_norms_zero_means_equal_covariances():
    p, K = 10, 2
    C = 2.0 * np.eye(p)
    model = gmm.MixtureModel(np.zeros((p, K)), np.stack([C, C]), np.array([0.5, 0.5]))
    stats = gmm.class_statistics(model, [5, 5])
    m, c = gmm.statistic_norms(stats)
    S = np.trace(C @ C) / p * np.ones((K, K))
    assert m == 0.0
    assert c == pytest.approx(2 * np.linalg.norm(S, 2), rel=1e-14)


def test_model_validation():
    with pytest.raises(ValueError):
        gmm.MixtureModel(np.zeros((3, 2)), np.zeros((2, 3, 3)), np.array([0.3, 0.3]))
    asym = np.stack([np.eye(3), np.triu(np.ones((3, 3)))])
    with pytest.raises(ValueError, match="symmetric"):
        gmm.MixtureModel(np.zeros((3, 2)), asym, np.array([0.5, 0.5]))


def test_mixture_config_generators():
    cfg = {"schema": 1, "p": 8, "K": 2,
           "means": ["canonical_spike(1, 3)", "canonical_spike(2, 3)"],
           "covariances": ["scaled_identity(1, 0)", "scaled_identity(1, 2)"],
           "proportions": [0.5, 0.5], "seed": 4}
    model, seed = parse_mixture(cfg)
    ref = gmm.two_class_model(8, 3.0, 2.0)
    np.testing.assert_array_equal(model.means, ref.means)
    np.testing.assert_array_equal(model.covariances, ref.covariances)
    assert seed == 4
    with pytest.raises(ConfigError, match="unknown"):
        parse_mixture({**cfg, "colour": 1})
    with pytest.raises(ConfigError):
        parse_mixture({**cfg, "means": ["canonical_spike(9, 3)", "zeros"]})
