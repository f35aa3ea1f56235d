import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rfspectrum import gmm
from rfspectrum.cluster import accuracy, cluster_once, clustering_experiment, kmeans, spectral_embed
from rfspectrum.kernels import center, parse_activation, phi_matrix
from rfspectrum.rng import child_generator


def test_embed_diagonal():
    emb = spectral_embed(np.diag([3.0, 2.0, 1.0]), 2)
    np.testing.assert_array_equal(emb, np.eye(3)[:, :2])


def test_embed_rank_one(rng):
    u = rng.normal(size=8)
    u /= np.linalg.norm(u)
    emb = spectral_embed(np.outer(u, u), 1)[:, 0]
    expected = u if u[np.argmax(np.abs(u))] > 0 else -u
    np.testing.assert_allclose(emb, expected, atol=1e-12)


def test_embed_orthonormal_and_k_check(rng):
    A = rng.normal(size=(20, 20))
    emb = spectral_embed(A @ A.T, 4)
    np.testing.assert_allclose(emb.T @ emb, np.eye(4), atol=1e-10)
    with pytest.raises(ValueError):
        spectral_embed(np.eye(3), 4)


def test_kmeans_two_blobs():
    pts = np.concatenate([np.zeros(10), np.full(10, 10.0)]) + np.linspace(0, 0.1, 20)
    labels = kmeans(pts, 2, seed=0)
    assert accuracy(labels, np.repeat([1, 2], 10), 2) == 1.0


def test_kmeans_identical_points():
    labels = kmeans(np.ones((6, 2)), 2, seed=1)
    assert set(labels.tolist()) <= {1, 2}
    assert labels.shape == (6,)


def test_kmeans_deterministic(rng):
    pts = rng.normal(size=(40, 2))
    assert np.array_equal(kmeans(pts, 3, seed=5), kmeans(pts, 3, seed=5))
    with pytest.raises(ValueError):
        kmeans(pts[:2], 3)


def test_kmeans_four_blobs_median_accuracy():
    centers = np.array([[0, 0], [4, 0], [0, 4], [4, 4]], dtype=float)
    accs = []
    for seed in range(50):
        rng = child_generator(seed)
        truth = np.repeat(np.arange(1, 5), 25)
        pts = centers[truth - 1] + 0.6 * rng.standard_normal((100, 2))
        accs.append(accuracy(kmeans(pts, 4, restarts=10, seed=seed), truth, 4))
    assert np.median(accs) >= 0.95


def test_accuracy_permutations(rng):
    truth = rng.integers(1, 4, size=30)
    assert accuracy(truth, truth, 3) == 1.0
    for perm in itertools.permutations([1, 2, 3]):
        relabeled = np.array(perm)[truth - 1]
        assert accuracy(relabeled, truth, 3) == 1.0
    with pytest.raises(ValueError):
        accuracy([1, 4], [1, 2], 3)
    with pytest.raises(ValueError):
        accuracy([1, 2], [1, 2, 1], 2)


def test_accuracy_coin_flip_exact_enumeration():
    # Average over all 2^4 predictions for a fixed truth equals the brute-force value.
    truth = np.array([1, 1, 2, 2])
    preds = [np.array(p) for p in itertools.product([1, 2], repeat=4)]
    brute = np.mean([max(np.mean(p == truth), np.mean((3 - p) == truth)) for p in preds])
    got = np.mean([accuracy(p, truth, 2) for p in preds])
    assert got == pytest.approx(brute, abs=1e-15)
    assert got == pytest.approx(11 / 16)
    assert all(accuracy(p, truth, 2) >= 0.5 for p in preds)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000), K=st.integers(2, 9))
def test_accuracy_invariant_under_relabeling(seed, K):
    rng = np.random.default_rng(seed)
    truth = rng.integers(1, K + 1, size=25)
    pred = rng.integers(1, K + 1, size=25)
    perm = rng.permutation(K) + 1
    base = accuracy(pred, truth, K)
    assert accuracy(perm[pred - 1], truth, K) == pytest.approx(base)
    assert accuracy(pred, perm[truth - 1], K) == pytest.approx(base)


def test_large_k_assignment_matches_bruteforce(rng):
    K = 7
    truth = rng.integers(1, K + 1, size=40)
    pred = rng.integers(1, K + 1, size=40)
    brute = max(np.mean(np.array(p)[pred - 1] == truth) for p in itertools.permutations(range(1, K + 1)))
    assert accuracy(pred, truth, K) == pytest.approx(brute)


def test_single_class_is_trivially_perfect():
    model = gmm.two_class_model(32, 3.0, 2.0, K=1)
    rows = clustering_experiment(model, [parse_activation("relu")], [16], n=8, runs=3, seed=0)
    assert rows[0].mean_accuracy == 1.0


def test_random_baseline_sanity():
    # Indistinguishable classes: mean accuracy still at least 1/K - 0.05.
    p = 32
    model = gmm.MixtureModel(np.zeros((p, 2)), np.stack([np.eye(p)] * 2), np.array([0.5, 0.5]))
    rows = clustering_experiment(model, [parse_activation("relu")], [20], n=16, runs=50, seed=1)
    assert rows[0].mean_accuracy >= 0.5 - 0.05


def test_experiment_rows_and_reproducibility():
    model = gmm.two_class_model(64, 5.0, 0.0)
    kinds = [parse_activation("relu"), parse_activation("abs")]
    a = clustering_experiment(model, kinds, [16, 32], n=16, runs=4, seed=3)
    b = clustering_experiment(model, kinds, [16, 32], n=16, runs=4, seed=3)
    assert [(r.activation, r.T) for r in a] == [("relu", 16), ("relu", 32), ("abs", 16), ("abs", 32)]
    assert [r.per_run for r in a] == [r.per_run for r in b]
    assert a[0].taxonomy == "balanced" and a[2].taxonomy == "covariance-oriented"


def test_constant_shift_closed_form_pipeline_identical():
    model = gmm.two_class_model(64, 3.0, 6.0)
    k0, k5 = parse_activation("quad:0.5:1:0"), parse_activation("quad:0.5:1:5")
    a = clustering_experiment(model, [k0], [32], n=None, runs=10, seed=2)[0]
    b = clustering_experiment(model, [k5], [32], n=None, runs=10, seed=2)[0]
    assert a.per_run == b.per_run


def test_constant_shift_monte_carlo_pipeline():
    # Centering removes the shifted feature terms, so equal seeds give equal draws of G_c.
    model = gmm.two_class_model(64, 3.0, 6.0)
    k0, k5 = parse_activation("quad:0.5:1:0"), parse_activation("quad:0.5:1:5")
    a = clustering_experiment(model, [k0], [32], n=64, runs=20, seed=4)[0]
    b = clustering_experiment(model, [k5], [32], n=64, runs=20, seed=4)[0]
    assert abs(a.mean_accuracy - b.mean_accuracy) <= 2 * max(a.std_accuracy, b.std_accuracy) / np.sqrt(20) + 1e-12


def test_four_class_embedding_separates():
    model = gmm.four_class_model(512)
    data = gmm.sample_mixture(model, 256, 0)
    emb = spectral_embed(center(phi_matrix(parse_activation("relu"), data.X)), 2)
    pred = kmeans(emb, 4, seed=0)
    assert accuracy(pred, data.labels, 4) >= 0.9


def test_cluster_once_closed_form_and_features(base_data):
    kind = parse_activation("relu")
    rng = child_generator(0)
    exact = cluster_once(kind, base_data.X, base_data.labels, 2, None, rng)
    sampled = cluster_once(kind, base_data.X, base_data.labels, 2, 256, rng)
    assert exact.embedding.shape == (256, 2)
    assert exact.accuracy > 0.9 and sampled.accuracy > 0.7
