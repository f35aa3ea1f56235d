"""Random-feature spectral clustering and the accuracy experiments."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .equivalent import classify, coefficients
from .gmm import MixtureModel, apportion, class_statistics, estimate_tau, sample_mixture
from .kernels import ActivationKind, center, phi_matrix, random_features
from .rng import child_generator
from .spectrum import eig_sym

__all__ = [
    "ClusteringResult",
    "spectral_embed",
    "kmeans",
    "accuracy",
    "cluster_once",
    "clustering_experiment",
    "ExperimentRow",
]


@dataclass
class ClusteringResult:
    embedding: np.ndarray
    predicted: np.ndarray
    accuracy: float
    per_run: list = field(default_factory=list)


def spectral_embed(gram_centered, k: int, normalize_rows: bool = False) -> np.ndarray:
    """Eigenvectors of the ``k`` largest eigenvalues, largest first."""
    A = getattr(gram_centered, "values", gram_centered)
    A = np.asarray(A, dtype=float)
    if k > A.shape[0]:
        raise ValueError(f"k={k} exceeds matrix size {A.shape[0]}")
    emb = eig_sym(A).leading(k)
    if normalize_rows:
        norms = np.linalg.norm(emb, axis=1, keepdims=True)
        emb = emb / np.where(norms == 0, 1.0, norms)
    return emb


def _plus_plus(points, K, rng):
    T = points.shape[0]
    centers = [points[rng.integers(T)]]
    d2 = ((points - centers[0]) ** 2).sum(axis=1)
    for _ in range(1, K):
        total = d2.sum()
        if total == 0:
            idx = rng.integers(T)
        else:
            idx = rng.choice(T, p=d2 / total)
        centers.append(points[idx])
        d2 = np.minimum(d2, ((points - points[idx]) ** 2).sum(axis=1))
    return np.array(centers, dtype=float)


def _lloyd(points, centers, max_iter):
    prev = np.inf
    for _ in range(max_iter):
        dist = ((points[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        labels = dist.argmin(axis=1)
        inertia = dist[np.arange(points.shape[0]), labels].sum()
        assert inertia <= prev * (1 + 1e-12) + 1e-300, "k-means objective increased"
        new = centers.copy()
        taken = set()
        for j in range(centers.shape[0]):
            members = labels == j
            if members.any():
                new[j] = points[members].mean(axis=0)
            else:
                # Empty cluster: move its centroid to the point farthest from its own centroid.
                far = dist[np.arange(points.shape[0]), labels]
                for idx in np.argsort(-far, kind="stable"):
                    if idx not in taken:
                        break
                taken.add(idx)
                new[j] = points[idx]
        if np.array_equal(new, centers):
            break
        centers, prev = new, inertia
    dist = ((points[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    labels = dist.argmin(axis=1)
    return labels, dist[np.arange(points.shape[0]), labels].sum()


def kmeans(points, K: int, restarts: int = 10, max_iter: int = 300, seed: int = 0) -> np.ndarray:
    """Lloyd's algorithm from k-means++ seeding; best of ``restarts`` by inertia.

    Returns 1-based labels.
    """
    X = np.asarray(points, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if K > X.shape[0]:
        raise ValueError(f"K={K} exceeds number of points {X.shape[0]}")
    best, best_inertia = None, np.inf
    for r in range(restarts):
        rng = child_generator(seed, r)
        labels, inertia = _lloyd(X, _plus_plus(X, K, rng), max_iter)
        if inertia < best_inertia:
            best, best_inertia = labels, inertia
    return best + 1


def accuracy(predicted, truth, K: int) -> float:
    """Fraction correct under the best relabeling of ``predicted``."""
    pred = np.asarray(predicted).astype(int)
    true = np.asarray(truth).astype(int)
    if pred.shape != true.shape:
        raise ValueError("predicted and truth differ in length")
    for name, lab in (("predicted", pred), ("truth", true)):
        if lab.size and (lab.min() < 1 or lab.max() > K):
            raise ValueError(f"{name} labels outside 1..{K}")
    confusion = np.zeros((K, K), dtype=int)
    np.add.at(confusion, (pred - 1, true - 1), 1)
    if K <= 6:
        rows = np.arange(K)
        hits = max(confusion[rows, list(perm)].sum() for perm in itertools.permutations(range(K)))
    else:
        r, c = linear_sum_assignment(-confusion)
        hits = confusion[r, c].sum()
    return hits / max(pred.size, 1)


def _draw_points(source, T, K, rng):
    """Return ``(X, labels)`` with ``T`` columns from a model or a raw dataset."""
    if isinstance(source, MixtureModel):
        data = sample_mixture(source, T, int(rng.integers(2**63)))
        return data.X, data.labels
    vectors, labels = source.vectors, source.labels
    sizes = apportion(np.full(K, 1.0 / K), T)
    cols = []
    for a in range(K):
        pool = np.flatnonzero(labels == a + 1)
        cols.append(rng.choice(pool, size=sizes[a], replace=False))
    cols = np.concatenate(cols)
    return vectors[:, cols], labels[cols]


def cluster_once(kind: ActivationKind, X, truth, K: int, n: Optional[int], rng,
                 k: int = 2, normalize_rows: bool = False, restarts: int = 10,
                 max_iter: int = 300) -> ClusteringResult:
    """One pass of the pipeline; ``n=None`` uses the expected kernel instead of ``G``."""
    if n is None:
        Gc = center(phi_matrix(kind, X))
    else:
        sigma = random_features(kind, X, n, rng)
        Gc = center(sigma.T @ sigma / n)
    emb = spectral_embed(Gc, min(k, X.shape[1]), normalize_rows=normalize_rows)
    pred = kmeans(emb, K, restarts=restarts, max_iter=max_iter,
                  seed=int(rng.integers(2**63)))
    return ClusteringResult(emb, pred, accuracy(pred, truth, K))


@dataclass
class ExperimentRow:
    activation: str
    taxonomy: str
    T: int
    mean_accuracy: float
    std_accuracy: float
    per_run: list = field(default_factory=list, repr=False)


def clustering_experiment(source, activations: Sequence[ActivationKind], T_list: Sequence[int],
                          n: Optional[int] = 32, runs: int = 50, seed: int = 0, K: Optional[int] = None,
                          k: int = 2, normalize_rows: bool = False) -> list[ExperimentRow]:
    """Mean and spread of clustering accuracy for each ``(activation, T)``.

    ``source`` is a :class:`MixtureModel` or any object with ``vectors`` (p x N)
    and 1-based ``labels``.  Each run redraws the ``T`` points and ``W``; run
    ``r`` at size ``T`` uses a generator keyed by ``(seed, T, r)``, so every
    activation sees the same data.
    """
    if K is None:
        K = source.K if isinstance(source, MixtureModel) else int(np.max(source.labels))
    rows = []
    for kind in activations:
        for T in T_list:
            accs = []
            for r in range(runs):
                rng = child_generator(seed, T, r)
                X, truth = _draw_points(source, T, K, rng)
                try:
                    res = cluster_once(kind, X, truth, K, n, rng, k=k, normalize_rows=normalize_rows)
                except Exception as exc:
                    raise RuntimeError(f"{kind} T={T} run {r}: {exc}") from exc
                accs.append(res.accuracy)
            if isinstance(source, MixtureModel):
                tau = class_statistics(source, apportion(source.proportions, T)).tau
            else:
                tau = estimate_tau(source.vectors)
            taxonomy = classify(coefficients(kind, tau)) if tau > 0 else "n/a"
            rows.append(ExperimentRow(str(kind), str(taxonomy), int(T), float(np.mean(accs)),
                                      float(np.std(accs)), accs))
    return rows
