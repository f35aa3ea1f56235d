"""Gaussian mixture data and the class statistics used by the equivalent kernel.

Observations follow ``x_i = mu_a / sqrt(p) + omega_i`` with
``omega_i ~ N(0, C_a / p)``, so that ``|x_i| = O(1)`` when ``|C_a| = O(1)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .rng import generator

__all__ = [
    "MixtureModel",
    "DataSet",
    "ClassStatistics",
    "apportion",
    "sample_mixture",
    "class_statistics",
    "estimate_tau",
    "fit_empirical_model",
    "statistic_norms",
    "psd_factor",
]

PSD_TOL = 1e-10


def _frozen(a, dtype=float) -> np.ndarray:
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class MixtureModel:
    """``K`` classes in dimension ``p``.

    ``means`` is ``p x K`` (unscaled, before division by ``sqrt(p)``),
    ``covariances`` is ``K x p x p``, ``proportions`` has length ``K``.
    """

    means: np.ndarray
    covariances: np.ndarray
    proportions: np.ndarray

    def __post_init__(self):
        M = np.asarray(self.means, dtype=float)
        C = np.asarray(self.covariances, dtype=float)
        c = np.asarray(self.proportions, dtype=float).ravel()
        if M.ndim != 2:
            raise ValueError("means must be a p x K matrix")
        p, K = M.shape
        if C.shape != (K, p, p):
            raise ValueError(f"covariances must have shape {(K, p, p)}, got {C.shape}")
        if c.shape != (K,):
            raise ValueError(f"need {K} proportions, got {c.size}")
        if np.any(c <= 0) or abs(c.sum() - 1.0) > 1e-12:
            raise ValueError(f"proportions must be positive and sum to 1, got {c}")
        for a in range(K):
            scale = max(np.abs(C[a]).max(), 1e-300)
            if np.abs(C[a] - C[a].T).max() > 1e-12 * scale:
                raise ValueError(f"covariance of class {a + 1} is not symmetric")
        object.__setattr__(self, "means", _frozen(M))
        object.__setattr__(self, "covariances", _frozen(C))
        object.__setattr__(self, "proportions", _frozen(c))

    @property
    def p(self) -> int:
        return self.means.shape[0]

    @property
    def K(self) -> int:
        return self.means.shape[1]


@dataclass(frozen=True)
class DataSet:
    """A sampled mixture: ``X = M J^T / sqrt(p) + Omega``.

    ``labels`` are 1-based class indices; ``phi[i] = |omega_i|^2 - tr(C_a)/p``.
    """

    X: np.ndarray
    labels: np.ndarray
    Omega: np.ndarray
    phi: np.ndarray
    J: np.ndarray

    @property
    def p(self) -> int:
        return self.X.shape[0]

    @property
    def T(self) -> int:
        return self.X.shape[1]

    @property
    def class_sizes(self) -> np.ndarray:
        return self.J.sum(axis=0).astype(int)


@dataclass(frozen=True)
class ClassStatistics:
    M: np.ndarray      # p x K means
    t: np.ndarray      # tr(C_a - C0) / sqrt(p)
    S: np.ndarray      # tr(C_a C_b) / p
    tau: float         # tr(C0) / p
    Cbar: np.ndarray   # C0 = sum_a (T_a / T) C_a


def apportion(proportions: Sequence[float], T: int) -> np.ndarray:
    """Largest-remainder rounding of ``proportions * T`` to integers summing to ``T``."""
    c = np.asarray(proportions, dtype=float)
    raw = c * T
    sizes = np.floor(raw).astype(int)
    short = T - sizes.sum()
    # Stable sort keeps ties going to the lowest class index.
    order = np.argsort(-(raw - sizes), kind="stable")
    sizes[order[:short]] += 1
    return sizes


def psd_factor(C, label: str = "matrix") -> np.ndarray:
    """Symmetric square root of a PSD matrix via eigendecomposition.

    Negative eigenvalues down to ``-1e-10 |C|`` are clipped to zero; anything
    more negative is rejected.
    """
    C = np.asarray(C, dtype=float)
    w, V = np.linalg.eigh(0.5 * (C + C.T))
    scale = max(np.abs(w).max(), 0.0) if w.size else 0.0
    if w.size and w.min() < -PSD_TOL * scale:
        raise ValueError(f"{label} is not positive semidefinite (min eigenvalue {w.min():.3e})")
    return (V * np.sqrt(np.clip(w, 0.0, None))) @ V.T


def _one_hot(labels: np.ndarray, K: int) -> np.ndarray:
    J = np.zeros((labels.size, K))
    J[np.arange(labels.size), labels - 1] = 1.0
    return J


def sample_mixture(model: MixtureModel, T: int, seed: int) -> DataSet:
    """Draw ``T`` observations, class-sorted (class 1 first)."""
    K, p = model.K, model.p
    if T < K:
        raise ValueError(f"need T >= K (T={T}, K={K})")
    sizes = apportion(model.proportions, T)
    rng = generator(seed)
    labels = np.repeat(np.arange(1, K + 1), sizes)
    Omega = np.empty((p, T))
    phi = np.empty(T)
    start = 0
    for a in range(K):
        root = psd_factor(model.covariances[a], label=f"covariance of class {a + 1}")
        Z = rng.standard_normal((p, sizes[a]))
        block = root @ Z / np.sqrt(p)
        Omega[:, start:start + sizes[a]] = block
        phi[start:start + sizes[a]] = (block**2).sum(axis=0) - np.trace(model.covariances[a]) / p
        start += sizes[a]
    J = _one_hot(labels, K)
    X = model.means @ J.T / np.sqrt(p) + Omega
    return DataSet(_frozen(X), _frozen(labels, int), _frozen(Omega), _frozen(phi), _frozen(J))


def class_statistics(model: MixtureModel, class_sizes) -> ClassStatistics:
    sizes = np.asarray(class_sizes, dtype=float)
    if sizes.shape != (model.K,) or np.any(sizes <= 0):
        raise ValueError("class_sizes must hold K positive counts")
    p = model.p
    C = model.covariances
    weights = sizes / sizes.sum()
    Cbar = np.tensordot(weights, C, axes=1)
    traces = np.trace(C, axis1=1, axis2=2)
    t = (traces - np.trace(Cbar)) / np.sqrt(p)
    # tr(C_a C_b) = sum_ij C_a[i, j] C_b[j, i]; covariances are symmetric.
    flat = C.reshape(model.K, -1)
    S = flat @ flat.T / p
    S = 0.5 * (S + S.T)
    tau = float(np.trace(Cbar) / p)
    return ClassStatistics(_frozen(model.means), _frozen(t), _frozen(S), tau, _frozen(Cbar))


def estimate_tau(X) -> float:
    """Mean squared column norm of ``X``; consistent for ``tr(C0)/p``."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] == 0:
        raise ValueError("estimate_tau needs a p x T matrix with T >= 1")
    return float((X**2).sum() / X.shape[1])


def fit_empirical_model(raw, labels) -> MixtureModel:
    """Plug-in means and covariances, undoing the ``1/sqrt(p)`` data scaling.

    ``raw`` is ``p x N`` already divided by ``sqrt(p)``; labels are 1-based.
    """
    raw = np.asarray(raw, dtype=float)
    labels = np.asarray(labels).astype(int)
    p, N = raw.shape
    if labels.shape != (N,):
        raise ValueError("one label per column required")
    classes = np.unique(labels)
    K = int(classes.max())
    if not np.array_equal(classes, np.arange(1, K + 1)):
        raise ValueError(f"labels must cover 1..K without gaps, got {classes}")
    means = np.empty((p, K))
    covs = np.empty((K, p, p))
    counts = np.empty(K)
    for a in range(K):
        Xa = raw[:, labels == a + 1]
        if Xa.shape[1] < 2:
            raise ValueError(f"class {a + 1} has fewer than 2 samples")
        counts[a] = Xa.shape[1]
        mu = Xa.mean(axis=1)
        D = Xa - mu[:, None]
        means[:, a] = np.sqrt(p) * mu
        cov = p * (D @ D.T) / (Xa.shape[1] - 1)
        covs[a] = 0.5 * (cov + cov.T)
    return MixtureModel(means, covs, counts / counts.sum())


def statistic_norms(stats: ClassStatistics) -> tuple[float, float]:
    """Operator norms ``(|M^T M|, |t t^T + 2 S|)``."""
    MtM = stats.M.T @ stats.M
    B = np.outer(stats.t, stats.t) + 2 * stats.S
    return float(np.linalg.norm(MtM, 2)), float(np.linalg.norm(B, 2))


def canonical_spike(p: int, index: int, value: float) -> np.ndarray:
    """``[0_{index-1}; value; 0_{p-index}]`` with a 1-based ``index``."""
    v = np.zeros(p)
    v[index - 1] = value
    return v


def scaled_identity(p: int, base: float, delta_over_sqrt_p: float) -> np.ndarray:
    """``(base + delta / sqrt(p)) I_p``."""
    return (base + delta_over_sqrt_p / np.sqrt(p)) * np.eye(p)


def two_class_model(p: int, mean_value: float, cov_delta: float, K: int = 2) -> MixtureModel:
    """Two-class family behind the built-in experiments.

    ``mu_a = mean_value * e_a`` and ``C_a = (1 + cov_delta (a - 1) / sqrt(p)) I_p``
    with equal proportions.
    """
    means = np.stack([canonical_spike(p, a, mean_value) for a in range(1, K + 1)], axis=1)
    covs = np.stack([scaled_identity(p, 1.0, cov_delta * (a - 1)) for a in range(1, K + 1)])
    return MixtureModel(means, covs, np.full(K, 1.0 / K))


def four_class_model(p: int, mean_value: float = 5.0, cov_delta: float = 15.0) -> MixtureModel:
    """Classes ``N(mu_1, C_1), N(mu_1, C_2), N(mu_2, C_1), N(mu_2, C_2)``."""
    mus = [canonical_spike(p, 1, mean_value), canonical_spike(p, 2, mean_value)]
    Cs = [scaled_identity(p, 1.0, 0.0), scaled_identity(p, 1.0, cov_delta)]
    means = np.stack([mus[0], mus[0], mus[1], mus[1]], axis=1)
    covs = np.stack([Cs[0], Cs[1], Cs[0], Cs[1]])
    return MixtureModel(means, covs, np.full(4, 0.25))
