"""Nonlinearity-free equivalent of the centered expected kernel.

The centered expected kernel ``P Phi P`` is close in operator norm to
``P Phi_tilde P`` with

    Phi_tilde = d1 (Omega + M J^T/sqrt(p))^T (Omega + M J^T/sqrt(p))
                + d2 U B U^T + d0 I_T,

    U = [J/sqrt(p), phi],   B = [[t t^T + 2S, t], [t^T, 1]],

where only the three scalars ``(d0, d1, d2)`` depend on the activation.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .gmm import ClassStatistics, DataSet
from .kernels import ActivationKind, KernelMatrix

__all__ = [
    "EquivalentCoefficients",
    "SpikedForm",
    "Taxonomy",
    "coefficients",
    "classify",
    "build_equivalent",
    "build_spiked",
    "recompose_spiked",
    "ratio_to_lrelu",
]


@dataclass(frozen=True)
class EquivalentCoefficients:
    d0: float
    d1: float
    d2: float
    tau: float


class Taxonomy(enum.Enum):
    MEAN_ORIENTED = "mean-oriented"
    COVARIANCE_ORIENTED = "covariance-oriented"
    BALANCED = "balanced"
    DEGENERATE = "degenerate"

    def __str__(self):
        return self.value


def coefficients(kind: ActivationKind, tau: float) -> EquivalentCoefficients:
    """``(d0, d1, d2)`` for ``kind`` at average trace ``tau``."""
    if not tau > 0:
        raise ValueError(f"tau must be positive, got {tau}")
    pi = math.pi
    tag = kind.tag
    if tag == "linear":
        d = (0.0, 1.0, 0.0)
    elif tag == "relu":
        d = ((0.25 - 1 / (2 * pi)) * tau, 0.25, 1 / (8 * pi * tau))
    elif tag == "abs":
        d = ((1 - 2 / pi) * tau, 0.0, 1 / (2 * pi * tau))
    elif tag == "lrelu":
        sp, sm = kind.params
        d = (
            (pi - 2) / (4 * pi) * (sp + sm) ** 2 * tau,
            0.25 * (sp - sm) ** 2,
            (sp + sm) ** 2 / (8 * tau * pi),
        )
    elif tag == "indicator":
        d = (0.25 - 1 / (2 * pi), 1 / (2 * pi * tau), 0.0)
    elif tag == "sign":
        d = (1 - 2 / pi, 2 / (pi * tau), 0.0)
    elif tag == "quad":
        s2, s1, _ = kind.params
        d = (2 * tau**2 * s2**2, s1**2, s2**2)
    elif tag == "cos":
        d = (0.5 + math.exp(-2 * tau) / 2 - math.exp(-tau), 0.0, math.exp(-tau) / 4)
    elif tag == "sin":
        d = (0.5 - math.exp(-2 * tau) / 2 - tau * math.exp(-tau), math.exp(-tau), 0.0)
    elif tag == "erf":
        # Var erf(g) - tau d1 with E[erf(g)^2] = (2/pi) asin(r).
        r = 2 * tau / (2 * tau + 1)
        d = (2 / pi * (math.asin(r) - r), 4 / pi / (2 * tau + 1), 0.0)
    elif tag == "gauss-exp":
        d = (1 / math.sqrt(2 * tau + 1) - 1 / (tau + 1), 0.0, 1 / (4 * (tau + 1) ** 3))
    else:  # pragma: no cover - ActivationKind validates tags
        raise ValueError(f"no coefficients for {tag}")
    return EquivalentCoefficients(float(d[0]), float(d[1]), float(d[2]), float(tau))


def classify(coeffs: EquivalentCoefficients) -> Taxonomy:
    d1, d2 = coeffs.d1, coeffs.d2
    eps = 1e-12 * max(1.0, abs(d1), abs(d2))
    mean, cov = d1 > eps, d2 > eps
    if mean and cov:
        return Taxonomy.BALANCED
    if mean:
        return Taxonomy.MEAN_ORIENTED
    if cov:
        return Taxonomy.COVARIANCE_ORIENTED
    return Taxonomy.DEGENERATE


def ratio_to_lrelu(ratio: float, tau: float) -> tuple[float, float]:
    """Leaky-ReLU slopes ``(s_plus, s_minus)`` with ``d1/d2 == ratio``.

    Normalized so that ``s_plus + s_minus = 2``.
    """
    if not ratio > 0 or not tau > 0:
        raise ValueError("ratio and tau must be positive")
    root = math.sqrt(ratio / (2 * math.pi * tau))
    return 1.0 + root, 1.0 - root


def _check_dims(data: DataSet, stats: ClassStatistics):
    p, T = data.Omega.shape
    K = stats.M.shape[1]
    problems = []
    if stats.M.shape[0] != p:
        problems.append(f"M has {stats.M.shape[0]} rows, Omega has {p}")
    if data.J.shape != (T, K):
        problems.append(f"J has shape {data.J.shape}, expected {(T, K)}")
    if data.phi.shape != (T,):
        problems.append(f"phi has length {data.phi.size}, expected {T}")
    if stats.t.shape != (K,) or stats.S.shape != (K, K):
        problems.append(f"t/S shapes {stats.t.shape}/{stats.S.shape} do not match K={K}")
    if problems:
        raise ValueError("dimension mismatch: " + "; ".join(problems))
    return p, T, K


def build_equivalent(data: DataSet, stats: ClassStatistics,
                     coeffs: EquivalentCoefficients) -> KernelMatrix:
    """Uncentered ``Phi_tilde``; pass it through :func:`kernels.center`."""
    p, T, K = _check_dims(data, stats)
    J = data.J
    Y = data.Omega + stats.M @ J.T / np.sqrt(p)
    U = np.column_stack([J / np.sqrt(p), data.phi])
    B = np.empty((K + 1, K + 1))
    B[:K, :K] = np.outer(stats.t, stats.t) + 2 * stats.S
    B[:K, K] = stats.t
    B[K, :K] = stats.t
    B[K, K] = 1.0
    out = coeffs.d1 * (Y.T @ Y) + coeffs.d2 * (U @ B @ U.T) + coeffs.d0 * np.eye(T)
    return KernelMatrix(0.5 * (out + out.T), centered=False)


@dataclass(frozen=True)
class SpikedForm:
    """``Phi_tilde = d1 Omega^T Omega + V A V^T + d0 I``."""

    V: np.ndarray
    A: np.ndarray
    A11: np.ndarray
    coeffs: EquivalentCoefficients


def build_spiked(data: DataSet, stats: ClassStatistics,
                 coeffs: EquivalentCoefficients) -> SpikedForm:
    p, T, K = _check_dims(data, stats)
    d1, d2 = coeffs.d1, coeffs.d2
    M, t = stats.M, stats.t
    V = np.column_stack([data.J / np.sqrt(p), data.phi, data.Omega.T @ M])
    A11 = d1 * (M.T @ M) + d2 * (np.outer(t, t) + 2 * stats.S)
    A11 = 0.5 * (A11 + A11.T)
    A = np.zeros((2 * K + 1, 2 * K + 1))
    A[:K, :K] = A11
    A[:K, K] = d2 * t
    A[K, :K] = d2 * t
    A[K, K] = d2
    A[:K, K + 1:] = d1 * np.eye(K)
    A[K + 1:, :K] = d1 * np.eye(K)
    return SpikedForm(V, A, A11, coeffs)


def recompose_spiked(spiked: SpikedForm, Omega) -> np.ndarray:
    Omega = np.asarray(Omega, dtype=float)
    c = spiked.coeffs
    out = c.d1 * (Omega.T @ Omega) + spiked.V @ spiked.A @ spiked.V.T + c.d0 * np.eye(Omega.shape[1])
    return 0.5 * (out + out.T)
