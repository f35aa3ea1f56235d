"""Spectral utilities: symmetric eigendecomposition, ESD histograms and the
deterministic-equivalent density of ``G_c = P (Sigma^T Sigma / n) P``.

The limiting density solves, for ``z`` in the upper half plane,

    delta = (1/n) tr Phi_c Q(z),    Q(z) = (Phi_c / (1 + delta) - z I_T)^{-1},

and the Stieltjes transform of the eigenvalue distribution of ``G_c`` is
``m(z) = (1/T) tr Q(z)``.  Everything is evaluated in the eigenbasis of
``Phi_c``, so each fixed-point step is ``O(T)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .kernels import KernelMatrix

__all__ = [
    "SpectrumResult",
    "StieltjesSolution",
    "ConvergenceError",
    "eig_sym",
    "esd_histogram",
    "operator_norm_diff",
    "eigenvector_alignment",
    "isolated_eigenvalues",
    "stieltjes_solve",
    "limiting_density",
    "default_density_y",
]

class ConvergenceError(RuntimeError):
    def __init__(self, message: str, residual: float, iterations: int):
        super().__init__(f"{message} (residual {residual:.3e} after {iterations} iterations)")
        self.residual = residual
        self.iterations = iterations


def _values(A) -> np.ndarray:
    return A.values if isinstance(A, KernelMatrix) else np.asarray(A, dtype=float)


@dataclass(frozen=True)
class SpectrumResult:
    eigenvalues: np.ndarray   # ascending
    eigenvectors: np.ndarray  # column i pairs with eigenvalues[i]

    def leading(self, k: int = 1) -> np.ndarray:
        """Eigenvectors of the ``k`` largest eigenvalues, largest first."""
        return self.eigenvectors[:, ::-1][:, :k]


def _orient(V: np.ndarray) -> np.ndarray:
    # argmax returns the lowest index among ties.
    idx = np.argmax(np.abs(V), axis=0)
    signs = np.sign(V[idx, np.arange(V.shape[1])])
    signs[signs == 0] = 1.0
    return V * signs


def eig_sym(matrix) -> SpectrumResult:
    """Full eigendecomposition of a symmetric matrix, ascending order.

    Each eigenvector is oriented so that its largest-magnitude entry is
    positive.
    """
    A = _values(matrix)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"eig_sym expects a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("eig_sym received non-finite entries")
    w, V = np.linalg.eigh(0.5 * (A + A.T))
    return SpectrumResult(w, _orient(V))


def esd_histogram(eigenvalues, bins: int = 50, range: Optional[tuple] = None):
    """Density-normalized histogram; returns ``(edges, heights)``."""
    lam = np.asarray(eigenvalues, dtype=float).ravel()
    if lam.size == 0:
        raise ValueError("esd_histogram needs at least one eigenvalue")
    if bins < 1:
        raise ValueError("bins must be >= 1")
    heights, edges = np.histogram(lam, bins=bins, range=range)
    widths = np.diff(edges)
    # Normalize by the total count, so mass outside ``range`` is lost, as for an ESD.
    heights = heights / (lam.size * widths)
    return edges, heights


def histogram_l1(heights_a, heights_b, edges) -> float:
    """L1 distance between two densities sharing the same bins."""
    return float(np.sum(np.abs(np.asarray(heights_a) - np.asarray(heights_b)) * np.diff(edges)))


def operator_norm_diff(A, B) -> float:
    A, B = _values(A), _values(B)
    if A.shape != B.shape:
        raise ValueError(f"shape mismatch: {A.shape} vs {B.shape}")
    D = A - B
    return float(np.max(np.abs(np.linalg.eigvalsh(0.5 * (D + D.T)))))


def eigenvector_alignment(u, v) -> float:
    u = np.asarray(u, dtype=float).ravel()
    v = np.asarray(v, dtype=float).ravel()
    for name, x in (("u", u), ("v", v)):
        if abs(np.linalg.norm(x) - 1.0) > 1e-8:
            raise ValueError(f"{name} is not unit norm (|{name}| = {np.linalg.norm(x):.6g})")
    return float(min(abs(u @ v), 1.0))


def isolated_eigenvalues(eigenvalues, factor: float = 5.0) -> np.ndarray:
    """Eigenvalues whose gap to every other eigenvalue exceeds ``factor`` times
    the median consecutive gap."""
    lam = np.sort(np.asarray(eigenvalues, dtype=float))
    if lam.size < 3:
        return np.empty(0)
    gaps = np.diff(lam)
    thresh = factor * np.median(gaps)
    left = np.concatenate([[np.inf], gaps])
    right = np.concatenate([gaps, [np.inf]])
    return lam[np.minimum(left, right) > thresh]


@dataclass(frozen=True)
class StieltjesSolution:
    z: complex
    m: complex
    delta: complex
    iterations: int
    residual: float


def _spectrum_of(phi_c) -> np.ndarray:
    if isinstance(phi_c, SpectrumResult):
        return phi_c.eigenvalues
    A = _values(phi_c)
    if A.ndim == 1:
        return A
    return np.linalg.eigvalsh(0.5 * (A + A.T))


def stieltjes_solve(phi_c, n: int, z: complex, tol: float = 1e-10, max_iter: int = 10_000,
                    delta0: Optional[complex] = None, damping: float = 0.5) -> StieltjesSolution:
    """Solve ``delta = (1/n) tr Phi_c Q(z)`` by damped fixed-point iteration.

    ``phi_c`` may be a matrix, a :class:`SpectrumResult` or a 1-D array of its
    eigenvalues.  The damping factor is halved whenever the residual grows two
    steps in a row while the update direction flips (an oscillation).
    """
    lam = _spectrum_of(phi_c)
    z = complex(z)
    if n < 1:
        raise ValueError("n must be >= 1")
    if z.imag < 0 or (z.imag == 0 and z.real >= lam.min()):
        raise ValueError("z must lie in the upper half plane or on the real axis below the spectrum")
    T = lam.size

    def update(d):
        return np.sum(lam / (lam / (1 + d) - z)) / n

    delta = complex(0.0 if delta0 is None else delta0)
    alpha = damping
    residual = np.inf
    prev_step = 0j
    rises = 0
    for it in range(1, max_iter + 1):
        f = update(delta)
        step = f - delta
        new_residual = abs(step)
        if new_residual <= tol:
            delta = f
            residual = abs(update(delta) - delta)
            break
        # Oscillation: the residual grows while the step reverses direction.
        # A residual that grows along a steady direction is a transient and is left alone.
        if new_residual > residual and (step * prev_step.conjugate()).real < 0:
            rises += 1
            if rises >= 2:
                alpha *= 0.5
                rises = 0
        else:
            rises = 0
        residual = new_residual
        prev_step = step
        delta = delta + alpha * step
    else:
        raise ConvergenceError(f"fixed point did not converge at z={z}", residual, max_iter)

    m = complex(np.sum(1.0 / (lam / (1 + delta) - z)) / T)
    if z.imag > 0 and m.imag < -1e-12 * max(1.0, abs(m)):
        raise ConvergenceError(f"solution violates Im m >= 0 at z={z}", residual, it)
    return StieltjesSolution(z, m, delta, it, float(residual))


def default_density_y(phi_c) -> float:
    lam = _spectrum_of(phi_c)
    return 1e-3 * max(1.0, float(np.max(np.abs(lam))))


def limiting_density(phi_c, n: int, x_grid, y: Optional[float] = None,
                     warm_start: bool = True, tol: float = 1e-10,
                     max_iter: int = 10_000) -> np.ndarray:
    """``rho(x) = Im m(x + iy) / pi`` on ``x_grid``.

    With ``warm_start`` the solution at one grid point seeds the next, so the
    grid is swept in order.
    """
    lam = _spectrum_of(phi_c)
    x = np.asarray(x_grid, dtype=float)
    if y is None:
        y = default_density_y(lam)
    if not y > 0:
        raise ValueError("y must be positive")
    if np.any(np.diff(x) < 0):
        raise ValueError("x_grid must be sorted")
    rho = np.empty(x.size)
    delta = None
    for i, xi in enumerate(x):
        try:
            sol = stieltjes_solve(lam, n, complex(xi, y), tol=tol, max_iter=max_iter,
                                  delta0=delta if warm_start else None)
        except ConvergenceError as exc:
            raise ConvergenceError(f"grid index {i} (x={xi:.6g}): {exc}", exc.residual,
                                   exc.iterations) from exc
        if warm_start:
            delta = sol.delta
        rho[i] = sol.m.imag / np.pi
    return np.clip(rho, 0.0, None)
