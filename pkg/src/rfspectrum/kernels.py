"""Expected random-feature kernels and their Monte-Carlo counterparts.

For ``w ~ N(0, I_p)`` the expected kernel ``Phi(a, b) = E_w s(w.a) s(w.b)`` has a
closed form for each supported activation ``s``.  All closed forms are written
in terms of three scalars (``a.b``, ``|a|``, ``|b|``) so that the same code
evaluates a single entry or a full ``T x T`` matrix.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import erf

from .rng import child_generator

__all__ = [
    "ActivationKind",
    "KernelMatrix",
    "KINDS",
    "parse_activation",
    "angle",
    "phi_entry",
    "phi_matrix",
    "center",
    "centering_projector",
    "monte_carlo_gram",
    "random_features",
]

KINDS = (
    "linear",
    "relu",
    "abs",
    "lrelu",
    "indicator",
    "sign",
    "quad",
    "cos",
    "sin",
    "erf",
    "gauss-exp",
)

_N_PARAMS = {"lrelu": 2, "quad": 3}


@dataclass(frozen=True)
class ActivationKind:
    """One of the supported activations, with its parameters.

    ``lrelu`` carries ``(s_plus, s_minus)`` with
    ``s(t) = s_plus * max(t, 0) + s_minus * max(-t, 0)``; ``quad`` carries
    ``(s2, s1, s0)`` with ``s(t) = s2 t^2 + s1 t + s0``.
    """

    tag: str
    params: tuple = ()

    def __post_init__(self):
        if self.tag not in KINDS:
            raise ValueError(f"unknown activation {self.tag!r}; valid: {', '.join(KINDS)}")
        expected = _N_PARAMS.get(self.tag, 0)
        if len(self.params) != expected:
            raise ValueError(f"{self.tag} takes {expected} parameters, got {len(self.params)}")
        object.__setattr__(self, "params", tuple(float(v) for v in self.params))
        if not all(np.isfinite(self.params)):
            raise ValueError(f"non-finite parameters for {self.tag}: {self.params}")

    def __str__(self):
        if not self.params:
            return self.tag
        return ":".join([self.tag, *(f"{v:g}" for v in self.params)])

    def __call__(self, t):
        """Pointwise activation; ``1_{t>0}`` and ``sign`` map 0 to 0."""
        t = np.asarray(t, dtype=float)
        tag = self.tag
        if tag == "linear":
            return t.copy()
        if tag == "relu":
            return np.maximum(t, 0.0)
        if tag == "abs":
            return np.abs(t)
        if tag == "lrelu":
            sp, sm = self.params
            return sp * np.maximum(t, 0.0) + sm * np.maximum(-t, 0.0)
        if tag == "indicator":
            return (t > 0).astype(float)
        if tag == "sign":
            return np.sign(t)
        if tag == "quad":
            s2, s1, s0 = self.params
            return s2 * t * t + s1 * t + s0
        if tag == "cos":
            return np.cos(t)
        if tag == "sin":
            return np.sin(t)
        if tag == "erf":
            return erf(t)
        return np.exp(-0.5 * t * t)


def parse_activation(text: str) -> ActivationKind:
    """Parse ``"relu"``, ``"lrelu:1:-1"``, ``"quad:1:0.5:0"`` and friends."""
    parts = text.strip().lower().split(":")
    tag, raw = parts[0], parts[1:]
    if tag not in KINDS:
        raise ValueError(f"unknown activation {text!r}; valid: {', '.join(KINDS)}")
    try:
        params = tuple(float(v) for v in raw)
    except ValueError:
        raise ValueError(f"bad numeric parameter in activation {text!r}") from None
    return ActivationKind(tag, params)


@dataclass(frozen=True)
class KernelMatrix:
    values: np.ndarray
    centered: bool = False

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ValueError(f"kernel matrix must be square, got shape {v.shape}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def T(self) -> int:
        return self.values.shape[0]


def angle(a, b) -> float:
    """Cosine of the angle between ``a`` and ``b``, clamped to [-1, 1]."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        raise ValueError("angle is undefined for a zero-norm vector")
    return float(np.clip(a @ b / (na * nb), -1.0, 1.0))


def _phi(kind: ActivationKind, ab, na, nb):
    """Closed-form kernel from inner products and norms (broadcasting).

    Rows that divide by ``|a||b|`` return the zero-vector limit, which for
    these activations coincides with the exact expectation under the pointwise
    convention ``s(0) = 0``.
    """
    ab = np.asarray(ab, dtype=float)
    na = np.asarray(na, dtype=float)
    nb = np.asarray(nb, dtype=float)
    tag = kind.tag
    if tag == "linear":
        return ab.copy()
    nn = na * nb
    sq_a, sq_b = na * na, nb * nb

    if tag in ("relu", "abs", "lrelu", "indicator", "sign"):
        zero = nn == 0
        with np.errstate(divide="ignore", invalid="ignore"):
            c = np.where(zero, 0.0, ab / np.where(zero, 1.0, nn))
        c = np.clip(c, -1.0, 1.0)
        root = np.sqrt(np.maximum(1.0 - c * c, 0.0))
        if tag == "relu":
            out = nn / (2 * np.pi) * (c * np.arccos(-c) + root)
        elif tag == "abs":
            out = 2 / np.pi * nn * (c * np.arcsin(c) + root)
        elif tag == "lrelu":
            sp, sm = kind.params
            out = 0.5 * (sp**2 + sm**2) * ab + nn / (2 * np.pi) * (sp + sm) ** 2 * (
                root - c * np.arccos(c)
            )
        elif tag == "indicator":
            out = 0.5 - np.arccos(c) / (2 * np.pi)
        else:
            out = 2 / np.pi * np.arcsin(c)
        return np.where(zero, 0.0, out)

    if tag == "quad":
        s2, s1, s0 = kind.params
        return (
            s2**2 * (2 * ab * ab + sq_a * sq_b)
            + s1**2 * ab
            + s2 * s0 * (sq_a + sq_b)
            + s0**2
        )
    if tag == "cos":
        return np.exp(-0.5 * (sq_a + sq_b)) * np.cosh(ab)
    if tag == "sin":
        return np.exp(-0.5 * (sq_a + sq_b)) * np.sinh(ab)
    if tag == "erf":
        arg = 2 * ab / np.sqrt((1 + 2 * sq_a) * (1 + 2 * sq_b))
        return 2 / np.pi * np.arcsin(np.clip(arg, -1.0, 1.0))
    # gauss-exp: s(t) = exp(-t^2/2)
    return 1.0 / np.sqrt((1 + sq_a) * (1 + sq_b) - ab * ab)


def phi_entry(kind: ActivationKind, a, b) -> float:
    """Exact ``E_w s(w.a) s(w.b)`` for standard Gaussian ``w``."""
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if a.shape != b.shape:
        raise ValueError(f"vectors differ in length: {a.size} vs {b.size}")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise ValueError("phi_entry received non-finite input")
    return float(_phi(kind, a @ b, np.linalg.norm(a), np.linalg.norm(b)))


def phi_matrix(kind: ActivationKind, X) -> KernelMatrix:
    """Expected kernel matrix over the columns of the ``p x T`` matrix ``X``."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ValueError("X must be a p x T matrix")
    if not np.all(np.isfinite(X)):
        bad = np.argwhere(~np.isfinite(X))[0]
        raise ValueError(f"non-finite entry in column {bad[1]} (row {bad[0]})")
    gram = X.T @ X
    norms = np.sqrt(np.maximum(np.diag(gram), 0.0))
    vals = _phi(kind, gram, norms[:, None], norms[None, :])
    # Mirror the upper triangle so the result is exactly symmetric.
    vals = np.triu(vals) + np.triu(vals, 1).T
    return KernelMatrix(vals, centered=False)


def centering_projector(T: int) -> np.ndarray:
    return np.eye(T) - np.full((T, T), 1.0 / T)


def center(mat) -> KernelMatrix:
    """Return ``P M P`` with ``P = I - 11^T / T``."""
    values = mat.values if isinstance(mat, KernelMatrix) else np.asarray(mat, dtype=float)
    if values.ndim != 2 or values.shape[0] != values.shape[1]:
        raise ValueError("center expects a square matrix")
    # P M P without forming P: subtract row and column means, add back the grand mean.
    row = values.mean(axis=1, keepdims=True)
    col = values.mean(axis=0, keepdims=True)
    out = values - row - col + values.mean()
    out = 0.5 * (out + out.T)
    return KernelMatrix(out, centered=True)


def random_features(kind: ActivationKind, X, n: int, rng: np.random.Generator) -> np.ndarray:
    """``Sigma = s(W X)`` for one draw of an ``n x p`` standard Gaussian ``W``."""
    X = np.asarray(X, dtype=float)
    W = rng.standard_normal((n, X.shape[0]))
    return kind(W @ X)


@dataclass
class MonteCarloGram:
    mean: np.ndarray
    realizations: Optional[list] = field(default=None, repr=False)


def monte_carlo_gram(kind: ActivationKind, X, n: int, realizations: int, seed: int,
                     keep: bool = False) -> MonteCarloGram:
    """Average of ``G = Sigma^T Sigma / n`` over independent draws of ``W``.

    Realization ``r`` uses a generator derived from ``(seed, r)`` so the result
    does not depend on how the loop is scheduled.
    """
    if n < 1:
        raise ValueError("feature count n must be >= 1")
    if realizations < 1:
        raise ValueError("realizations must be >= 1")
    X = np.asarray(X, dtype=float)
    T = X.shape[1]
    acc = np.zeros((T, T))
    kept = [] if keep else None
    for r in range(realizations):
        sigma = random_features(kind, X, n, child_generator(seed, r))
        G = sigma.T @ sigma / n
        acc += G
        if keep:
            kept.append(G)
    mean = acc / realizations
    mean = 0.5 * (mean + mean.T)
    return MonteCarloGram(mean, kept)
