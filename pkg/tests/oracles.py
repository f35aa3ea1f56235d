"""Independent references used by the tests.

``table_coefficients`` re-types the coefficient table in mpmath at 40 digits.
``moment_coefficients`` derives the same numbers from Gaussian moments of the
activation by numerical quadrature:
d1 = E[s'(g)]^2, d2 = E[s''(g)]^2 / 4, d0 = Var s(g) - tau d1, g ~ N(0, tau).
"""
import mpmath as mp
import numpy as np
from scipy import integrate, special

mp.mp.dps = 40


def table_coefficients(tag, tau, params=()):
    tau = mp.mpf(tau)
    pi = mp.pi
    if tag == "linear":
        return 0, 1, 0
    if tag == "relu":
        return (mp.mpf(1) / 4 - 1 / (2 * pi)) * tau, mp.mpf(1) / 4, 1 / (8 * pi * tau)
    if tag == "abs":
        return (1 - 2 / pi) * tau, 0, 1 / (2 * pi * tau)
    if tag == "lrelu":
        sp, sm = (mp.mpf(v) for v in params)
        return ((pi - 2) / (4 * pi) * (sp + sm) ** 2 * tau, (sp - sm) ** 2 / 4, (sp + sm) ** 2 / (8 * tau * pi))
    if tag == "indicator":
        return mp.mpf(1) / 4 - 1 / (2 * pi), 1 / (2 * pi * tau), 0
    if tag == "sign":
        return 1 - 2 / pi, 2 / (pi * tau), 0
    if tag == "quad":
        s2, s1, _ = (mp.mpf(v) for v in params)
        return 2 * tau ** 2 * s2 ** 2, s1 ** 2, s2 ** 2
    if tag == "cos":
        return mp.mpf(1) / 2 + mp.exp(-2 * tau) / 2 - mp.exp(-tau), 0, mp.exp(-tau) / 4
    if tag == "sin":
        return mp.mpf(1) / 2 - mp.exp(-2 * tau) / 2 - tau * mp.exp(-tau), mp.exp(-tau), 0
    if tag == "erf":
        r = 2 * tau / (2 * tau + 1)
        return 2 / pi * (mp.asin(r) - r), 4 / pi / (2 * tau + 1), 0
    if tag == "gauss-exp":
        return 1 / mp.sqrt(2 * tau + 1) - 1 / (tau + 1), 0, 1 / (4 * (tau + 1) ** 3)
    raise KeyError(tag)


def _gauss_mean(f, tau):
    s = np.sqrt(tau)
    dens = lambda x: np.exp(-x * x / (2 * tau)) / np.sqrt(2 * np.pi * tau)
    val, _ = integrate.quad(lambda x: f(x) * dens(x), -40 * s, 40 * s, limit=400, epsabs=1e-14, epsrel=1e-13)
    return val


def moment_coefficients(tag, tau, params=()):
    """Each activation is given as (s, s' off 0, jump of s at 0, s'' off 0, jump of s' at 0).

    Jumps contribute through the density at 0; the derivative of the density
    vanishes there, so a jump in ``s`` adds nothing to ``E[s'']``.
    """
    zero = lambda x: 0.0 * x
    one = lambda x: 1.0 + 0.0 * x
    step = lambda x: (x > 0).astype(float) if isinstance(x, np.ndarray) else float(x > 0)
    if tag == "lrelu":
        sp, sm = params
    if tag == "quad":
        s2, s1, s0 = params
    funcs = {
        "linear": (lambda x: x, one, 0.0, zero, 0.0),
        "relu": (lambda x: np.maximum(x, 0.0), step, 0.0, zero, 1.0),
        "abs": (np.abs, np.sign, 0.0, zero, 2.0),
        "indicator": (step, zero, 1.0, zero, 0.0),
        "sign": (np.sign, zero, 2.0, zero, 0.0),
        "cos": (np.cos, lambda x: -np.sin(x), 0.0, lambda x: -np.cos(x), 0.0),
        "sin": (np.sin, np.cos, 0.0, lambda x: -np.sin(x), 0.0),
        "erf": (special.erf, lambda x: 2 / np.sqrt(np.pi) * np.exp(-x * x), 0.0,
                lambda x: -4 * x / np.sqrt(np.pi) * np.exp(-x * x), 0.0),
        "gauss-exp": (lambda x: np.exp(-x * x / 2), lambda x: -x * np.exp(-x * x / 2), 0.0,
                      lambda x: (x * x - 1) * np.exp(-x * x / 2), 0.0),
    }
    if tag == "lrelu":
        funcs["lrelu"] = (lambda x: sp * np.maximum(x, 0.0) + sm * np.maximum(-x, 0.0),
                          lambda x: np.where(x > 0, sp, -sm), 0.0, zero, sp + sm)
    if tag == "quad":
        funcs["quad"] = (lambda x: s2 * x * x + s1 * x + s0, lambda x: 2 * s2 * x + s1, 0.0,
                         lambda x: 2 * s2 + 0.0 * x, 0.0)
    s, ds, jump_s, dds, jump_ds = funcs[tag]
    f0 = 1 / np.sqrt(2 * np.pi * tau)
    mean = _gauss_mean(s, tau)
    var = _gauss_mean(lambda x: s(x) ** 2, tau) - mean ** 2
    d1 = (_gauss_mean(ds, tau) + jump_s * f0) ** 2
    d2 = (_gauss_mean(dds, tau) + jump_ds * f0) ** 2 / 4
    return var - tau * d1, d1, d2
