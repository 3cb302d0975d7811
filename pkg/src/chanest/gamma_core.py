"""Gamma-family special functions, shape root solver and samplers.

Everything here works in the linear power domain (mW). Random draws take an
explicit ``numpy.random.Generator`` so callers own reproducibility.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import TruncationMassUnderflowError

EULER_GAMMA = 0.5772156649015329

# Below this the truncated tail cannot be represented in double precision.
TRUNCATION_MASS_FLOOR = 1e-300


@dataclass(frozen=True)
class GammaParams:
    """One mixture component: shape ``m`` and scale ``omega`` (mW).

    Mean power in the linear domain is ``m * omega``.
    """

    m: float
    omega: float

    def __post_init__(self):
        if not (math.isfinite(self.m) and self.m > 0):
            raise ValueError(f"shape must be finite and > 0, got {self.m}")
        if not (math.isfinite(self.omega) and self.omega > 0):
            raise ValueError(f"scale must be finite and > 0, got {self.omega}")

    @property
    def mean(self) -> float:
        return self.m * self.omega


def gamma_logpdf(y, p: GammaParams):
    """Log-density of Gamma(m, omega) at linear power y (scalar or array)."""
    y = np.asarray(y, dtype=float)
    if np.any(~np.isfinite(y)) or np.any(y <= 0):
        raise ValueError("y must be finite and > 0")
    z = y / p.omega
    out = (p.m - 1.0) * np.log(z) - z - special.gammaln(p.m) - math.log(p.omega)
    return float(out) if out.ndim == 0 else out


def reg_lower_gamma(a: float, x):
    """Regularized lower incomplete gamma P(a, x) = gamma(a, x) / Gamma(a)."""
    if not (math.isfinite(a) and a > 0):
        raise ValueError(f"a must be finite and > 0, got {a}")
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("x must be >= 0")
    out = special.gammainc(a, x)
    return float(out) if out.ndim == 0 else out


def inv_reg_lower_gamma(a: float, q):
    """Inverse of ``reg_lower_gamma`` in x: returns x with P(a, x) = q."""
    if not (math.isfinite(a) and a > 0):
        raise ValueError(f"a must be finite and > 0, got {a}")
    q = np.asarray(q, dtype=float)
    if np.any(q < 0) or np.any(q >= 1):
        raise ValueError("q must lie in [0, 1)")
    out = special.gammaincinv(a, q)
    return float(out) if out.ndim == 0 else out


def digamma(x, mode: str = "exact"):
    """Digamma function, exact or the 3-term asymptotic approximation
    log(x) - 1/(2x) - 1/(12x^2)."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0) or np.any(~np.isfinite(x)):
        raise ValueError("x must be finite and > 0")
    if mode == "exact":
        out = special.digamma(x)
    elif mode == "paper_approx":
        out = np.log(x) - 1.0 / (2.0 * x) - 1.0 / (12.0 * x * x)
    else:
        raise ValueError(f"unknown digamma mode {mode!r}")
    return float(out) if out.ndim == 0 else out


def _digamma_deriv(x: float, mode: str) -> float:
    if mode == "exact":
        return float(special.polygamma(1, x))
    return 1.0 / x + 1.0 / (2.0 * x * x) + 1.0 / (6.0 * x ** 3)


def solve_shape(L: float, mode: str = "exact", tol: float = 1e-12) -> float:
    """Solve digamma(m) = L for m > 0.

    Digamma is strictly increasing on (0, inf) with range (-inf, inf), so a
    unique root always exists. Safeguarded Newton inside a bracket grown
    geometrically from m = 1.
    """
    if not math.isfinite(L):
        raise ValueError(f"L must be finite, got {L}")

    lo, hi = 1.0, 1.0
    if digamma(1.0, mode) < L:
        while digamma(hi, mode) < L:
            hi *= 2.0
        lo = hi / 2.0
    else:
        while digamma(lo, mode) > L:
            lo /= 2.0
            if lo < 1e-300:
                raise ValueError(f"no representable root for L={L}")
        hi = lo * 2.0

    m = 0.5 * (lo + hi)
    for _ in range(200):
        f = digamma(m, mode) - L
        if abs(f) < tol:
            return m
        if f > 0:
            hi = m
        else:
            lo = m
        step = f / _digamma_deriv(m, mode)
        cand = m - step
        # fall back to bisection when Newton leaves the bracket
        m = cand if lo < cand < hi else 0.5 * (lo + hi)
    return m


def sample_gamma(p: GammaParams, rng: np.random.Generator, size=None):
    """Draw from Gamma(m, omega)."""
    return rng.gamma(p.m, p.omega, size)


def sample_truncated_gamma(p: GammaParams, c: float, rng: np.random.Generator,
                           size=None):
    """Draw from Gamma(m, omega) conditioned on y <= c, by inverse CDF.

    Inverse-CDF sampling keeps the cost bounded even when the truncated mass
    is tiny (rejection would stall there).
    """
    if not (math.isfinite(c) and c > 0):
        raise ValueError(f"c must be finite and > 0, got {c}")
    mass = reg_lower_gamma(p.m, c / p.omega)
    if mass < TRUNCATION_MASS_FLOOR:
        raise TruncationMassUnderflowError(
            f"P(m={p.m}, c/omega={c / p.omega:.3g}) = {mass:.3g}: component "
            "has no mass below the threshold")
    u = rng.random(size)
    y = p.omega * special.gammaincinv(p.m, u * mass)
    y = np.minimum(y, c)
    y = np.maximum(y, np.finfo(float).tiny)
    return float(y) if np.ndim(y) == 0 else y
