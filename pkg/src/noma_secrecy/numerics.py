"""Special functions and quadrature used by the closed-form expressions."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy import integrate, special

EULER_GAMMA = 0.5772156649015329

_CF_EPS = 1e-16
_CF_MAX_ITER = 2000
_SERIES_MAX_TERMS = 200


class IntegrationError(RuntimeError):
    """Quadrature failed to reach its tolerance.

    ``partial`` is the best value obtained and ``bound`` an estimate of its
    absolute error.
    """

    def __init__(self, msg: str, partial: float, bound: float):
        super().__init__(f"{msg} (partial={partial!r}, bound={bound!r})")
        self.partial = partial
        self.bound = bound


def gamma_fn(z):
    """Gamma function for z > 0 (exact factorials at small positive integers)."""
    if np.ndim(z) == 0:
        z = float(z)
        if not z > 0:
            raise ValueError(f"gamma_fn requires z > 0, got {z!r}")
        return math.gamma(z)
    z = np.asarray(z, dtype=float)
    if np.any(~(z > 0)):
        raise ValueError("gamma_fn requires z > 0")
    return special.gamma(z)


def _gamma1p_minus1_over_s(s: float) -> float:
    """(Gamma(1+s) - 1) / s, accurate as s -> 0."""
    if s == 0.0:
        return -EULER_GAMMA
    if s >= 0.1:
        return (math.gamma(1.0 + s) - 1.0) / s
    # ln Gamma(1+s) = -gamma s + sum_{k>=2} (-1)^k zeta(k) s^k / k
    log_g = -EULER_GAMMA * s
    for k in range(2, 40):
        term = (-1) ** k * special.zeta(k) * s**k / k
        log_g += term
        if abs(term) < 1e-18:
            break
    return math.expm1(log_g) / s


def _upper_gamma_cf_scaled(s: float, x: np.ndarray) -> np.ndarray:
    """exp(x) * Gamma(s, x) by modified Lentz continued fraction (x >= 1)."""
    # f = b0 + a1/(b1 + a2/(b2 + ...)), b_i = x + 1 - s + 2i, a_i = -i(i - s)
    tiny = 1e-300
    b = x + 1.0 - s
    f = np.where(b == 0.0, tiny, b)
    c = f.copy()
    d = np.zeros_like(x)
    active = np.ones(x.shape, dtype=bool)
    for i in range(1, _CF_MAX_ITER + 1):
        an = -i * (i - s)
        b = b + 2.0
        d = b + an * d
        d = np.where(d == 0.0, tiny, d)
        c = b + an / c
        c = np.where(c == 0.0, tiny, c)
        d = 1.0 / d
        step = c * d
        f = np.where(active, f * step, f)
        active &= np.abs(step - 1.0) > _CF_EPS
        if not active.any():
            break
    else:
        raise ArithmeticError("continued fraction for Gamma(s, x) did not converge")
    return np.exp(s * np.log(x)) / f


def _upper_gamma_series(s: float, x: np.ndarray) -> np.ndarray:
    """Gamma(s, x) for 0 < x < 1 from the alternating lower-gamma series.

    Gamma(s, x) = [Gamma(1+s) - x**s] / s - sum_{k>=1} (-1)^k x^(s+k) / (k! (s+k)),
    with the bracket evaluated without cancellation so s = 0 gives E1(x).
    """
    log_x = np.log(x)
    if s == 0.0:
        head = -EULER_GAMMA - log_x
    else:
        head = _gamma1p_minus1_over_s(s) - np.expm1(s * log_x) / s
    total = np.zeros_like(x)
    xs = np.exp(s * log_x)
    term_pow = np.ones_like(x)
    for k in range(1, _SERIES_MAX_TERMS):
        term_pow = term_pow * (-x) / k
        term = term_pow * xs / (s + k)
        total += term
        if np.all(np.abs(term) <= 1e-17 * np.abs(head + 1e-300)):
            break
    return head - total


def upper_incomplete_gamma(s: float, x):
    """Upper incomplete gamma Gamma(s, x) for s in [0, 2] and x > 0.

    s = 0 gives the exponential integral E1(x). Uses a continued fraction
    for x >= 1 and a power series below.
    """
    s = float(s)
    if not 0.0 <= s <= 2.0:
        raise ValueError(f"s must lie in [0, 2], got {s!r}")
    scalar = np.ndim(x) == 0
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(~(x > 0)):
        raise ValueError("upper_incomplete_gamma requires x > 0")
    out = np.empty_like(x)
    hi = x >= 1.0
    if hi.any():
        out[hi] = np.exp(-x[hi]) * _upper_gamma_cf_scaled(s, x[hi])
    if (~hi).any():
        out[~hi] = _upper_gamma_series(s, x[~hi])
    return float(out[0]) if scalar else out


def upper_incomplete_gamma_scaled(s: float, x):
    """exp(x) * Gamma(s, x); stays finite where Gamma(s, x) underflows."""
    s = float(s)
    if not 0.0 <= s <= 2.0:
        raise ValueError(f"s must lie in [0, 2], got {s!r}")
    scalar = np.ndim(x) == 0
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(~(x > 0)):
        raise ValueError("upper_incomplete_gamma_scaled requires x > 0")
    out = np.empty_like(x)
    hi = x >= 1.0
    if hi.any():
        out[hi] = _upper_gamma_cf_scaled(s, x[hi])
    if (~hi).any():
        out[~hi] = np.exp(x[~hi]) * _upper_gamma_series(s, x[~hi])
    return float(out[0]) if scalar else out


@dataclass(frozen=True)
class PositionNodes:
    """Gauss-Chebyshev nodes for averaging over a uniformly placed user.

    For a user uniform in a disc of radius R,
    E[g(1 + d**alpha)] ~= sum_u b_u g(c_u).

    The raw weights b sum to (pi/2U)/sin(pi/2U), slightly above one, so a
    CDF built from them overshoots 1. ``w`` is b rescaled to unit mass and
    is what the distribution code uses.
    """

    theta: np.ndarray
    b: np.ndarray
    c: np.ndarray
    w: np.ndarray


@lru_cache(maxsize=256)
def _position_nodes_cached(U: int, radius: float, alpha: float) -> PositionNodes:
    u = np.arange(1, U + 1)
    theta = np.cos((2 * u - 1) * np.pi / (2 * U))
    b = np.pi / (2 * U) * np.sqrt(1.0 - theta**2) * (theta + 1.0)
    c = 1.0 + (radius * (theta + 1.0) / 2.0) ** alpha
    w = b / b.sum()
    for arr in (theta, b, c, w):
        arr.setflags(write=False)
    return PositionNodes(theta=theta, b=b, c=c, w=w)


def position_nodes(U: int, radius: float, alpha: float) -> PositionNodes:
    if int(U) != U or U < 1:
        raise ValueError(f"U must be a positive integer, got {U!r}")
    if radius < 0:
        raise ValueError("radius must be >= 0")
    return _position_nodes_cached(int(U), float(radius), float(alpha))


@lru_cache(maxsize=32)
def laguerre_rule(n: int, delta: float) -> tuple[np.ndarray, np.ndarray]:
    """Nodes/weights for integrals against u**(delta-1) * exp(-u) on [0, inf)."""
    nodes, weights = special.roots_genlaguerre(n, delta - 1.0)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def _quad(f, a, b, epsabs, epsrel):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = integrate.quad(f, a, b, epsabs=epsabs, epsrel=epsrel, limit=200)
    return val, err


_MAX_PANELS = 2000
_QUIET_PANELS = 6


def _log_panels(f, hi: float, center: float, rel_tol: float, abs_tol: float) -> float:
    """Integrate f over [0, hi] with geometric panels [center*2^k, center*2^(k+1)].

    Panels are added outward from ``center`` in both directions until
    ``_QUIET_PANELS`` consecutive panels each contribute less than a
    hundredth of the running tolerance; the remaining [0, lowest] piece is
    handled by one final quadrature call.
    """
    if math.isfinite(hi) and center >= hi:
        center = hi / 2.0
    total = 0.0
    err_sum = 0.0

    def tol():
        return max(rel_tol * abs(total), abs_tol)

    def panel(a, b):
        nonlocal total, err_sum
        val, err = _quad(f, a, b, epsabs=0.01 * tol() + 1e-300, epsrel=0.1 * rel_tol)
        total += val
        err_sum += err
        return val

    # upward
    a, quiet, count = center, 0, 0
    while a < hi:
        b = min(2.0 * a, hi)
        if not math.isfinite(b):
            raise IntegrationError("upward panels overflowed", total, err_sum)
        val = panel(a, b)
        count += 1
        quiet = quiet + 1 if abs(val) <= 0.01 * tol() else 0
        if quiet >= _QUIET_PANELS:
            break
        if count > _MAX_PANELS:
            raise IntegrationError("too many upward panels", total, err_sum)
        a = b
    # downward
    b, quiet, count = center, 0, 0
    while True:
        a = 0.5 * b
        if a == 0.0 or count > _MAX_PANELS:
            break
        val = panel(a, b)
        count += 1
        quiet = quiet + 1 if abs(val) <= 0.01 * tol() else 0
        b = a
        if quiet >= _QUIET_PANELS:
            break
    panel(0.0, b)
    if err_sum > 10.0 * tol():
        raise IntegrationError("quadrature error estimate above tolerance", total, err_sum)
    return total


def integrate_semi_infinite(
    f: Callable[[float], float],
    rel_tol: float = 1e-6,
    scale: float = 1.0,
    abs_tol: float = 0.0,
) -> float:
    """Integral of ``f`` over [0, inf).

    ``f`` must be integrable with eventually exponential decay. ``scale``
    locates the bulk of the integrand; panels grow geometrically away from
    it in both directions. Raises :class:`IntegrationError` on failure.
    """
    if not scale > 0:
        raise ValueError("scale must be positive")
    return _log_panels(f, math.inf, float(scale), rel_tol, abs_tol)


def integrate_finite(
    f: Callable[[float], float],
    a: float,
    b: float,
    rel_tol: float = 1e-6,
    scale: float | None = None,
    abs_tol: float = 0.0,
) -> float:
    """Integral of ``f`` over [a, b].

    Substitutes x = a + (b - a) t**2, which removes x**(-1/2)-type and softens
    x**(-delta)-type singularities at the left endpoint. With ``a == 0`` and a
    ``scale`` hint, geometric panels around ``scale`` are used instead (for
    integrands concentrated far below ``b``).
    """
    if not a < b:
        raise ValueError("integrate_finite requires a < b")
    if scale is not None and a == 0.0:
        return _log_panels(f, float(b), float(scale), rel_tol, abs_tol)
    width = b - a

    def g(t):
        return 2.0 * width * t * f(a + width * t * t)

    val, err = _quad(g, 0.0, 1.0, epsabs=abs_tol, epsrel=0.1 * rel_tol)
    if err > 10.0 * max(rel_tol * abs(val), abs_tol):
        raise IntegrationError("finite quadrature did not converge", val, err)
    return val
