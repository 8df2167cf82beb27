"""CDFs and PDFs of the legitimate-user and eavesdropper SINRs.

Legitimate users are averaged over their disc with Gauss-Chebyshev position
nodes. Eavesdropper SINRs are maxima over a homogeneous PPP on the whole
plane; their CDFs all take the form exp(-A(x)) where A is the PPP void
exponent 2*pi*lambda_e * int_0^inf Pr(one Eve at r exceeds x) r dr.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import special

from .config import SystemConfig
from .numerics import (
    gamma_fn,
    laguerre_rule,
    position_nodes,
    upper_incomplete_gamma_scaled,
)

LAGUERRE_ORDER = 64
LAGUERRE_ORDER_NEAR_POLE = 256
NEAR_POLE = 2.0

ArrayFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class DistributionHandle:
    cdf: ArrayFn
    pdf: ArrayFn
    support_hint: float | None
    provenance: str

    def median(self) -> float:
        """Point where the CDF crosses 1/2, by bisection on log10(x)."""
        F = lambda v: float(self.cdf(np.array([v]))[0])  # noqa: E731
        top = self.support_hint * (1 - 1e-12) if self.support_hint else 1e300
        hi = min(1.0, top)
        while F(hi) < 0.5 and hi < top:
            hi = min(hi * 1e3, top)
        lo = hi
        while F(lo) >= 0.5 and lo > 1e-300:
            lo /= 1e3
        a, b = math.log10(lo), math.log10(hi)
        for _ in range(80):
            mid = 0.5 * (a + b)
            if F(10.0**mid) < 0.5:
                a = mid
            else:
                b = mid
        return 10.0 ** (0.5 * (a + b))


def _form(cfg: SystemConfig, form: str | None) -> str:
    form = form or cfg.scheme
    if form not in ("cd", "pd"):
        raise ValueError(f"form must be 'cd' or 'pd', got {form!r}")
    if form == "pd" and cfg.K != 1:
        raise ValueError("the PD form requires K = 1")
    return form


def _eta(cfg: SystemConfig) -> float:
    return cfg.eta_value


def _as_array(x) -> tuple[np.ndarray, bool]:
    return np.atleast_1d(np.asarray(x, dtype=float)), np.ndim(x) == 0


def _finish(out: np.ndarray, scalar: bool):
    return float(out[0]) if scalar else out


# -- legitimate users -------------------------------------------------------


def _ipsic_survival(t: np.ndarray, omega: float, K: int) -> np.ndarray:
    """E_I[Pr(Y > t (1 + omega I'))] with Y ~ Gamma(K, 1), I' ~ Gamma(K, 1).

    Equals exp(-t) * sum_i sum_j C(i,j) t^i/i! omega^j Gamma(K+j)/Gamma(K)
    / (1 + t omega)^(K+j).
    """
    tw = t * omega
    acc = np.zeros_like(t)
    for i in range(K):
        for j in range(i + 1):
            coef = math.comb(i, j) / math.factorial(i) * math.gamma(K + j) / math.gamma(K)
            acc += coef * t ** (i - j) * tw**j / (1.0 + tw) ** (K + j)
    return np.exp(-t) * acc


def cdf_gamma_n(cfg: SystemConfig, x, form: str | None = None):
    """CDF of the n-th (nearby) user's SINR for a user uniform in D1."""
    form = _form(cfg, form)
    x, scalar = _as_array(x)
    nodes = position_nodes(cfg.U, cfg.r_d1, cfg.alpha)
    xp = np.maximum(x, 0.0)[..., None]
    t = xp * nodes.c / (_eta(cfg) * cfg.rho * cfg.a_n)
    if cfg.sic.is_perfect:
        inner = special.gammainc(cfg.K, t) if form == "cd" else -np.expm1(-t)
    else:
        omega = cfg.varpi * cfg.rho * cfg.omega_i
        if form == "cd":
            inner = 1.0 - _ipsic_survival(t, omega, cfg.K)
        else:
            inner = 1.0 - np.exp(-t) / (1.0 + t * omega)
    out = inner @ nodes.w
    out = np.where(x > 0, out, 0.0)
    return _finish(out, scalar)


def cdf_gamma_n_asymptotic(cfg: SystemConfig, x, form: str | None = None):
    """High-SNR limit of the n-th user's ipSIC CDF; independent of rho."""
    if cfg.sic.is_perfect:
        raise ValueError("the asymptotic ipSIC CDF is undefined for perfect SIC")
    form = _form(cfg, form)
    x, scalar = _as_array(x)
    nodes = position_nodes(cfg.U, cfg.r_d1, cfg.alpha)
    v = np.maximum(x, 0.0)[..., None] * nodes.c * cfg.varpi * cfg.omega_i / (_eta(cfg) * cfg.a_n)
    if form == "cd":
        K = cfg.K
        surv = np.zeros_like(v)
        for i in range(K):
            surv += v**i * math.gamma(K + i) / (math.factorial(i) * math.gamma(K)) / (1.0 + v) ** (K + i)
        inner = 1.0 - surv
    else:
        inner = v / (1.0 + v)
    out = np.where(x > 0, inner @ nodes.w, 0.0)
    return _finish(out, scalar)


def cdf_gamma_m(cfg: SystemConfig, x, form: str | None = None):
    """CDF of the m-th (distant) user's SINR; equals 1 from a_m/a_n on."""
    form = _form(cfg, form)
    x, scalar = _as_array(x)
    ceiling = cfg.a_m / cfg.a_n
    nodes = position_nodes(cfg.U, cfg.r_d2, cfg.alpha)
    below = (x > 0) & (x < ceiling)
    xb = np.where(below, x, 0.0)[..., None]
    with np.errstate(divide="ignore", invalid="ignore"):
        t = xb * nodes.c / (_eta(cfg) * cfg.rho * (cfg.a_m - xb * cfg.a_n))
    inner = special.gammainc(cfg.K, t) if form == "cd" else -np.expm1(-t)
    out = np.where(below, inner @ nodes.w, np.where(x >= ceiling, 1.0, 0.0))
    return _finish(out, scalar)


# -- eavesdroppers ----------------------------------------------------------


def _pppl_terms(K: int, delta: float, factorial: str = "i", shift: int = 0):
    """(weight, power) pairs of sum_i sum_j C(i,j) Gamma(j+delta)/n! s^p.

    ``factorial`` picks n = i (the derived form) or n = j; ``shift`` lowers
    every power by that amount.
    """
    terms = []
    for i in range(K):
        for j in range(i + 1):
            n = i if factorial == "i" else j
            w = math.comb(i, j) * math.gamma(j + delta) / math.factorial(n)
            terms.append((w, i - j - delta - shift))
    return terms


def _power_exp_family(lam_coef: float, terms, s_of_x: ArrayFn, ds_of_x: ArrayFn, upper: float | None):
    """CDF/PDF for F(x) = exp(-L sum_k w_k s^p_k e^-s) with s = s(x) increasing."""

    def A(s):
        acc = np.zeros_like(s)
        for w, p in terms:
            acc += w * s**p
        return lam_coef * acc * np.exp(-s)

    def inside(x):
        ok = x > 0
        if upper is not None:
            ok &= x < upper
        return ok

    def cdf(x):
        x, scalar = _as_array(x)
        ok = inside(x)
        xs = np.where(ok, x, 1.0)
        with np.errstate(all="ignore"):
            val = np.exp(-A(s_of_x(xs)))
        if lam_coef == 0:
            out = np.where(x > 0, 1.0, 0.0)
        else:
            out = np.where(ok, val, np.where(x > 0, 1.0, 0.0))
        return _finish(out, scalar)

    def pdf(x):
        x, scalar = _as_array(x)
        ok = inside(x)
        xs = np.where(ok, x, 1.0)
        with np.errstate(all="ignore"):
            s = s_of_x(xs)
            F = np.exp(-A(s))
            acc = np.zeros_like(s)
            for w, p in terms:
                acc += w * (s**p - p * s ** (p - 1.0))
            dens = F * lam_coef * np.exp(-s) * acc * ds_of_x(xs)
        out = np.where(ok & (F > 0) & np.isfinite(dens), dens, 0.0)
        return _finish(out, scalar)

    return cdf, pdf


def _closed_form_eve(cfg: SystemConfig, phi: float, label: str, shifted: bool = False, factorial: str = "i"):
    lam = cfg.delta * math.pi * cfg.lambda_e
    terms = _pppl_terms(cfg.K, cfg.delta, factorial=factorial, shift=1 if shifted else 0)
    cdf, pdf = _power_exp_family(lam, terms, lambda x: x / phi, lambda x: np.full_like(x, 1.0 / phi), None)
    return DistributionHandle(cdf, pdf, None, label)


def _pd_closed_form_eve(cfg: SystemConfig, phi: float, label: str):
    # exp(-mu x^-delta e^(-x/phi)), mu = delta pi lambda_e phi^delta Gamma(delta)
    mu = cfg.delta * math.pi * cfg.lambda_e * phi**cfg.delta * gamma_fn(cfg.delta)
    d = cfg.delta

    def cdf(x):
        x, scalar = _as_array(x)
        xs = np.where(x > 0, x, 1.0)
        with np.errstate(all="ignore"):
            val = np.exp(-mu * xs**-d * np.exp(-xs / phi))
        return _finish(np.where(x > 0, val, 0.0), scalar)

    def pdf(x):
        x, scalar = _as_array(x)
        xs = np.where(x > 0, x, 1.0)
        with np.errstate(all="ignore"):
            e = np.exp(-xs / phi)
            F = np.exp(-mu * xs**-d * e)
            dens = F * mu * e * (1.0 / (phi * xs**d) + d / xs ** (d + 1.0))
        return _finish(np.where((x > 0) & (F > 0) & np.isfinite(dens), dens, 0.0), scalar)

    return DistributionHandle(cdf, pdf, None, label)


def _ipsic_q(t: np.ndarray, beta: float, K: int):
    """q(t) = exp(t) Pr(W > t) and q'(t) for W = Y / (1 + beta Z'), Z' ~ Gamma(K, 1)."""
    q = np.zeros_like(t)
    dq = np.zeros_like(t)
    bt = 1.0 + beta * t
    for i in range(K):
        for j in range(i + 1):
            a = math.comb(i, j) / math.factorial(i) * beta**j * math.gamma(K + j) / math.gamma(K)
            n = K + j
            ti = t**i
            q += a * ti / bt**n
            dti = i * t ** (i - 1) if i > 0 else 0.0
            dq += a * (dti / bt**n - n * beta * ti / bt ** (n + 1))
    return q, dq


def _ipsic_inner(s: np.ndarray, beta: float, K: int, delta: float):
    """Q(s) = int u^(delta-1) e^-u q(s+u) du and Qp(s), the same with (s+u)(q - q')."""
    Q = np.empty_like(s)
    Qp = np.empty_like(s)
    # q(s + u) has a pole at u = -(s + 1/beta); close poles need more nodes
    near = s + 1.0 / beta < NEAR_POLE
    for order, mask in ((LAGUERRE_ORDER, ~near), (LAGUERRE_ORDER_NEAR_POLE, near)):
        if not mask.any():
            continue
        nodes, weights = laguerre_rule(order, delta)
        t = s[mask][..., None] + nodes
        q, dq = _ipsic_q(t, beta, K)
        Q[mask] = q @ weights
        Qp[mask] = (t * (q - dq)) @ weights
    return Q, Qp


def _cd_ipsic_eve(cfg: SystemConfig, phi: float, label: str):
    """Eve CDF/PDF with residual interference, any K.

    With s = x/phi the void exponent is
    A = pi lambda delta s^-delta e^-s int u^(delta-1) e^-u q(s+u) du,
    the inner integral taken by generalized Gauss-Laguerre quadrature. The
    rule loses accuracy once s + 1/beta << 1 (residual interference far
    above the Eve noise floor, beta = varpi rho_e Omega_Ie >~ 100).
    """
    beta = cfg.varpi * cfg.rho_e * cfg.omega_ie
    d = cfg.delta
    K = cfg.K
    lam = math.pi * cfg.lambda_e * d

    def parts(xs):
        s = xs / phi
        Q, Qp = _ipsic_inner(s, beta, K, d)
        return s, Q, Qp

    def cdf(x):
        x, scalar = _as_array(x)
        xs = np.where(x > 0, x, 1.0)
        with np.errstate(all="ignore"):
            s, Q, _ = parts(xs)
            val = np.exp(-lam * s**-d * np.exp(-s) * Q)
        if cfg.lambda_e == 0:
            val = np.ones_like(val)
        return _finish(np.where(x > 0, val, 0.0), scalar)

    def pdf(x):
        x, scalar = _as_array(x)
        xs = np.where(x > 0, x, 1.0)
        with np.errstate(all="ignore"):
            s, Q, Qp = parts(xs)
            e = np.exp(-s)
            F = np.exp(-lam * s**-d * e * Q)
            dens = F * lam / phi * s ** (-d - 1.0) * e * Qp
        return _finish(np.where((x > 0) & (F > 0) & np.isfinite(dens), dens, 0.0), scalar)

    return DistributionHandle(cdf, pdf, None, label)


def _pd_ipsic_eve(cfg: SystemConfig, phi: float, label: str):
    """K = 1 Eve with residual interference, via the incomplete-gamma closed form.

    A(x) = K0 H(x) e^(-x/phi) G(c), K0 = delta pi lambda phi Gamma(delta),
    H = (phi + x beta)^(delta-1) (x beta)^-delta, c = (phi + x beta)/(phi beta),
    G(c) = e^c Gamma(1 - delta, c).
    """
    beta = cfg.varpi * cfg.rho_e * cfg.omega_ie
    d = cfg.delta
    K0 = d * math.pi * cfg.lambda_e * phi * gamma_fn(d)

    def parts(xs):
        base = phi + xs * beta
        xb = xs * beta
        c = base / (phi * beta)
        G = upper_incomplete_gamma_scaled(1.0 - d, c)
        H = base ** (d - 1.0) * xb**-d
        e = np.exp(-xs / phi)
        return base, xb, c, G, H, e

    def cdf(x):
        x, scalar = _as_array(x)
        xs = np.where(x > 0, x, 1.0)
        with np.errstate(all="ignore"):
            _, _, _, G, H, e = parts(xs)
            val = np.exp(-K0 * H * e * G)
        return _finish(np.where(x > 0, val, 0.0), scalar)

    def pdf(x):
        x, scalar = _as_array(x)
        xs = np.where(x > 0, x, 1.0)
        with np.errstate(all="ignore"):
            base, xb, c, G, H, e = parts(xs)
            F = np.exp(-K0 * H * e * G)
            dH = (d - 1.0) * beta * base ** (d - 2.0) * xb**-d - d * beta * base ** (d - 1.0) * xb ** (-d - 1.0)
            dens = F * K0 * e * (H * c**-d / phi - dH * G)
        return _finish(np.where((x > 0) & (F > 0) & np.isfinite(dens), dens, 0.0), scalar)

    return DistributionHandle(cdf, pdf, None, label)


def eve_external_n(cfg: SystemConfig, form: str | None = None, variant: str = "derived") -> DistributionHandle:
    """Most harmful external Eve's SINR when decoding the n-th user's message.

    ``variant="shifted"`` gives the perfect-SIC exponent with the extra
    phi/x factor, kept only for cross-checking against simulation.
    """
    form = _form(cfg, form)
    phi = _eta(cfg) * cfg.rho_e * cfg.a_n
    label = f"external-n/{cfg.sic.label}/{form}"
    if variant not in ("derived", "shifted"):
        raise ValueError(f"unknown variant {variant!r}")
    if variant == "shifted":
        return _closed_form_eve(cfg, phi, label + "/shifted", shifted=True)
    if cfg.sic.is_perfect:
        if form == "pd":
            return _pd_closed_form_eve(cfg, phi, label)
        return _closed_form_eve(cfg, phi, label)
    if form == "pd":
        return _pd_ipsic_eve(cfg, phi, label)
    return _cd_ipsic_eve(cfg, phi, label)


def eve_external_m(cfg: SystemConfig, form: str | None = None, factorial: str = "i") -> DistributionHandle:
    """Most harmful external Eve's SINR for the m-th user's message.

    Supported on [0, a_m/a_n). ``factorial="j"`` swaps 1/i! for 1/j! in the
    double sum (an alternative reading, for cross-checking only).
    """
    form = _form(cfg, form)
    eta_rho_e = _eta(cfg) * cfg.rho_e
    a_m, a_n = cfg.a_m, cfg.a_n
    ceiling = a_m / a_n
    lam = cfg.delta * math.pi * cfg.lambda_e
    label = f"external-m/{form}"

    def s_of_x(x):
        return x / (eta_rho_e * (a_m - a_n * x))

    def ds_of_x(x):
        return a_m / (eta_rho_e * (a_m - a_n * x) ** 2)

    # at K = 1 the double sum collapses to Gamma(delta) s^-delta, the PD form
    terms = _pppl_terms(cfg.K, cfg.delta, factorial=factorial)
    if factorial != "i":
        label += f"/1/{factorial}!"
    cdf, pdf = _power_exp_family(lam, terms, s_of_x, ds_of_x, ceiling)
    return DistributionHandle(cdf, pdf, ceiling, label)


def eve_internal(cfg: SystemConfig, form: str | None = None, factorial: str = "i") -> DistributionHandle:
    """SNR of the distant user wiretapping the nearby user's message.

    The wiretapper has already removed its own signal, so the SNR is
    interference free; the wiretap field is the Eve PPP (see montecarlo).
    """
    form = _form(cfg, form)
    phi = _eta(cfg) * cfg.rho_e * cfg.a_n
    label = f"internal/{form}" + ("/1/j!" if factorial == "j" else "")
    if form == "pd" and factorial == "i":
        return _pd_closed_form_eve(cfg, phi, label)
    return _closed_form_eve(cfg, phi, label, factorial=factorial)


def ppp_void_exponent_truncated(cfg: SystemConfig, x: float, radius: float, which: str = "external-n") -> float:
    """Void exponent restricted to Eves within ``radius`` (numerical, for reports).

    Returns 2 pi lambda int_0^radius Pr(single Eve at r beats x) r dr.
    """
    from .numerics import integrate_finite

    d = cfg.delta
    phi = _eta(cfg) * cfg.rho_e * cfg.a_n
    K = cfg.K

    if which == "external-m":
        if x >= cfg.a_m / cfg.a_n:
            return 0.0
        scale = _eta(cfg) * cfg.rho_e * (cfg.a_m - cfg.a_n * x) / x
        beta = 0.0
    else:
        scale = phi / x
        beta = 0.0 if (which == "internal" or cfg.sic.is_perfect) else cfg.varpi * cfg.rho_e * cfg.omega_ie

    def single(v):  # v = r**alpha, probability one Eve beats x
        t = np.array([(1.0 + v) / scale])
        if beta == 0.0:
            return float(special.gammaincc(K, t)[0])
        q, _ = _ipsic_q(t, beta, K)
        return float(np.exp(-t[0]) * q[0])

    # r dr = (delta/2) v^(delta-1) dv
    upper = radius**cfg.alpha
    val = integrate_finite(lambda v: 0.5 * d * v ** (d - 1.0) * single(v), 0.0, upper,
                           rel_tol=1e-9, scale=min(scale, upper / 2))
    return 2.0 * math.pi * cfg.lambda_e * val
