"""Exact and high-SNR secrecy outage probabilities and diversity fits."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import channel
from .config import Scenario, SopEstimate, SystemConfig, validate_config
from .numerics import integrate_finite, integrate_semi_infinite, position_nodes


def secrecy_threshold(rate: float, x):
    """Legitimate SINR needed for secrecy rate ``rate`` against Eve SINR x."""
    return 2.0**rate * (1.0 + np.asarray(x)) - 1.0


def _scalar(fn):
    return lambda x: float(fn(np.array([x]))[0])


def _average_over_eve(cfg: SystemConfig, eve: channel.DistributionHandle, user_cdf, rate: float,
                      upper: float | None = None) -> float:
    """E[F_user(thr(X_E))] restricted to X_E < upper."""
    pdf = eve.pdf

    def integrand(x):
        xa = np.array([x])
        return float(pdf(xa)[0] * user_cdf(secrecy_threshold(rate, xa))[0])

    scale = eve.median()
    tol = cfg.rel_tol
    if upper is None:
        return integrate_semi_infinite(integrand, rel_tol=tol, scale=scale)
    return integrate_finite(integrand, 0.0, upper, rel_tol=tol, scale=min(scale, upper / 2))


def _m_user_tau(cfg: SystemConfig) -> float:
    """Eve SINR beyond which the m-th user's secrecy rate cannot reach R_m."""
    return 1.0 / (2.0**cfg.R_m * cfg.a_n) - 1.0


def _scenario(scenario) -> Scenario:
    return scenario if isinstance(scenario, Scenario) else Scenario(scenario)


def _pair(p_n: SopEstimate, p_m: SopEstimate, method: str) -> SopEstimate:
    value = 1.0 - (1.0 - p_n.value) * (1.0 - p_m.value)
    notes = "; ".join(n for n in (p_n.notes, p_m.notes) if n)
    return SopEstimate(value=value, method=method, notes=notes, raw=value)


def _m_user_sop(cfg, eve, user_cdf, variant: str) -> tuple[float, str]:
    tau = _m_user_tau(cfg)
    if tau <= 0:
        return 1.0, "tau <= 0: rate unreachable"
    if cfg.lambda_e == 0:
        return float(user_cdf(np.array([2.0**cfg.R_m - 1.0]))[0]), "no eavesdroppers"
    body = _average_over_eve(cfg, eve, user_cdf, cfg.R_m, upper=tau)
    tail = 1.0 - float(eve.cdf(np.array([tau]))[0])
    if variant == "truncated":
        return body, f"tail mass {tail!r} omitted"
    return body + tail, f"tail mass {tail!r}"


def sop_exact(cfg: SystemConfig, scenario, form: str | None = None, variant: str = "full",
              eve_variant: str = "derived", factorial: str = "i") -> SopEstimate:
    """Exact SOP of one scenario.

    ``variant`` selects the m-th user form: "full" adds the probability
    that the Eve SINR exceeds tau (outage is then certain), "truncated" drops
    it. ``eve_variant`` and ``factorial`` pick alternative Eve CDFs and exist
    for cross-checking against simulation only.
    """
    cfg = validate_config(cfg)
    scenario = _scenario(scenario)
    if variant not in ("full", "truncated"):
        raise ValueError(f"unknown variant {variant!r}")
    method = "exact"
    if scenario is Scenario.EXTERNAL_PAIR:
        p_n = sop_exact(cfg, Scenario.EXTERNAL_N, form, variant, eve_variant, factorial)
        p_m = sop_exact(cfg, Scenario.EXTERNAL_M, form, variant, eve_variant, factorial)
        return _pair(p_n, p_m, method)

    if scenario is Scenario.EXTERNAL_M:
        eve = channel.eve_external_m(cfg, form, factorial=factorial)
        user_cdf = lambda x: channel.cdf_gamma_m(cfg, x, form)  # noqa: E731
        raw, notes = _m_user_sop(cfg, eve, user_cdf, variant)
        return SopEstimate.analytic(raw, method, notes)

    user_cdf = lambda x: channel.cdf_gamma_n(cfg, x, form)  # noqa: E731
    rate = scenario.target_rate(cfg)
    if cfg.lambda_e == 0:
        raw = float(user_cdf(np.array([2.0**rate - 1.0]))[0])
        return SopEstimate.analytic(raw, method, "no eavesdroppers")
    if scenario is Scenario.EXTERNAL_N:
        eve = channel.eve_external_n(cfg, form, variant=eve_variant)
    else:
        eve = channel.eve_internal(cfg, form, factorial=factorial)
    raw = _average_over_eve(cfg, eve, user_cdf, rate)
    return SopEstimate.analytic(raw, method)


# -- asymptotics ------------------------------------------------------------


def _psic_kernel(cfg: SystemConfig, radius: float, y: np.ndarray) -> np.ndarray:
    """sum_u w_u (y c_u)^K / K!; y is the normalized threshold x/(eta rho a)."""
    nodes = position_nodes(cfg.U, radius, cfg.alpha)
    v = np.asarray(y)[..., None] * nodes.c
    return (v**cfg.K / math.factorial(cfg.K)) @ nodes.w


def asymptotic_cdf_n(cfg: SystemConfig, x, form: str | None = None):
    """High-SNR CDF of the n-th user's SINR.

    ipSIC: the rho-independent floor. pSIC: the leading rho^-K term.
    """
    if not cfg.sic.is_perfect:
        return channel.cdf_gamma_n_asymptotic(cfg, x, form)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.maximum(x, 0.0) / (cfg.eta_value * cfg.rho * cfg.a_n)
    return _psic_kernel(cfg, cfg.r_d1, y)


def asymptotic_cdf_m(cfg: SystemConfig, x, form: str | None = None):
    """Leading rho^-K term of the m-th user's CDF, capped at 1."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    ceiling = cfg.a_m / cfg.a_n
    below = (x > 0) & (x < ceiling)
    xb = np.where(below, x, 0.0)
    y = xb / (cfg.eta_value * cfg.rho * (cfg.a_m - xb * cfg.a_n))
    val = np.minimum(_psic_kernel(cfg, cfg.r_d2, y), 1.0)
    return np.where(below, val, np.where(x >= ceiling, 1.0, 0.0))


def sop_asymptotic(cfg: SystemConfig, scenario, form: str | None = None) -> SopEstimate:
    """High-SNR SOP with rho_e held fixed.

    ipSIC n-th user and internal scenarios give the error floor; pSIC
    scenarios and the m-th user decay as rho^-K (rho^-1 for PD).
    """
    cfg = validate_config(cfg)
    scenario = _scenario(scenario)
    method = "asymptotic"
    if scenario is Scenario.EXTERNAL_PAIR:
        return _pair(sop_asymptotic(cfg, Scenario.EXTERNAL_N, form),
                     sop_asymptotic(cfg, Scenario.EXTERNAL_M, form), method)
    if scenario is Scenario.EXTERNAL_M:
        eve = channel.eve_external_m(cfg, form)
        raw, notes = _m_user_sop(cfg, eve, lambda x: asymptotic_cdf_m(cfg, x, form), "full")
        return SopEstimate.analytic(raw, method, notes)
    user_cdf = lambda x: asymptotic_cdf_n(cfg, x, form)  # noqa: E731
    rate = scenario.target_rate(cfg)
    if cfg.lambda_e == 0:
        raw = float(user_cdf(np.array([2.0**rate - 1.0]))[0])
        return SopEstimate.analytic(raw, method, "no eavesdroppers")
    if scenario is Scenario.EXTERNAL_N:
        eve = channel.eve_external_n(cfg, form)
    else:
        eve = channel.eve_internal(cfg, form)
    raw = _average_over_eve(cfg, eve, user_cdf, rate)
    return SopEstimate.analytic(raw, method)


# -- diversity --------------------------------------------------------------

FLOOR_SPREAD = 0.05
FLOOR_WINDOW_DB = 10.0
RESIDUAL_LIMIT = 0.05


@dataclass(frozen=True)
class DiversityFit:
    """Least-squares secrecy diversity estimate.

    ``slope`` is None when the fit is rejected (large residual, no floor)
    or when a floor was detected, in which case ``floor_value`` holds the SOP
    at the top of the grid. ``raw_slope`` is always the OLS slope.
    """

    slope: float | None
    raw_slope: float
    fit_range_db: tuple[float, float]
    residual: float
    floor_detected: bool
    floor_value: float | None
    rho_db: tuple[float, ...]
    sop: tuple[float, ...]


def fit_diversity(rho_db, sop) -> DiversityFit:
    """Fit -log10 SOP against log10 rho and test for an error floor."""
    rho_db = np.asarray(rho_db, dtype=float)
    sop = np.asarray(sop, dtype=float)
    order = np.argsort(rho_db)
    rho_db, sop = rho_db[order], sop[order]
    if len(rho_db) < 5 or rho_db[-1] - rho_db[0] < 20.0:
        raise ValueError("diversity fit needs >= 5 points spanning >= 20 dB")
    if np.any(~(sop > 0)):
        raise ValueError("SOP must be positive on the fit grid")
    xs = rho_db / 10.0
    ys = -np.log10(sop)
    A = np.vstack([xs, np.ones_like(xs)]).T
    (slope, icpt), *_ = np.linalg.lstsq(A, ys, rcond=None)
    residual = float(np.sqrt(np.mean((A @ np.array([slope, icpt]) - ys) ** 2)))
    top = sop[rho_db >= rho_db[-1] - FLOOR_WINDOW_DB]
    floor = bool(len(top) >= 2 and (top.max() - top.min()) / top.max() < FLOOR_SPREAD)
    if floor:
        reported = None
    else:
        reported = float(slope) if residual < RESIDUAL_LIMIT else None
    return DiversityFit(
        slope=reported,
        raw_slope=float(slope),
        fit_range_db=(float(rho_db[0]), float(rho_db[-1])),
        residual=residual,
        floor_detected=floor,
        floor_value=float(sop[-1]) if floor else None,
        rho_db=tuple(float(r) for r in rho_db),
        sop=tuple(float(s) for s in sop),
    )


DEFAULT_DIVERSITY_GRID = (35.0, 40.0, 45.0, 50.0, 55.0)


def diversity_order(cfg: SystemConfig, scenario, rho_grid_db=DEFAULT_DIVERSITY_GRID,
                    form: str | None = None) -> DiversityFit:
    values = [sop_exact(cfg.replace(rho_db=float(r)), scenario, form).value for r in rho_grid_db]
    return fit_diversity(rho_grid_db, values)
