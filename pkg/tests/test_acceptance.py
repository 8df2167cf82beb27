"""Acceptance criteria, one test per criterion; each prints a PASS/FAIL line.

Simulation-backed criteria share the session ``batches`` fixture (10^5 drops
per case); the reduced 2x10^4 run is the head of the same stream.
"""

import math
import time

import numpy as np
import pytest

from noma_secrecy import channel as ch
from noma_secrecy import montecarlo as mc
from noma_secrecy import sop
from noma_secrecy.config import Scenario, SicMode
from noma_secrecy.experiments import pdf_mass
from noma_secrecy.numerics import (
    integrate_finite,
    integrate_semi_infinite,
    position_nodes,
    upper_incomplete_gamma,
)

from conftest import CASES, FULL_DROPS, MC_SEED, REDUCED_DROPS, record, baseline

RHO_GRID = (10.0, 20.0, 30.0, 40.0)
STANDARD_GRID = np.logspace(-3, 1.5, 46)
SCENARIOS = list(Scenario)


def verdict(ok: bool) -> str:
    return "PASS" if ok else "FAIL"


def _agreement(batches, drops, floor):
    worst, fails, start = 0.0, [], time.perf_counter()
    for case in CASES:
        batch = batches[case].head(drops)
        for r in RHO_GRID:
            cfg = baseline(*case, rho_db=r)
            for sc in SCENARIOS:
                exact = sop.sop_exact(cfg, sc).value
                est = mc.estimate_sop_mc(cfg, sc, drops, MC_SEED, batch=batch)
                tol = max(floor, 3 * est.ci_half_width)
                gap = abs(exact - est.value)
                worst = max(worst, gap / tol)
                if gap > tol:
                    fails.append((case, r, sc.value, exact, est.value, tol))
    return worst, fails, time.perf_counter() - start


def test_c1_analytic_vs_simulation(batches):
    worst_r, fails_r, t_r = _agreement(batches, REDUCED_DROPS, 0.01)
    worst_f, fails_f, _ = _agreement(batches, FULL_DROPS, 0.005)
    n = len(CASES) * len(RHO_GRID) * len(SCENARIOS)
    ok = not fails_r and not fails_f
    record(f"C1 {verdict(ok)} analytic vs MC, {n} points: 2e4 drops worst |gap|/tol {worst_r:.2f}, "
           f"1e5 drops worst |gap|/tol {worst_f:.2f} (comparison {t_r:.1f} s)")
    assert not fails_r, fails_r
    assert not fails_f, fails_f


def _k1_evaluators(cfg, form):
    out = [ch.cdf_gamma_n(cfg, STANDARD_GRID, form), ch.cdf_gamma_m(cfg, STANDARD_GRID, form)]
    if not cfg.sic.is_perfect:
        out.append(ch.cdf_gamma_n_asymptotic(cfg, STANDARD_GRID, form))
    for h in (ch.eve_external_n(cfg, form), ch.eve_external_m(cfg, form), ch.eve_internal(cfg, form)):
        out += [h.cdf(STANDARD_GRID), h.pdf(STANDARD_GRID)]
    for r in (10.0, 30.0):
        c = cfg.replace(rho_db=r)
        out.append(np.array([sop.sop_exact(c, sc, form).value for sc in SCENARIOS]))
    return np.concatenate(out)


def test_c2_reduction_identities():
    worst_rel = 0.0
    for sic in ("psic", "ipsic"):
        cfg = baseline(1, sic)
        cd, pd = _k1_evaluators(cfg, "cd"), _k1_evaluators(cfg, "pd")
        mask = (cd != 0) | (pd != 0)
        worst_rel = max(worst_rel, float(np.max(np.abs(cd[mask] - pd[mask]) / np.abs(pd[mask]))))
    worst_abs = 0.0
    for K in (1, 2):
        base = baseline(K, "psic", rho_db=30.0)
        tiny = base.replace(sic=SicMode.imperfect(1e-12))
        pairs = [(ch.cdf_gamma_n(tiny, STANDARD_GRID), ch.cdf_gamma_n(base, STANDARD_GRID)),
                 (ch.eve_external_n(tiny).cdf(STANDARD_GRID), ch.eve_external_n(base).cdf(STANDARD_GRID))]
        pairs += [(sop.sop_exact(tiny, sc).value, sop.sop_exact(base, sc).value) for sc in SCENARIOS]
        worst_abs = max(worst_abs, max(float(np.max(np.abs(np.subtract(a, b)))) for a, b in pairs))
    ok = worst_rel <= 1e-8 and worst_abs <= 1e-6
    record(f"C2 {verdict(ok)} K=1 CD vs PD max rel diff {worst_rel:.1e} (<= 1e-8); "
           f"ipSIC varpi=1e-12 vs pSIC max abs diff {worst_abs:.1e} (<= 1e-6)")
    assert worst_rel <= 1e-8 and worst_abs <= 1e-6


def test_c3_diversity_orders():
    lines, ok = [], True
    for K, target, tol in ((2, 2.0, 0.25), (1, 1.0, 0.2)):
        cfg = baseline(K, "psic")
        for sc in (Scenario.EXTERNAL_N, Scenario.EXTERNAL_M, Scenario.INTERNAL):
            fit = sop.diversity_order(cfg, sc)
            good = fit.slope is not None and abs(fit.slope - target) <= tol
            ok &= good
            lines.append(f"{'CD' if K == 2 else 'PD'}-psic {sc.value} slope {fit.raw_slope:.3f}")
    for K in (2, 1):
        cfg = baseline(K, "ipsic")
        for sc in (Scenario.EXTERNAL_N, Scenario.INTERNAL):
            fit = sop.diversity_order(cfg, sc)
            asym = sop.sop_asymptotic(cfg, sc).value
            good = fit.floor_detected and abs(fit.floor_value - asym) <= 0.05 * asym
            ok &= good
            lines.append(f"{'CD' if K == 2 else 'PD'}-ipsic {sc.value} floor "
                         f"{fit.floor_value if fit.floor_value else float('nan'):.5f} vs {asym:.5f}")
    record(f"C3 {verdict(ok)} diversity over 35-55 dB: " + "; ".join(lines))
    assert ok


def test_c4_distributions(batches):
    worst_ks, worst_mass, fails = 0.0, 0.0, []
    for case in CASES:
        cfg = baseline(*case)
        s = batches[case].sinrs(cfg)
        cdfs = {"gamma_n": lambda x: ch.cdf_gamma_n(cfg, x), "gamma_m": lambda x: ch.cdf_gamma_m(cfg, x)}
        eves = {"gamma_En": ch.eve_external_n(cfg), "gamma_Em": ch.eve_external_m(cfg),
                "gamma_int": ch.eve_internal(cfg)}
        cdfs.update({k: h.cdf for k, h in eves.items()})
        for name, cdf in cdfs.items():
            ks = mc.ks_distance(s[name], cdf)
            worst_ks = max(worst_ks, ks)
            if ks > 0.015:
                fails.append((case, name, ks))
        for name, h in eves.items():
            err = abs(pdf_mass(h) - 1.0)
            worst_mass = max(worst_mass, err)
            if err > 1e-3:
                fails.append((case, name, "mass", err))
    record(f"C4 {verdict(not fails)} {len(CASES) * 5} CDFs: worst KS {worst_ks:.4f} (<= 0.015); "
           f"{len(CASES) * 3} Eve pdfs: worst |mass - 1| {worst_mass:.1e} (<= 1e-3)")
    assert not fails, fails


FIG2_RHO = (10.0, 20.0, 30.0, 40.0, 50.0)


@pytest.mark.xfail(strict=True, reason="at 10 dB both users are almost surely in outage and the m-th user "
                   "is marginally better; the exact curves cross near 13-14 dB")
def test_c5a_n_user_beats_m_user():
    cfg = baseline(2, "psic", R_n=0.01, R_m=0.01)
    rows = []
    for r in FIG2_RHO:
        c = cfg.replace(rho_db=r)
        rows.append((r, sop.sop_exact(c, Scenario.EXTERNAL_N).value, sop.sop_exact(c, Scenario.EXTERNAL_M).value))
    bad = [r for r, n, m in rows if not n < m]
    detail = ", ".join(f"{r:.0f} dB n {n:.5f} m {m:.5f}" for r, n, m in rows)
    record(f"C5a {verdict(not bad)} SOP(n, pSIC) < SOP(m) at every sampled rho; violated at {bad} dB; {detail}")
    assert not bad


def test_c5b_cd_pair_beats_pd_pair():
    rows, ok = [], True
    for sic in ("psic", "ipsic"):
        for r in (35.0, 40.0, 45.0, 50.0, 55.0, 60.0):
            cd = sop.sop_exact(baseline(2, sic, rho_db=r), Scenario.EXTERNAL_PAIR).value
            pd = sop.sop_exact(baseline(1, sic, rho_db=r), Scenario.EXTERNAL_PAIR).value
            ok &= cd < pd
            rows.append(f"{sic} {r:.0f} dB {cd:.2e}<{pd:.2e}")
    record(f"C5b {verdict(ok)} CD pair SOP below PD pair SOP over 35-60 dB: " + ", ".join(rows[::3]))
    assert ok


def test_c5c_alpha_monotone_m_user():
    # the figure's configuration: K = 2, varpi = 1, rho_e = 10 dB
    ok, rows = True, []
    for r in FIG2_RHO + (60.0,):
        vals = [sop.sop_exact(baseline(2, "ipsic", rho_db=r, alpha=a), Scenario.EXTERNAL_M).value
                for a in (2, 3, 4)]
        ok &= vals[0] <= vals[1] <= vals[2]
        rows.append(f"{r:.0f} dB " + "/".join(f"{v:.4g}" for v in vals))
    record(f"C5c {verdict(ok)} m-user SOP nondecreasing in alpha=2,3,4 (K=2): " + "; ".join(rows)
           + " [below 10 dB, where SOP > 0.9998, the order reverses by < 2e-4]")
    assert ok


def test_c5d_rate_monotone():
    ok, count = True, 0
    rates = (0.01, 0.1, 0.5, 1.0)
    for K, sic in CASES:
        for r in (10.0, 30.0, 50.0):
            for sc in SCENARIOS:
                vals = [sop.sop_exact(baseline(K, sic, rho_db=r, R_n=R, R_m=R, R_mn=R), sc).value for R in rates]
                ok &= all(a <= b for a, b in zip(vals, vals[1:]))
                count += 1
    record(f"C5d {verdict(ok)} SOP nondecreasing over R = {rates} in {count} (case, rho, scenario) series")
    assert ok


def test_c5e_residual_power_raises_floor():
    ok, rows = True, []
    for K in (2, 1):
        for sc in (Scenario.EXTERNAL_N, Scenario.INTERNAL, Scenario.EXTERNAL_PAIR):
            lo = sop.sop_asymptotic(baseline(K, "ipsic", residual_total_db=-30.0), sc).value
            hi = sop.sop_asymptotic(baseline(K, "ipsic", residual_total_db=-20.0), sc).value
            ok &= hi > lo
            rows.append(f"K={K} {sc.value} {lo:.4f}->{hi:.4f}")
    record(f"C5e {verdict(ok)} ipSIC floor rises from -30 to -20 dB residual: " + ", ".join(rows))
    assert ok


def test_c6_numerics():
    checks = {}
    xs = np.array([1e-4, 0.3, 1.0, 2.5, 30.0])
    checks["recurrence"] = max(
        abs(upper_incomplete_gamma(s + 1, x) - s * upper_incomplete_gamma(s, x) - x**s * math.exp(-x))
        / upper_incomplete_gamma(s + 1, x)
        for s in (0.0, 0.3, 0.5, 1.0) for x in xs)
    checks["complement"] = max(
        abs(upper_incomplete_gamma(s, x) + integrate_finite(lambda t, s=s: t ** (s - 1) * math.exp(-t), 0.0, x,
                                                            rel_tol=1e-12) - math.gamma(s)) / math.gamma(s)
        for s in (0.5, 1.0, 1.5) for x in (0.2, 1.0, 4.0))
    checks["quadrature"] = abs(integrate_semi_infinite(lambda x: math.exp(-x) / (1 + x), rel_tol=1e-10)
                               - math.e * upper_incomplete_gamma(0.0, 1.0))
    errs = [abs(position_nodes(U, 2.0, 2.0).b.sum() - 1.0) for U in (5, 15, 50, 400)]
    monotone = all(a > b for a, b in zip(errs, errs[1:]))
    ok = checks["recurrence"] < 1e-11 and checks["complement"] < 1e-9 and checks["quadrature"] < 1e-9 and monotone
    record(f"C6 {verdict(ok)} recurrence {checks['recurrence']:.1e}, complement {checks['complement']:.1e}, "
           f"quadrature {checks['quadrature']:.1e}, |sum b_u - 1| at U=5,15,50,400 "
           + "/".join(f"{e:.1e}" for e in errs))
    assert ok


def test_c7_reproducibility():
    cfg = baseline(2, "ipsic", rho_db=20.0)
    one = mc.simulate(cfg, 3000, MC_SEED, workers=1)
    four = mc.simulate(cfg, 3000, MC_SEED, workers=4)
    same_batch = all(np.array_equal(getattr(one, f), getattr(four, f))
                     for f in ("S_n", "S_m", "I", "gamma_En", "gamma_Em", "gamma_int", "eve_count"))
    ests = [mc.estimate_sop_mc(cfg, sc, 3000, MC_SEED, workers=w) for sc in SCENARIOS for w in (1, 4)]
    same_est = all(a == b for a, b in zip(ests[::2], ests[1::2]))
    ok = same_batch and same_est
    record(f"C7 {verdict(ok)} 1 vs 4 workers: batches bitwise equal {same_batch}, estimates equal {same_est}")
    assert ok
