import math

import numpy as np
import pytest
from scipy import stats

from noma_secrecy import channel as ch
from noma_secrecy import montecarlo as mc
from noma_secrecy.config import Scenario, SicMode

from conftest import baseline


def one_eve_drop(cfg, d_e, h_e):
    K = cfg.K
    return mc.NetworkRealization(
        d_n=0.5, d_m=3.0, eves=np.array([d_e]),
        h_n=np.ones(K, complex), h_m=np.ones(K, complex), h_e=np.atleast_2d(h_e).astype(complex),
        h_I=np.zeros(K, complex), h_Ie=np.zeros((1, K), complex),
    )


def test_mean_eve_count_matches_poisson_mean(batches):
    counts = batches[(2, "psic")].head(10_000).eve_count
    assert counts.mean() == pytest.approx(math.pi * 1e6 * 1e-3, rel=0.02)


def test_literal_drop_invariants():
    cfg = baseline(2, "ipsic")
    rng = mc.block_rng(1, 0)
    for _ in range(5):
        real = mc.sample_realization(cfg, rng)
        assert 0 <= real.d_n <= cfg.r_d1 and 0 <= real.d_m <= cfg.r_d2
        assert np.all((real.eves >= 0) & (real.eves <= cfg.r_eve))
        assert real.h_e.shape == (len(real.eves), 2) == real.h_Ie.shape
        s = mc.compute_sinrs(real, cfg)
        assert all(v >= 0 for v in s.values())
        assert s["gamma_m"] < cfg.a_m / cfg.a_n and s["gamma_Em"] < cfg.a_m / cfg.a_n


def test_no_eavesdroppers():
    cfg = baseline(2, "psic", lambda_e=0.0)
    real = mc.sample_realization(cfg, mc.block_rng(0, 0))
    assert len(real.eves) == 0
    s = mc.compute_sinrs(real, cfg)
    assert s["gamma_En"] == s["gamma_Em"] == s["gamma_int"] == 0.0
    batch = mc.simulate(cfg, 3000, 4)
    assert not batch.eve_count.any() and not batch.gamma_En.any()


def test_no_eavesdroppers_sop_is_connection_outage():
    cfg = baseline(2, "psic", lambda_e=0.0, rho_db=10.0)
    est = mc.estimate_sop_mc(cfg, Scenario.EXTERNAL_N, 20_000, 3)
    ref = ch.cdf_gamma_n(cfg, 2.0**cfg.R_n - 1.0)
    assert abs(est.value - ref) <= 3 * est.ci_half_width


def test_degenerate_inner_disc():
    cfg = baseline(2, "psic", r_d1=0.0)
    real = mc.sample_realization(cfg, mc.block_rng(0, 0))
    assert real.d_n == 0.0
    s = mc.compute_sinrs(real, cfg)
    expected = cfg.rho * cfg.eta_value * np.sum(np.abs(real.h_n) ** 2) * cfg.a_n
    assert s["gamma_n"] == pytest.approx(expected, rel=1e-14)


def test_single_eve_by_hand():
    cfg = baseline(2, "psic")
    d_e = 7.0
    s = mc.compute_sinrs(one_eve_drop(cfg, d_e, np.ones(2)), cfg)
    expected = cfg.rho_e * cfg.a_n * 2 * cfg.eta_value / (1 + d_e**cfg.alpha)
    assert s["gamma_En"] == pytest.approx(expected, rel=1e-14)
    assert s["gamma_int"] == pytest.approx(expected, rel=1e-14)
    S = 2 * cfg.eta_value / (1 + d_e**cfg.alpha)
    assert s["gamma_Em"] == pytest.approx(cfg.rho_e * S * cfg.a_m / (cfg.rho_e * S * cfg.a_n + 1), rel=1e-14)


def test_perfect_sic_user_sinr():
    cfg = baseline(2, "psic")
    real = mc.sample_realization(cfg, mc.block_rng(5, 0))
    S_n = cfg.eta_value * np.sum(np.abs(real.h_n) ** 2) / (1 + real.d_n**cfg.alpha)
    assert mc.compute_sinrs(real, cfg)["gamma_n"] == pytest.approx(cfg.rho * S_n * cfg.a_n, rel=1e-14)


def test_m_user_ceiling():
    cfg = baseline(2, "psic")
    real = one_eve_drop(cfg, 5.0, np.ones(2))
    real.h_m = np.full(2, 1e6, complex)
    assert mc.compute_sinrs(real, cfg)["gamma_m"] == pytest.approx(cfg.a_m / cfg.a_n, rel=1e-6)


def test_independent_internal_field():
    cfg = baseline(1, "psic")
    real = mc.sample_realization(cfg, mc.block_rng(2, 0), internal_field="independent")
    assert real.eves_internal is not None and real.h_int.shape == (len(real.eves_internal), 1)
    shared = mc.simulate(cfg, 512, 9)
    indep = mc.simulate(cfg, 512, 9, internal_field="independent")
    np.testing.assert_array_equal(shared.gamma_En, indep.gamma_En)
    assert not np.array_equal(shared.gamma_int, indep.gamma_int)
    with pytest.raises(ValueError):
        mc.simulate(cfg, 10, 0, internal_field="other")


@pytest.mark.parametrize("sic", ["psic", "ipsic"])
def test_literal_drops_match_vectorized_batch(sic):
    # the batch path draws channel powers directly; the literal path builds complex coefficients
    cfg = baseline(2, sic)
    rng = mc.block_rng(11, 0)
    literal = [mc.compute_sinrs(mc.sample_realization(cfg, rng), cfg) for _ in range(1500)]
    batch = mc.simulate(cfg, 20_000, 12).sinrs(cfg)
    for name in mc.SINR_NAMES:
        p = stats.ks_2samp([d[name] for d in literal], batch[name]).pvalue
        assert p > 1e-3, name


def test_same_seed_is_bitwise_identical():
    cfg = baseline(2, "ipsic")
    a = mc.estimate_sop_mc(cfg, Scenario.EXTERNAL_PAIR, 1000, 77)
    b = mc.estimate_sop_mc(cfg, Scenario.EXTERNAL_PAIR, 1000, 77)
    assert a == b


def test_worker_count_does_not_change_results():
    cfg = baseline(2, "ipsic")
    one = mc.simulate(cfg, 2000, 5, workers=1)
    many = mc.simulate(cfg, 2000, 5, workers=4)
    for name in ("S_n", "S_m", "I", "gamma_En", "gamma_Em", "gamma_int", "eve_count"):
        assert np.array_equal(getattr(one, name), getattr(many, name))


def test_head_equals_shorter_run():
    cfg = baseline(1, "psic")
    long = mc.simulate(cfg, 1000, 8)
    short = mc.simulate(cfg, 300, 8)
    for name in ("S_n", "gamma_En", "eve_count"):
        assert np.array_equal(getattr(long.head(300), name), getattr(short, name))
    assert mc.estimate_sop_mc(cfg, "external-n", 300, 8, batch=long) == mc.estimate_sop_mc(cfg, "external-n", 300, 8)
    with pytest.raises(ValueError):
        mc.estimate_sop_mc(cfg, "external-n", 2000, 8, batch=long)


def test_batch_rejects_other_eve_parameters():
    batch = mc.simulate(baseline(1, "psic"), 10, 0)
    batch.sinrs(baseline(1, "psic", rho_db=50.0))  # rho only rescales user SINRs
    with pytest.raises(ValueError):
        batch.sinrs(baseline(1, "psic", rho_e_db=20.0))


def test_disjoint_seeds_are_independent():
    cfg = baseline(1, "ipsic", rho_db=30.0)
    n = 2000
    vals = np.array([mc.estimate_sop_mc(cfg, "external-pair", n, seed).value for seed in range(100, 110)])
    p = vals.mean()
    chi2 = (len(vals) - 1) * vals.var(ddof=1) / (p * (1 - p) / n)
    lo, hi = stats.chi2.ppf([0.001, 0.999], len(vals) - 1)
    assert lo < chi2 < hi


@pytest.mark.parametrize("sic", ["psic", "ipsic"])
def test_scaling_invariance(sic):
    # rho, rho_e up by c and eta down by c; with ipSIC the residual variances must drop by c too
    base = baseline(2, sic, rho_db=20.0)
    scaled = base.replace(rho_db=30.0, rho_e_db=base.rho_e_db + 10.0, eta=base.eta_value / 10.0,
                          residual_total_db=base.residual_total_db - 10.0,
                          residual_total_eve_db=base.residual_total_eve_db - 10.0)
    a = mc.simulate(base, 5000, 21).sinrs(base)
    b = mc.simulate(scaled, 5000, 21).sinrs(scaled)
    for name in mc.SINR_NAMES:
        assert stats.ks_2samp(a[name], b[name]).statistic <= 0.01


def test_estimate_ci():
    est = mc.proportion_estimate(np.array([True] * 30 + [False] * 70), 3)
    assert est.value == 0.3 and est.ci_half_width == pytest.approx(1.96 * math.sqrt(0.21 / 100))
    lo, hi = est.ci
    assert lo == pytest.approx(0.3 - est.ci_half_width) and hi == pytest.approx(0.3 + est.ci_half_width)
    assert mc.proportion_estimate(np.ones(5, bool), 0).ci == (1.0, 1.0)


def test_outage_uses_clamped_capacity():
    # gamma below gamma_e gives capacity 0, an outage for every positive rate
    hit = mc._secrecy_outage(np.array([1.0, 10.0]), np.array([3.0, 1.0]), 0.01)
    assert hit.tolist() == [True, False]


def test_pair_is_union_of_user_outages():
    cfg = baseline(2, "ipsic", rho_db=10.0)
    batch = mc.simulate(cfg, 2000, 6)
    n = mc.outage_indicators(batch, cfg, "external-n")
    m = mc.outage_indicators(batch, cfg, "external-m")
    assert np.array_equal(mc.outage_indicators(batch, cfg, "external-pair"), n | m)


def test_empirical_cdf_edges():
    cfg = baseline(2, "psic")
    assert mc.empirical_cdf(cfg, "gamma_n", [np.inf], 500, 1)[0] == 1.0
    assert mc.empirical_cdf(cfg, "gamma_Em", [cfg.a_m / cfg.a_n], 500, 1)[0] == 1.0
    with pytest.raises(ValueError):
        mc.empirical_cdf(cfg, "gamma_n", [2.0, 1.0], 10, 1)
    with pytest.raises(ValueError):
        mc.sample_sinr(cfg, "gamma_x", 10, 1)


def test_pd_psic_user_cdf_ks(batches):
    cfg = baseline(1, "psic")
    samples = batches[(1, "psic")].sinrs(cfg)["gamma_n"]
    assert mc.ks_distance(samples, lambda x: ch.cdf_gamma_n(cfg, x)) <= 0.01


def test_ks_distance_of_exact_sample():
    rng = np.random.default_rng(0)
    assert mc.ks_distance(rng.random(20_000), lambda x: np.clip(x, 0, 1)) < 0.0136


@pytest.mark.parametrize("rho_db", [40.0, 50.0])
def test_n_user_dominates_m_user_under_psic(batches, rho_db):
    cfg = baseline(2, "psic", rho_db=rho_db)
    batch = batches[(2, "psic")]
    grid = np.logspace(-3, 0.55, 30)
    Fn = mc.empirical_cdf(cfg, "gamma_n", grid, batch.iterations, batch.seed, batch=batch)
    Fm = mc.empirical_cdf(cfg, "gamma_m", grid, batch.iterations, batch.seed, batch=batch)
    ci = 1.96 * np.sqrt(np.maximum(Fn * (1 - Fn), Fm * (1 - Fm)) / batch.iterations)
    assert np.all(Fn <= Fm + ci)


@pytest.mark.parametrize("K", [1, 2])
def test_user_cdfs_cross_only_slightly_at_low_snr(K):
    # at 30 dB and below an m-th user close to the BS can beat the n-th user;
    # the analytic CDFs cross there by well under 1%
    x = np.logspace(-4, np.log10(3.99), 300)
    for rho_db in (10.0, 20.0, 30.0):
        cfg = baseline(K, "psic", rho_db=rho_db)
        gap = ch.cdf_gamma_n(cfg, x) - ch.cdf_gamma_m(cfg, x)
        assert 0 < gap.max() < 0.006
    cfg = baseline(K, "psic", rho_db=40.0)
    assert np.all(ch.cdf_gamma_n(cfg, x) <= ch.cdf_gamma_m(cfg, x))


def test_iterations_must_be_positive():
    with pytest.raises(ValueError):
        mc.simulate(baseline(1, "psic"), 0, 0)
    cfg = baseline(1, "psic").replace(sic=SicMode.imperfect(0.5))
    assert mc.simulate(cfg, 1, 0).iterations == 1
