"""Monte Carlo simulator of the network, used as the oracle for the closed forms.

Each drop places the n-th user uniformly in the inner disc, the m-th user
in the outer disc and a Poisson number of eavesdroppers uniformly in the Eve
disc, then draws Rayleigh fading on K subcarriers. Mapping vectors are all
ones, so with MRC every channel power is a sum of K unit exponentials.

Randomness is split into fixed-size blocks of drops; block b of seed s is
generated from ``SeedSequence([s, b])``. A block's samples never depend on
which thread runs it, so results are identical for any worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .config import Scenario, SystemConfig, validate_config

BLOCK_SIZE = 256
Z_95 = 1.96
SINR_NAMES = ("gamma_n", "gamma_m", "gamma_En", "gamma_Em", "gamma_int")


def block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), int(block)])))


# -- single literal drop ----------------------------------------------------


@dataclass
class NetworkRealization:
    d_n: float
    d_m: float
    eves: np.ndarray  # Eve distances
    h_n: np.ndarray  # (K,) complex
    h_m: np.ndarray
    h_e: np.ndarray  # (N, K) complex
    h_I: np.ndarray  # (K,) complex, per-entry variance omega_i
    h_Ie: np.ndarray  # (N, K) complex, per-entry variance omega_ie
    eves_internal: np.ndarray | None = None
    h_int: np.ndarray | None = None


def _cn(rng, shape, var=1.0):
    return math.sqrt(var / 2.0) * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def _disc(rng, radius, size=None):
    return radius * np.sqrt(rng.random(size))


def sample_realization(cfg: SystemConfig, rng: np.random.Generator,
                       internal_field: str = "shared") -> NetworkRealization:
    """Draw one network drop with explicit complex channel coefficients."""
    cfg = validate_config(cfg)
    K = cfg.K
    d_n = float(_disc(rng, cfg.r_d1))
    d_m = float(_disc(rng, cfg.r_d2))
    n_eve = rng.poisson(cfg.lambda_e * math.pi * cfg.r_eve**2)
    eves = _disc(rng, cfg.r_eve, n_eve)
    real = NetworkRealization(
        d_n=d_n,
        d_m=d_m,
        eves=eves,
        h_n=_cn(rng, K),
        h_m=_cn(rng, K),
        h_e=_cn(rng, (n_eve, K)),
        h_I=_cn(rng, K, cfg.omega_i),
        h_Ie=_cn(rng, (n_eve, K), cfg.omega_ie),
    )
    if internal_field == "independent":
        n_int = rng.poisson(cfg.lambda_e * math.pi * cfg.r_eve**2)
        real.eves_internal = _disc(rng, cfg.r_eve, n_int)
        real.h_int = _cn(rng, (n_int, K))
    return real


def compute_sinrs(real: NetworkRealization, cfg: SystemConfig) -> dict[str, float]:
    """All SINRs of one drop, with all-ones mapping vectors and MRC."""
    cfg = validate_config(cfg)
    eta, rho, rho_e = cfg.eta_value, cfg.rho, cfg.rho_e
    a_n, a_m, varpi = cfg.a_n, cfg.a_m, cfg.varpi
    g = np.ones(cfg.K)

    def power(h, d):
        return eta * np.abs(h * g) ** 2 @ np.ones(cfg.K) / (1.0 + d**cfg.alpha)

    S_n = power(real.h_n, real.d_n)
    S_m = power(real.h_m, real.d_m)
    I = float(np.sum(np.abs(real.h_I) ** 2))
    out = {
        "gamma_n": rho * S_n * a_n / (varpi * rho * I + 1.0),
        "gamma_m": rho * S_m * a_m / (rho * S_m * a_n + 1.0),
    }
    if len(real.eves):
        S_e = power(real.h_e, real.eves)
        I_e = np.sum(np.abs(real.h_Ie) ** 2, axis=1)
        out["gamma_En"] = float(np.max(rho_e * S_e * a_n / (varpi * rho_e * I_e + 1.0)))
        out["gamma_Em"] = float(np.max(rho_e * S_e * a_m / (rho_e * S_e * a_n + 1.0)))
        out["gamma_int"] = float(np.max(rho_e * S_e * a_n))
    else:
        out["gamma_En"] = out["gamma_Em"] = out["gamma_int"] = 0.0
    if real.eves_internal is not None:
        if len(real.eves_internal):
            out["gamma_int"] = float(np.max(rho_e * power(real.h_int, real.eves_internal) * a_n))
        else:
            out["gamma_int"] = 0.0
    return {k: float(v) for k, v in out.items()}


# -- vectorized batches -----------------------------------------------------


def _gamma_k(rng, K, size):
    if K <= 4:
        return rng.standard_exponential((K, size)).sum(axis=0) if K > 1 else rng.standard_exponential(size)
    return rng.standard_gamma(float(K), size)


def _segment_max(values, counts):
    out = np.zeros(len(counts))
    nz = counts > 0
    if values.size:
        starts = np.concatenate(([0], np.cumsum(counts)[:-1]))
        out[nz] = np.maximum.reduceat(values, starts[nz])
    return out


def _eve_fingerprint(cfg: SystemConfig) -> tuple:
    return (cfg.K, cfg.a_n, cfg.a_m, cfg.rho_e_db, cfg.eta_value, cfg.alpha, cfg.lambda_e,
            cfg.r_d1, cfg.r_d2, cfg.r_eve, cfg.sic, cfg.residual_total_db, cfg.residual_total_eve_db)


@dataclass
class DropBatch:
    """Per-drop channel powers and Eve SINRs for ``iterations`` drops.

    User SINRs are rebuilt from S_n, S_m and I for any rho, so one batch
    serves a whole transmit-SNR sweep.
    """

    S_n: np.ndarray
    S_m: np.ndarray
    I: np.ndarray
    gamma_En: np.ndarray
    gamma_Em: np.ndarray
    gamma_int: np.ndarray
    eve_count: np.ndarray
    seed: int
    fingerprint: tuple = field(repr=False)

    @property
    def iterations(self) -> int:
        return len(self.S_n)

    def sinrs(self, cfg: SystemConfig) -> dict[str, np.ndarray]:
        if _eve_fingerprint(cfg) != self.fingerprint:
            raise ValueError("configuration does not match the simulated batch")
        rho = cfg.rho
        return {
            "gamma_n": rho * self.S_n * cfg.a_n / (cfg.varpi * rho * self.I + 1.0),
            "gamma_m": rho * self.S_m * cfg.a_m / (rho * self.S_m * cfg.a_n + 1.0),
            "gamma_En": self.gamma_En,
            "gamma_Em": self.gamma_Em,
            "gamma_int": self.gamma_int,
        }

    def head(self, n: int) -> DropBatch:
        """The first ``n`` drops, i.e. the batch a shorter run would produce."""
        return DropBatch(self.S_n[:n], self.S_m[:n], self.I[:n], self.gamma_En[:n], self.gamma_Em[:n],
                         self.gamma_int[:n], self.eve_count[:n], self.seed, self.fingerprint)


def _simulate_block(cfg: SystemConfig, seed: int, block: int, size: int, internal_field: str):
    rng = block_rng(seed, block)
    K = cfg.K
    eta, alpha, rho_e = cfg.eta_value, cfg.alpha, cfg.rho_e
    d_n = _disc(rng, cfg.r_d1, BLOCK_SIZE)[:size]
    d_m = _disc(rng, cfg.r_d2, BLOCK_SIZE)[:size]
    Y_n = _gamma_k(rng, K, BLOCK_SIZE)[:size]
    Y_m = _gamma_k(rng, K, BLOCK_SIZE)[:size]
    I = cfg.omega_i * _gamma_k(rng, K, BLOCK_SIZE)[:size]
    S_n = eta * Y_n / (1.0 + d_n**alpha)
    S_m = eta * Y_m / (1.0 + d_m**alpha)

    mean = cfg.lambda_e * math.pi * cfg.r_eve**2

    def eve_field():
        counts = rng.poisson(mean, BLOCK_SIZE)
        total = int(counts.sum())
        r2 = cfg.r_eve**2 * rng.random(total)
        S_e = eta * _gamma_k(rng, K, total) / (1.0 + r2 ** (alpha / 2.0))
        return counts, total, S_e

    counts, total, S_e = eve_field()
    # gamma_Em and the interference-free SINR are increasing in S_e
    s_max = _segment_max(S_e, counts)
    g_int = rho_e * cfg.a_n * s_max
    g_Em = rho_e * cfg.a_m * s_max / (rho_e * cfg.a_n * s_max + 1.0)
    if cfg.sic.is_perfect:
        g_En = g_int.copy()
    else:
        Z = cfg.omega_ie * _gamma_k(rng, K, total)
        g_En = _segment_max(rho_e * cfg.a_n * S_e / (cfg.varpi * rho_e * Z + 1.0), counts)
    if internal_field == "independent":
        c_i, _, S_i = eve_field()
        g_int = rho_e * cfg.a_n * _segment_max(S_i, c_i)
    return S_n, S_m, I, g_En[:size], g_Em[:size], g_int[:size], counts[:size]


def simulate(cfg: SystemConfig, iterations: int, seed: int, workers: int = 1,
             internal_field: str = "shared") -> DropBatch:
    """Simulate ``iterations`` drops.

    ``internal_field="shared"`` lets the internal wiretapper statistic use the
    external Eve point set; "independent" draws a second field of the same
    density.
    """
    cfg = validate_config(cfg)
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    if internal_field not in ("shared", "independent"):
        raise ValueError(f"unknown internal_field {internal_field!r}")
    n_blocks = -(-iterations // BLOCK_SIZE)
    sizes = [min(BLOCK_SIZE, iterations - b * BLOCK_SIZE) for b in range(n_blocks)]

    def run(b):
        return _simulate_block(cfg, seed, b, sizes[b], internal_field)

    if workers <= 1:
        parts = [run(b) for b in range(n_blocks)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, range(n_blocks)))
    cols = [np.concatenate(c) for c in zip(*parts)]
    return DropBatch(*cols, seed=int(seed), fingerprint=_eve_fingerprint(cfg))


# -- estimators -------------------------------------------------------------


@dataclass(frozen=True)
class MonteCarloEstimate:
    value: float
    ci_half_width: float
    iterations: int
    seed: int

    @property
    def ci(self) -> tuple[float, float]:
        return max(0.0, self.value - self.ci_half_width), min(1.0, self.value + self.ci_half_width)


def _secrecy_outage(gamma, gamma_e, rate):
    capacity = np.maximum(0.0, np.log2(1.0 + gamma) - np.log2(1.0 + gamma_e))
    return capacity < rate


def outage_indicators(batch: DropBatch, cfg: SystemConfig, scenario) -> np.ndarray:
    scenario = scenario if isinstance(scenario, Scenario) else Scenario(scenario)
    s = batch.sinrs(cfg)
    if scenario is Scenario.EXTERNAL_N:
        return _secrecy_outage(s["gamma_n"], s["gamma_En"], cfg.R_n)
    if scenario is Scenario.EXTERNAL_M:
        return _secrecy_outage(s["gamma_m"], s["gamma_Em"], cfg.R_m)
    if scenario is Scenario.INTERNAL:
        return _secrecy_outage(s["gamma_n"], s["gamma_int"], cfg.R_mn)
    return (_secrecy_outage(s["gamma_n"], s["gamma_En"], cfg.R_n)
            | _secrecy_outage(s["gamma_m"], s["gamma_Em"], cfg.R_m))


def proportion_estimate(hits: np.ndarray, seed: int) -> MonteCarloEstimate:
    n = len(hits)
    p = float(np.count_nonzero(hits)) / n
    return MonteCarloEstimate(p, Z_95 * math.sqrt(p * (1.0 - p) / n), n, int(seed))


def estimate_sop_mc(cfg: SystemConfig, scenario, iterations: int, seed: int, workers: int = 1,
                    batch: DropBatch | None = None) -> MonteCarloEstimate:
    """Fraction of drops in secrecy outage; ``batch`` reuses earlier drops."""
    cfg = validate_config(cfg)
    if batch is None:
        batch = simulate(cfg, iterations, seed, workers)
    elif batch.iterations < iterations:
        raise ValueError("batch holds fewer drops than requested")
    else:
        batch = batch.head(iterations)
    return proportion_estimate(outage_indicators(batch, cfg, scenario), batch.seed)


def sample_sinr(cfg: SystemConfig, which: str, iterations: int, seed: int, workers: int = 1,
                batch: DropBatch | None = None) -> np.ndarray:
    if which not in SINR_NAMES:
        raise ValueError(f"unknown SINR {which!r}; choose from {SINR_NAMES}")
    cfg = validate_config(cfg)
    if batch is None:
        batch = simulate(cfg, iterations, seed, workers)
    return batch.head(iterations).sinrs(cfg)[which]


def empirical_cdf(cfg: SystemConfig, which: str, grid, iterations: int, seed: int, workers: int = 1,
                  batch: DropBatch | None = None) -> np.ndarray:
    """Fraction of simulated samples <= x for each x of an ascending grid."""
    grid = np.asarray(grid, dtype=float)
    if np.any(np.diff(grid) < 0):
        raise ValueError("grid must be sorted ascending")
    samples = np.sort(sample_sinr(cfg, which, iterations, seed, workers, batch))
    return np.searchsorted(samples, grid, side="right") / len(samples)


def ks_distance(samples, cdf) -> float:
    """Kolmogorov-Smirnov distance between samples and a CDF callable."""
    x = np.sort(np.asarray(samples, dtype=float))
    n = len(x)
    F = np.asarray(cdf(x), dtype=float)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - F), np.max(F - (i - 1) / n)))
