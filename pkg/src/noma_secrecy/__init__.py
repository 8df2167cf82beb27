"""Secrecy outage analysis for code- and power-domain NOMA with random eavesdroppers."""

from .channel import (
    DistributionHandle,
    cdf_gamma_m,
    cdf_gamma_n,
    cdf_gamma_n_asymptotic,
    eve_external_m,
    eve_external_n,
    eve_internal,
)
from .config import (
    ConfigError,
    Scenario,
    SicMode,
    SopEstimate,
    SystemConfig,
    load_config,
    validate_config,
)
from .experiments import SweepResult, SweepRow, figure_recipe, run_sweep, validate_report
from .montecarlo import (
    MonteCarloEstimate,
    compute_sinrs,
    empirical_cdf,
    estimate_sop_mc,
    sample_realization,
    simulate,
)
from .numerics import IntegrationError
from .sop import DiversityFit, diversity_order, sop_asymptotic, sop_exact

__all__ = [
    "ConfigError", "DistributionHandle", "DiversityFit", "IntegrationError", "MonteCarloEstimate",
    "Scenario", "SicMode", "SopEstimate", "SweepResult", "SweepRow", "SystemConfig",
    "cdf_gamma_m", "cdf_gamma_n", "cdf_gamma_n_asymptotic", "compute_sinrs", "diversity_order",
    "empirical_cdf", "estimate_sop_mc", "eve_external_m", "eve_external_n", "eve_internal",
    "figure_recipe", "load_config", "run_sweep", "sample_realization", "simulate", "sop_asymptotic",
    "sop_exact", "validate_config", "validate_report",
]
