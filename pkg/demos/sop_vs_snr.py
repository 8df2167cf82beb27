"""
Secrecy outage against transmit SNR
===================================

Exact, high-SNR and simulated secrecy outage for a CD-NOMA pair (K = 2)
and its power-domain counterpart (K = 1), with perfect and imperfect SIC.

Run with ``python3 demos/sop_vs_snr.py``.
"""

import numpy as np

from noma_secrecy import SicMode, SystemConfig, validate_config
from noma_secrecy import montecarlo as mc
from noma_secrecy.sop import sop_asymptotic, sop_exact

# %%
# Default parameters: 1 GHz carrier, users in discs of 2 m and 10 m, Eves at
# density 1e-3 per m^2 out to 1 km, Eve SNR 10 dB. ``K`` picks CD (K > 1) or
# PD (K = 1); residual SIC interference enters through ``varpi``.

rho_grid = np.arange(0.0, 61.0, 10.0)
drops = 20_000
seed = 1

for K in (2, 1):
    for sic in (SicMode.perfect(), SicMode.imperfect(1.0)):
        cfg = validate_config(SystemConfig(K=K, sic=sic))
        # one simulated batch serves the whole rho sweep: Eve SINRs do not depend on rho
        batch = mc.simulate(cfg, drops, seed)
        print(f"\nK={K} ({cfg.scheme.upper()}), {sic.label}")
        print(f"{'rho dB':>7} {'scenario':>14} {'exact':>10} {'asympt':>10} {'MC':>10} {'+/-':>8}")
        for rho in rho_grid:
            c = cfg.replace(rho_db=float(rho))
            for sc in ("external-n", "external-m", "internal"):
                ex = sop_exact(c, sc).value
                asym = sop_asymptotic(c, sc).value
                est = mc.estimate_sop_mc(c, sc, drops, seed, batch=batch)
                print(f"{rho:7.0f} {sc:>14} {ex:10.3e} {asym:10.3e} {est.value:10.3e} {est.ci_half_width:8.1e}")

# %%
# With imperfect SIC the n-th user and the internal wiretap scenario level
# off at a floor set by the residual interference, while the m-th user (which
# performs no SIC) keeps falling as rho^-K.
