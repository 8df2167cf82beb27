"""
Secrecy diversity and error floors
==================================

The high-SNR slope of the outage curve counts the independent fading paths
that protect a message. Spreading over K subcarriers gives CD-NOMA a slope
of K. Imperfect SIC removes it for the n-th user: the outage settles on a
floor that grows with the residual interference power.

Run with ``python3 demos/diversity_and_floors.py``.
"""

from noma_secrecy import Scenario, SicMode, SystemConfig, validate_config
from noma_secrecy.sop import diversity_order, sop_asymptotic

for K in (1, 2, 3):
    cfg = validate_config(SystemConfig(K=K))
    for sc in (Scenario.EXTERNAL_N, Scenario.EXTERNAL_M, Scenario.INTERNAL):
        fit = diversity_order(cfg, sc)
        print(f"K={K} pSIC {sc.value:12s} slope {fit.raw_slope:.3f} (fit residual {fit.residual:.1e})")

# %%
# Imperfect SIC: the fit reports a floor instead of a slope. The asymptotic
# expression gives the floor directly, and it rises with the residual power.

for level_db in (-30.0, -20.0):
    cfg = validate_config(SystemConfig(K=2, sic=SicMode.imperfect(1.0), residual_total_db=level_db))
    fit = diversity_order(cfg, Scenario.EXTERNAL_N)
    floor = sop_asymptotic(cfg, Scenario.EXTERNAL_N).value
    print(f"residual {level_db:.0f} dB: floor detected {fit.floor_detected}, "
          f"SOP at 55 dB {fit.floor_value:.4f}, asymptote {floor:.4f}")
