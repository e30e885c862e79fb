"""
Renewable output as probabilistic sequences
===========================================

Wind and PV output are turned into step-quantized mass functions, added by
convolution, and read off as a reserve requirement for a given confidence
level.
"""

# %%
# One turbine under Weibull wind and one PV array under Beta irradiance,
# discretized with a 5 kW step.
from cies.ccp import critical_index, min_reserve
from cies.uncertainty import (PvPowerModel, WindPowerModel, convolve, discretize, expectation,
                              pv_distribution, wt_distribution)

q = 5.0
wt = discretize(wt_distribution(WindPowerModel(10.0, 1.8, 3.0, 15.0, 600.0)), q)
pv = discretize(pv_distribution(PvPowerModel(3.0, 5.0, 360.0)), q)
print(f"wind: {wt.n + 1} states, P(0) = {wt.probs[0]:.4f}, P(600 kW) = {wt.probs[-1]:.4f}")
print(f"pv:   {pv.n + 1} states, expectation {expectation(pv):.2f} kW")

# %%
# The joint output is the convolution; expectations add.
rg = convolve(wt, pv)
print(f"joint: {rg.n + 1} states, E = {expectation(rg):.2f} = {expectation(wt):.2f} + {expectation(pv):.2f}")

# %%
# Reserve needed to cover the shortfall below the expectation with
# probability alpha.  It grows with alpha and reaches E at alpha = 1.
for alpha in (0.8, 0.85, 0.9, 0.95, 1.0):
    u = critical_index(rg, alpha)
    print(f"alpha {alpha:.2f}: cover from {u * q:6.1f} kW up, reserve {min_reserve(rg, alpha):7.2f} kW")
