"""Choosing the exponential censoring rate that hits a target censoring level.

Run with ``python3 demos/02_censoring_calibration.py``.
"""

# %% Calibrated rates for each generator
import numpy as np

from lgwfbst.simcens import CensoringSpec, calibrate_lambda, generate_sample
from lgwfbst.survdist import Family, SharedMoments

m = SharedMoments(20.0, 50.0)
print(" p_c " + "".join(f"{f.value:>12}" for f in Family))
for p_c in (0.1, 0.3, 0.5):
    print(f"{p_c:4.1f} " + "".join(f"{calibrate_lambda(f, m, p_c):12.6f}" for f in Family))

# %% An exact special case: exponential times and exponential censoring
# With T ~ Exp(1/mu), P(C < T) = lam / (lam + 1/mu), so 50% censoring needs
# lam = 1/mu exactly.
expo = SharedMoments(20.0, 400.0)
print("\nexponential, p_c = 0.5:", calibrate_lambda(Family.WEIBULL, expo, 0.5), "vs 1/mu =", 1 / 20)

# %% Checking by simulation
rng = np.random.default_rng(0)
for family in Family:
    lam = calibrate_lambda(family, m, 0.3)
    d = generate_sample(family, m, CensoringSpec(0.3, lam), 200_000, rng)
    print(f"{family.value:>9}: censored fraction {1 - d.event.mean():.4f} (target 0.3)")
