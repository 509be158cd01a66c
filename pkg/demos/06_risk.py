"""
Risk
====

Mid-price risk from the 1/N volatility and its 1.65 sigma quantile, and
spread risk from a Monte Carlo quantile of the fitted spread law.
"""

# %%
import numpy as np

from bidask import ObservableSeries, SpreadDistParams, risk_report
from bidask.risk import spread_var95

rng = np.random.default_rng(0)
mids = 27.85 + np.cumsum(rng.normal(0, 0.01, 2000))
obs = ObservableSeries(np.full(mids.size, 1.4e-3), mids)
params = SpreadDistParams(0.0, 0.26e-3, 0.32e-3, 0.016e-3)
report = risk_report(obs, params, n_mc=100_000, seed=1)
print(report.to_text())

# %%
# Closed-form check: Rayleigh 95% quantile is sqrt(-2 ln 0.05).
q = spread_var95(SpreadDistParams(0, 1, 0, 1), 100_000, seed=2)
print(q.value, "+/-", q.std_error, "vs", np.sqrt(-2 * np.log(0.05)))
