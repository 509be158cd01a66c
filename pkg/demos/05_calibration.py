"""
Calibration
===========

Maximum-likelihood fit of the spread parameters on synthetic data, then a
phase-scale fit of the population dynamics against a simulated target.
"""

# %%
from bidask import FitOptions, SpreadDistParams, fit_spread_params, sample_spreads
from bidask.calibration import fit_phase_scale, model_population_histogram
from bidask.model import ModelParams

truth = SpreadDistParams(0.0, 0.42e-3, 0.55e-3, 0.07e-3)
x = sample_spreads(truth, 50_000, seed=3)
fit = fit_spread_params(x, FitOptions(seed=0))
for k in ("xi1", "kappa0", "kappa1"):
    print(f"{k:7s} true {getattr(truth, k):.3e}  fitted {getattr(fit.params, k):.3e}"
          f"  se {fit.standard_errors[k]:.1e}")

# %%
print(fit.to_json())

# %%
# Which phase scale generated this population histogram?
gazp = ModelParams(xi1=0.02e-3, kappa0=0.35e-3, kappa1=0.17e-3)
target = model_population_histogram(gazp, 20, 100_000, n_paths=16, seed=1, n_bins=20)
result = fit_phase_scale(target, gazp, [5, 10, 20, 40], n_steps=100_000, n_paths=16, seed=7)
for scale, score in result.table():
    print(f"phase scale {scale:4.0f}  chi2 {score:.2e}")
print("best:", result.best)
