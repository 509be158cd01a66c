"""
Spread distribution
===================

With normal shocks on the split and the coupling, the spread is the length
of a 2D Gaussian vector. Without offsets the density has a closed form
with a Bessel I0 factor; with offsets it is evaluated by quadrature.
"""

# %%
import numpy as np

from bidask import SpreadDistParams, pdf_curve, sample_spreads, spread_pdf_general, spread_pdf_zero_mean
from bidask.spread import cdf_table

# Relative-spread parameters of the order seen for large US stocks (units of 1e-3).
intc = SpreadDistParams(xi0=0.0, xi1=0.42e-3, kappa0=0.55e-3, kappa1=0.07e-3)
curve = pdf_curve(intc, 400)
print("integral of the tabulated curve:", round(curve.integral(), 6))
print("mode at relative spread", curve.grid[np.argmax(curve.density)])

# %%
# Equal scales and no offsets reduce to a Rayleigh law.
d = np.array([0.5, 1.0, 2.0])
print(spread_pdf_zero_mean(d, 1.0, 1.0), d * np.exp(-d**2 / 2))

# %%
# The general density agrees with sampled spreads.
x = sample_spreads(intc, 200_000, seed=1)
counts, edges = np.histogram(x, bins=12)
centres = 0.5 * (edges[1:] + edges[:-1])
emp = counts / (counts.sum() * np.diff(edges))
for c, a, b in zip(centres, emp, spread_pdf_general(centres, intc)):
    print(f"{c:.2e}  empirical {a:8.1f}  density {b:8.1f}")

# %%
# A CDF table gives quantiles without Monte Carlo noise.
grid, cdf = cdf_table(intc)
print("95% quantile:", np.interp(0.95, cdf, grid), "MC:", np.quantile(x, 0.95))
