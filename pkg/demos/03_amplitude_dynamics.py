"""
Bid and ask amplitudes
======================

The order density is a two-component amplitude evolved by the price
operator. When the coupling dominates the split, the state keeps rotating
between the pure bid and pure ask poles and the time-averaged population
piles up near 0 and 1 (arcsine law).
"""

# %%
import numpy as np

from bidask import AmplitudeState, ModelParams, population_histogram, simulate_trajectory
from bidask.dynamics import arcsine_cdf, default_burn_in, rho_from_phase_scale

# A low-split stock: xi1 much smaller than the coupling.
rho = rho_from_phase_scale(20.0)
params = ModelParams(sigma=1e-3, xi1=0.02e-3, kappa0=0.35e-3, kappa1=0.17e-3, rho=rho)
traj = simulate_trajectory(AmplitudeState(), params, 300_000, seed=4, mid0=1.0)
print("final mid", traj.mids[-1], "mean spread", traj.spreads.mean())

# %%
hist = population_histogram(traj, default_burn_in(params), 10)
theory = np.diff(arcsine_cdf(hist.bin_edges))
for lo, f, t in zip(hist.bin_edges[:-1], hist.fractions(), theory):
    print(f"[{lo:.1f}, {lo + 0.1:.1f})  simulated {f:.3f}  arcsine {t:.3f}")
print("outer / central bins:", round(hist.tail_to_centre_ratio(), 2))

# %%
# When the split is as large as the coupling the histogram flattens.
flat = ModelParams(xi1=0.35e-3, kappa0=0.0, kappa1=0.35e-3, rho=rho)
h2 = population_histogram(simulate_trajectory(AmplitudeState(), flat, 300_000, seed=4, mid0=1.0), 1000, 10)
print("balanced split and coupling, outer / central:", round(h2.tail_to_centre_ratio(), 2))
