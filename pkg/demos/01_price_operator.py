"""
The price operator
==================

Bid and ask are the two eigenvalues of a Hermitian 2x2 matrix. The trace
sets the mid price, and the off-diagonal coupling together with the
diagonal split sets the spread.
"""

# %%
import numpy as np

from bidask import ModelParams, PriceOperator2x2, Shocks, build_operator, eigen_prices

# A book quoting 27.83 / 27.87: equal diagonal, coupling of half the spread.
op = PriceOperator2x2(27.85, 27.85, 0.02)
e = eigen_prices(op)
print(f"ask {e.ask:.4f}  bid {e.bid:.4f}  mid {e.mid:.4f}  spread {e.spread:.4f}")

# %%
# The spread only depends on the split and |coupling|, so a complex phase on
# the coupling leaves prices unchanged.
for s12 in (0.02, 0.02j, 0.02 * np.exp(0.7j)):
    print(s12, eigen_prices(PriceOperator2x2(27.85, 27.85, s12)).spread)

# %%
# One stochastic update: the mid moves by sigma*sqrt(dt)*dz, while the split
# (xi) and the coupling (kappa) are redrawn around their offsets.
params = ModelParams(sigma=0.01, xi0=0.0, xi1=0.011, kappa0=0.023, kappa1=0.016)
rng = np.random.default_rng(0)
mid = 27.85
for step in range(5):
    op = build_operator(mid, params, Shocks(*rng.standard_normal(3)))
    e = eigen_prices(op)
    mid = e.mid
    print(f"step {step}: bid {e.bid:.4f} ask {e.ask:.4f} spread {e.spread:.4f}")

# %%
# Vectorized: a whole array of operators at once.
ops = PriceOperator2x2(rng.normal(100, 1, 5), rng.normal(100, 1, 5), rng.normal(0, 0.1, 5))
print(eigen_prices(ops).spread)
