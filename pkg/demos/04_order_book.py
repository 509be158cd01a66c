"""
Order-book observables
======================

Best and effective (size-weighted) bid and ask from a book snapshot, and
the bid population implied by resting order sizes.
"""

# %%
import io

from bidask import extract_observables, load_book_series, population_from_sizes
from bidask.market import effective_levels

BOOK = """timestamp,side,level,price,size
0,B,1,27.83,100
0,B,2,27.82,100
0,B,3,27.80,200
0,B,4,27.79,200
0,B,5,27.78,100
0,A,1,27.87,100
0,A,2,27.90,100
0,A,3,27.95,100
0,A,4,28.15,100
0,A,5,28.20,100
"""
(snap,) = load_book_series(io.StringIO(BOOK))
print("best bid / ask:", snap.best_bid, snap.best_ask)

# %%
for n in range(1, 6):
    eb, ea = effective_levels(snap, n)
    print(f"top {n}: EB {eb:.4f}  EA {ea:.4f}")

# %%
# Cumulative sizes at depth 5: 700 on the bid, 500 on the ask.
print(population_from_sizes(700, 500))
for mode in ("best", "effective(5)"):
    obs = extract_observables([snap], mode)
    print(mode, "relative spread", obs.spreads[0], "bid population", obs.populations[0])
