"""Mid-price and spread risk.

Mid-price risk is the population standard deviation of the mid series and
its one-sided 95% level ``1.65 * sigma``. The spread has no closed-form
quantile in general, so its 95% level is a Monte Carlo percentile of the
calibrated spread law with a bootstrap standard error.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import InvalidInputError
from .spread import SpreadDistParams, sample_spreads

__all__ = ["RiskReport", "MCQuantile", "mid_volatility", "spread_var95", "risk_report",
           "MID_Q95_MULTIPLIER"]

MID_Q95_MULTIPLIER = 1.65
MIN_MC = 10_000


class MCQuantile(NamedTuple):
    value: float
    std_error: float
    mean: float


@dataclass(frozen=True)
class RiskReport:
    mid_sigma: float
    mid_var95: float
    spread_mean: float
    spread_var95: float
    spread_var95_se: float
    n_samples_used: int
    params_used: SpreadDistParams

    def to_dict(self):
        d = {k: getattr(self, k) for k in ("mid_sigma", "mid_var95", "spread_mean", "spread_var95",
                                           "spread_var95_se", "n_samples_used")}
        d["params_used"] = self.params_used.as_dict()
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_text(self) -> str:
        rows = [
            ("Mid-price", "risk of mid-price change", f"sigma = {self.mid_sigma:.6g}",
             f"1.65 sigma = {self.mid_var95:.6g}"),
            ("Spread", "risk of spread increase", f"mean = {self.spread_mean:.6g}",
             f"{self.spread_var95:.6g} (MC, se {self.spread_var95_se:.2g})"),
        ]
        head = ("Risk", "Meaning", "Estimate", "95% quantile")
        widths = [max(len(r[i]) for r in rows + [head]) for i in range(4)]
        fmt = "  ".join(f"{{:<{w}}}" for w in widths)
        lines = [fmt.format(*head), fmt.format(*("-" * w for w in widths))]
        lines += [fmt.format(*r) for r in rows]
        lines = [ln.rstrip() for ln in lines]
        return "\n".join(lines) + "\n"


def mid_volatility(mids) -> float:
    """Population (1/N) standard deviation of the mid-price series."""
    x = np.asarray(mids, dtype=float)
    if x.ndim != 1 or x.size < 2:
        raise InvalidInputError("need at least 2 mid prices")
    if not np.all(np.isfinite(x)):
        raise InvalidInputError("mid prices must be finite")
    return float(np.sqrt(np.mean((x - x.mean()) ** 2)))


def spread_var95(p: SpreadDistParams, n_mc: int = 100_000, seed: int = 0, n_boot: int = 200,
                 level: float = 0.95) -> MCQuantile:
    """Monte Carlo ``level`` percentile of the spread with a bootstrap standard error."""
    if n_mc < MIN_MC:
        raise InvalidInputError(f"n_mc must be >= {MIN_MC}")
    x = sample_spreads(p, n_mc, seed)
    q = float(np.quantile(x, level))
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x5EED]))
    boots = np.empty(n_boot)
    for b in range(n_boot):
        boots[b] = np.quantile(x[rng.integers(0, n_mc, n_mc)], level)
    return MCQuantile(value=q, std_error=float(boots.std(ddof=1)), mean=float(x.mean()))


def risk_report(observables, fit, n_mc: int = 100_000, seed: int = 0) -> RiskReport:
    """Assemble mid and spread risk from observations and fitted spread parameters.

    ``fit`` may be a ``FitResult`` or a ``SpreadDistParams``.
    """
    params = getattr(fit, "params", fit)
    if not isinstance(params, SpreadDistParams):
        raise InvalidInputError("fit must be a FitResult or SpreadDistParams")
    sigma = mid_volatility(observables.mids)
    q = spread_var95(params, n_mc, seed)
    return RiskReport(mid_sigma=sigma, mid_var95=MID_Q95_MULTIPLIER * sigma, spread_mean=q.mean,
                      spread_var95=q.value, spread_var95_se=q.std_error, n_samples_used=int(n_mc),
                      params_used=params)
