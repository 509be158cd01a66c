"""Two-level price operator and its stochastic update.

The ask and bid prices are the two eigenvalues of a Hermitian 2x2 matrix

    S = [[s11, s12], [conj(s12), s22]]

so that mid = (s11 + s22) / 2 and spread = sqrt((s11 - s22)**2 + 4|s12|**2).
The stochastic model shifts both diagonal elements by a Gaussian mid-price
increment and draws the diagonal asymmetry ``xi`` and the coupling ``kappa``
from independent normals at every observation.

All functions broadcast over numpy arrays.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError

__all__ = [
    "PriceOperator2x2",
    "EigenPrices",
    "ModelParams",
    "Shocks",
    "eigen_prices",
    "build_operator",
    "step_mid",
    "spread_realization",
]


@dataclass(frozen=True)
class PriceOperator2x2:
    """Hermitian 2x2 price operator; the (2,1) entry is ``conj(s12)``."""

    s11: float
    s22: float
    s12: complex = 0.0

    def __post_init__(self):
        for name in ("s11", "s22", "s12"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise InvalidInputError(f"operator element {name} is not finite")
        if np.any(np.iscomplex(self.s11)) or np.any(np.iscomplex(self.s22)):
            raise InvalidInputError("diagonal elements must be real")

    def matrix(self) -> np.ndarray:
        """Dense matrix (only for scalar operators)."""
        s12 = complex(self.s12)
        return np.array([[self.s11, s12], [s12.conjugate(), self.s22]], dtype=complex)

    @property
    def half_gap(self):
        """Half the eigenvalue separation, ``sqrt(((s11-s22)/2)**2 + |s12|**2)``."""
        return np.hypot(0.5 * (np.asarray(self.s11) - self.s22), np.abs(self.s12))


@dataclass(frozen=True)
class EigenPrices:
    ask: float
    bid: float
    mid: float
    spread: float


@dataclass(frozen=True)
class ModelParams:
    """Parameters of the stochastic price operator.

    Parameters
    ----------
    sigma : float
        Mid-price volatility per sqrt(unit time), in price units.
    xi0, xi1 : float
        Mean and standard deviation of the intrinsic (diagonal) component.
    kappa0, kappa1 : float
        Mean and standard deviation of the interaction (coupling) component.
    rho : float
        Phase-jitter constant (time * price). Only ``dt / rho`` matters.
    dt : float
        Time step.
    """

    sigma: float = 0.0
    xi0: float = 0.0
    xi1: float = 0.0
    kappa0: float = 0.0
    kappa1: float = 0.0
    rho: float = 1.0
    dt: float = 1.0

    def __post_init__(self):
        values = [self.sigma, self.xi0, self.xi1, self.kappa0, self.kappa1, self.rho, self.dt]
        if not all(np.isfinite(v) for v in values):
            raise InvalidInputError("model parameters must be finite")
        if self.sigma < 0:
            raise InvalidInputError("sigma must be >= 0")
        if self.xi1 < 0 or self.kappa1 < 0:
            raise InvalidInputError("xi1 and kappa1 must be >= 0")
        if self.rho <= 0 or self.dt <= 0:
            raise InvalidInputError("rho and dt must be > 0")

    @property
    def phase_per_step(self) -> float:
        """Dimensionless factor ``dt / rho`` multiplying the operator each step."""
        return self.dt / self.rho

    def spread_params(self):
        from .spread import SpreadDistParams

        return SpreadDistParams(self.xi0, self.xi1, self.kappa0, self.kappa1)


@dataclass(frozen=True)
class Shocks:
    """Standard normal draws for the mid (dz), intrinsic (du) and coupling (dv) terms."""

    dz: float = 0.0
    du: float = 0.0
    dv: float = 0.0


def eigen_prices(op: PriceOperator2x2) -> EigenPrices:
    """Ask/bid eigenvalues of ``op`` with the derived mid and spread.

    ``mid`` and ``spread`` are formed from the returned ask and bid so that
    ``mid == (ask + bid) / 2`` and ``spread == ask - bid`` hold exactly.
    """
    if not isinstance(op, PriceOperator2x2):
        raise InvalidInputError("expected a PriceOperator2x2")
    centre = 0.5 * (np.asarray(op.s11, dtype=float) + np.asarray(op.s22, dtype=float))
    r = op.half_gap
    ask = centre + r
    bid = centre - r
    return EigenPrices(ask=ask, bid=bid, mid=0.5 * (ask + bid), spread=ask - bid)


def build_operator(mid_prev, params: ModelParams, shocks: Shocks) -> PriceOperator2x2:
    """Stochastic operator for the next observation.

    ``xi = xi0 + xi1*du`` and ``kappa = kappa0 + kappa1*dv`` are drawn fresh;
    both diagonal elements share the mid-price move ``sigma*sqrt(dt)*dz``.
    """
    xi = params.xi0 + params.xi1 * np.asarray(shocks.du, dtype=float)
    kappa = params.kappa0 + params.kappa1 * np.asarray(shocks.dv, dtype=float)
    common = step_mid(mid_prev, params.sigma, shocks.dz, params.dt)
    return PriceOperator2x2(s11=common + 0.5 * xi, s22=common - 0.5 * xi, s12=0.5 * kappa)


def step_mid(mid_prev, sigma, dz, dt):
    """Gaussian mid-price step ``mid_prev + sigma*sqrt(dt)*dz``."""
    if np.any(np.asarray(dt) <= 0):
        raise InvalidInputError("dt must be > 0")
    return mid_prev + sigma * np.sqrt(dt) * np.asarray(dz, dtype=float)


def spread_realization(params, du, dv):
    """One draw of the spread, ``hypot(xi0 + xi1*du, kappa0 + kappa1*dv)``.

    ``params`` may be a :class:`ModelParams` or a ``SpreadDistParams``.
    """
    return np.hypot(params.xi0 + params.xi1 * np.asarray(du, dtype=float),
                    params.kappa0 + params.kappa1 * np.asarray(dv, dtype=float))
