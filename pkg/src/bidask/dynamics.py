"""Amplitude propagation under the stochastic price operator.

The ask/bid amplitude pair evolves as ``i rho dpsi/dt = S psi``. Over one
step of length ``dt`` with the operator held fixed the propagator is the
exact unitary

    U = exp(-i m tau) * [cos(g tau) I - i sin(g tau)/g (S - m I)],
    tau = dt / rho,  m = (s11 + s22)/2,  g = spread / 2,

and a trajectory is the ordered product of such steps with freshly drawn
``xi`` and ``kappa`` at every step. Populations ``|psi_ask|**2`` are what the
order book reveals (best-level sizes), and their long-run histogram is the
object compared to the arcsine law.

Trajectories are computed by an associative scan over SU(2) factors, which
is exact (not an approximation of the sequential loop) and keeps rounding
error growth logarithmic in the number of steps.
"""

from __future__ import annotations

import cmath
import io
import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import InvalidInputError, InvalidStateError
from .model import ModelParams, PriceOperator2x2, build_operator, eigen_prices, Shocks

__all__ = [
    "AmplitudeState",
    "Trajectory",
    "PopulationHistogram",
    "GammaRatioReport",
    "step_amplitudes",
    "simulate_trajectory",
    "population_histogram",
    "theoretical_population_pdf",
    "arcsine_cdf",
    "gamma_ratio_check",
    "default_burn_in",
    "rho_from_phase_scale",
    "shock_streams",
]

_NORM_TOL = 1e-6
_CHUNK = 1 << 14


@dataclass(frozen=True)
class AmplitudeState:
    psi_ask: complex = 1.0 + 0j
    psi_bid: complex = 0j

    @property
    def norm2(self) -> float:
        return abs(self.psi_ask) ** 2 + abs(self.psi_bid) ** 2

    @property
    def pop_ask(self) -> float:
        return abs(self.psi_ask) ** 2

    @property
    def pop_bid(self) -> float:
        return abs(self.psi_bid) ** 2

    def vector(self) -> np.ndarray:
        return np.array([self.psi_ask, self.psi_bid], dtype=complex)


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    populations_ask: np.ndarray
    mids: np.ndarray
    spreads: np.ndarray
    final_state: AmplitudeState | None = None

    def __len__(self):
        return len(self.times)

    def to_csv(self, fh=None):
        out = io.StringIO() if fh is None else fh
        out.write("step,time,mid,spread,pop_ask\n")
        for k in range(len(self.times)):
            out.write(f"{k + 1},{self.times[k]:.17g},{self.mids[k]:.17g},"
                      f"{self.spreads[k]:.17g},{self.populations_ask[k]:.17g}\n")
        if fh is None:
            return out.getvalue()


@dataclass(frozen=True)
class PopulationHistogram:
    bin_edges: np.ndarray
    counts: np.ndarray
    total: int

    @property
    def n_bins(self) -> int:
        return len(self.counts)

    def density(self) -> np.ndarray:
        """Counts normalized to a probability density over [0, 1]."""
        return self.counts / (self.total * np.diff(self.bin_edges))

    def fractions(self) -> np.ndarray:
        return self.counts / self.total

    def tail_to_centre_ratio(self) -> float:
        """Mean of the two outer bins over the mean of the two (or one) central bins.

        Returns ``inf`` for an empty centre with occupied tails, ``nan`` if both are empty.
        """
        c = self.counts.astype(float)
        n = len(c)
        centre = c[n // 2 - 1:n // 2 + 1] if n % 2 == 0 else c[n // 2:n // 2 + 1]
        tails, mid = 0.5 * (c[0] + c[-1]), centre.mean()
        if mid == 0:
            return float("inf") if tails > 0 else float("nan")
        return float(tails / mid)


@dataclass(frozen=True)
class GammaRatioReport:
    theta: float
    n: int
    ks_statistic: float
    critical_value: float
    p_value: float

    @property
    def passed(self) -> bool:
        return self.ks_statistic < self.critical_value


def rho_from_phase_scale(phase_scale, dt=1.0, price_level=1.0):
    """``rho`` such that ``price_level * dt / rho == phase_scale``."""
    if phase_scale <= 0 or dt <= 0 or price_level <= 0:
        raise InvalidInputError("phase_scale, dt and price_level must be > 0")
    return price_level * dt / phase_scale


def default_burn_in(params: ModelParams) -> int:
    """Ten population-oscillation periods at the mean coupling, or 1000 steps."""
    rate = abs(params.kappa0) * params.phase_per_step
    if rate == 0:
        return 1000
    return int(np.ceil(10 * 2 * np.pi / rate))


def _su2_factors(s11, s22, s12, tau):
    # Traceless part of exp(-i tau S) as (a, b) with U = [[a, -conj(b)], [b, conj(a)]].
    s11 = np.asarray(s11, dtype=float)
    half_diff = 0.5 * (s11 - s22)
    g = np.hypot(half_diff, np.abs(s12))
    sinc = tau * np.sinc(g * tau / np.pi)
    a = np.cos(g * tau) - 1j * sinc * half_diff
    b = -1j * sinc * np.conj(s12)
    return a, b


def _su2_scalar(s11, s22, s12, tau):
    # pure-float version of _su2_factors for the per-step API
    half_diff = 0.5 * (s11 - s22)
    g = math.hypot(half_diff, abs(s12))
    x = g * tau
    sinc = tau * (math.sin(x) / x if x != 0.0 else 1.0)
    return complex(math.cos(x), -sinc * half_diff), -1j * sinc * s12.conjugate()


def step_amplitudes(state: AmplitudeState, op: PriceOperator2x2, dt, rho,
                    renormalize=True) -> AmplitudeState:
    """Advance ``state`` by one step of length ``dt`` under the fixed operator ``op``."""
    if dt <= 0 or rho <= 0:
        raise InvalidInputError("dt and rho must be > 0")
    if abs(state.norm2 - 1.0) > _NORM_TOL:
        raise InvalidStateError(f"state norm^2 = {state.norm2!r}, expected 1")
    tau = dt / rho
    s11, s22, s12 = float(op.s11), float(op.s22), complex(op.s12)
    a, b = _su2_scalar(s11, s22, s12, tau)
    phase = cmath.exp(-0.5j * (s11 + s22) * tau)
    pa = phase * (a * state.psi_ask - b.conjugate() * state.psi_bid)
    pb = phase * (b * state.psi_ask + a.conjugate() * state.psi_bid)
    if renormalize:
        nrm = math.sqrt(abs(pa) ** 2 + abs(pb) ** 2)
        pa, pb = pa / nrm, pb / nrm
    return AmplitudeState(complex(pa), complex(pb))


def _scan_su2(a, b):
    """Running products ``U_k ... U_1`` of SU(2) factors given as (a, b) arrays."""
    a_out = np.empty_like(a)
    b_out = np.empty_like(b)
    ca, cb = 1.0 + 0j, 0j
    for lo in range(0, a.size, _CHUNK):
        pa = a[lo:lo + _CHUNK].copy()
        pb = b[lo:lo + _CHUNK].copy()
        shift = 1
        while shift < pa.size:
            # (later) @ (earlier): a = a1 a2 - conj(b1) b2, b = b1 a2 + conj(a1) b2
            la, lb = pa[shift:], pb[shift:]
            ea, eb = pa[:-shift], pb[:-shift]
            na = la * ea - np.conj(lb) * eb
            nb = lb * ea + np.conj(la) * eb
            pa[shift:], pb[shift:] = na, nb
            shift *= 2
        a_out[lo:lo + pa.size] = pa * ca - np.conj(pb) * cb
        b_out[lo:lo + pa.size] = pb * ca + np.conj(pa) * cb
        ca, cb = a_out[lo + pa.size - 1], b_out[lo + pa.size - 1]
    return a_out, b_out


def shock_streams(seed):
    """Independent generators for the dz, du and dv draws."""
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(3)]


def simulate_trajectory(init: AmplitudeState, params: ModelParams, n_steps: int, seed: int,
                        mid0: float = 0.0) -> Trajectory:
    """Propagate ``init`` through ``n_steps`` stochastic operators.

    Each step draws (dz, du, dv), builds the operator around the previous
    mid, advances the amplitudes with the exact one-step propagator and
    records ``|psi_ask|**2`` together with the operator's mid and spread.
    """
    if n_steps < 1:
        raise InvalidInputError("n_steps must be >= 1")
    if abs(init.norm2 - 1.0) > _NORM_TOL:
        raise InvalidStateError(f"state norm^2 = {init.norm2!r}, expected 1")
    rz, ru, rv = shock_streams(seed)
    dz = rz.standard_normal(n_steps)
    du = ru.standard_normal(n_steps)
    dv = rv.standard_normal(n_steps)

    increments = params.sigma * np.sqrt(params.dt) * dz
    mid_prev = mid0 + np.concatenate([[0.0], np.cumsum(increments[:-1])])
    op = build_operator(mid_prev, params, Shocks(dz=dz, du=du, dv=dv))
    prices = eigen_prices(op)

    tau = params.phase_per_step
    a, b = _su2_factors(op.s11, op.s22, op.s12, tau)
    a, b = _scan_su2(a, b)
    phase = np.exp(-1j * np.cumsum(0.5 * (op.s11 + op.s22) * tau))
    psi_ask = phase * (a * init.psi_ask - np.conj(b) * init.psi_bid)
    psi_bid = phase * (b * init.psi_ask + np.conj(a) * init.psi_bid)
    nrm = np.sqrt(np.abs(psi_ask) ** 2 + np.abs(psi_bid) ** 2)
    psi_ask, psi_bid = psi_ask / nrm, psi_bid / nrm

    return Trajectory(
        times=params.dt * np.arange(1, n_steps + 1),
        populations_ask=np.abs(psi_ask) ** 2,
        mids=np.asarray(prices.mid, dtype=float),
        spreads=np.asarray(prices.spread, dtype=float),
        final_state=AmplitudeState(complex(psi_ask[-1]), complex(psi_bid[-1])),
    )


def population_histogram(traj, burn_in: int = 0, n_bins: int = 10) -> PopulationHistogram:
    """Histogram of populations on [0, 1] after dropping ``burn_in`` leading steps.

    ``traj`` may be a :class:`Trajectory` or any 1D sequence of populations.
    """
    pops = traj.populations_ask if isinstance(traj, Trajectory) else np.asarray(traj, dtype=float)
    if n_bins < 2:
        raise InvalidInputError("n_bins must be >= 2")
    if burn_in < 0 or burn_in >= len(pops):
        raise InvalidInputError("burn_in leaves no samples")
    kept = pops[burn_in:]
    edges = np.linspace(0.0, 1.0, n_bins + 1)
    counts, _ = np.histogram(np.clip(kept, 0.0, 1.0), bins=edges)
    return PopulationHistogram(bin_edges=edges, counts=counts, total=int(counts.sum()))


def theoretical_population_pdf(p, pmin=0.0, pmax=1.0):
    """Normalized occupation density ``1 / (pi sqrt((pmax - p)(p - pmin)))``.

    With ``pmin=0, pmax=1`` this is the Beta(1/2, 1/2) (arcsine) density.
    """
    p = np.asarray(p, dtype=float)
    if not pmin < pmax:
        raise InvalidInputError("need pmin < pmax")
    if np.any(p <= pmin) or np.any(p >= pmax):
        raise InvalidInputError("p must lie strictly inside (pmin, pmax)")
    out = 1.0 / (np.pi * np.sqrt((pmax - p) * (p - pmin)))
    return out[()] if out.ndim == 0 else out


def arcsine_cdf(p, pmin=0.0, pmax=1.0):
    p = np.clip((np.asarray(p, dtype=float) - pmin) / (pmax - pmin), 0.0, 1.0)
    return 2.0 / np.pi * np.arcsin(np.sqrt(p))


def ks_critical_value(n, alpha=0.01):
    """Two-sided one-sample KS critical value at level ``alpha`` (exact distribution)."""
    return float(stats.kstwo.ppf(1.0 - alpha, n))


def gamma_ratio_check(theta: float, n: int, seed: int) -> GammaRatioReport:
    """KS test of ``N_bid / (N_bid + N_ask)`` against Beta(1/2, 1/2).

    Both sizes are drawn from Gamma(shape=1/2, scale=theta) on separate
    streams.
    """
    if not theta > 0:
        raise InvalidInputError("theta must be > 0")
    if n < 1000:
        raise InvalidInputError("n must be >= 1000")
    r_bid, r_ask = (np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(2))
    n_bid = r_bid.gamma(0.5, theta, n)
    n_ask = r_ask.gamma(0.5, theta, n)
    p = n_bid / (n_bid + n_ask)
    res = stats.kstest(p, stats.beta(0.5, 0.5).cdf)
    return GammaRatioReport(theta=float(theta), n=int(n), ks_statistic=float(res.statistic),
                            critical_value=ks_critical_value(n), p_value=float(res.pvalue))
