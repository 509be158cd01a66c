import numpy as np
import pytest
from scipy import integrate

from bidask.dynamics import (AmplitudeState, PopulationHistogram, Trajectory, arcsine_cdf, default_burn_in, gamma_ratio_check,
                             population_histogram, simulate_trajectory, step_amplitudes,
                             theoretical_population_pdf)
from bidask.errors import InvalidInputError, InvalidStateError
from bidask.model import ModelParams, PriceOperator2x2


def expm_taylor(A, terms=30):
    """Scaling-and-squaring Taylor exponential, independent of the library path."""
    norm = np.abs(A).sum(axis=1).max()
    s = max(0, int(np.ceil(np.log2(norm))) + 4) if norm > 0 else 0
    B = A / 2**s
    E = np.eye(2, dtype=complex)
    term = np.eye(2, dtype=complex)
    for k in range(1, terms):
        term = term @ B / k
        E = E + term
    for _ in range(s):
        E = E @ E
    return E


def random_state(rng):
    v = rng.normal(size=2) + 1j * rng.normal(size=2)
    v /= np.linalg.norm(v)
    return AmplitudeState(complex(v[0]), complex(v[1]))


def random_op(rng, scale=3.0):
    return PriceOperator2x2(rng.normal() * scale, rng.normal() * scale,
                            complex(rng.normal(), rng.normal()) * scale)


def test_matches_matrix_exponential():
    rng = np.random.default_rng(0)
    for _ in range(200):
        op, st = random_op(rng), random_state(rng)
        U = expm_taylor(-1j * op.matrix() * 0.37)
        want = U @ st.vector()
        got = step_amplitudes(st, op, dt=0.37, rho=1.0, renormalize=False).vector()
        np.testing.assert_allclose(got, want, atol=1e-10, rtol=0)


def test_zero_step_is_identity():
    rng = np.random.default_rng(1)
    st = random_state(rng)
    out = step_amplitudes(st, random_op(rng), dt=1e-15, rho=1.0)
    np.testing.assert_allclose(out.vector(), st.vector(), atol=1e-12)


def test_half_rabi_period_full_transfer():
    kappa = 0.8
    # half gap kappa/2; transfer complete when (kappa/2) * dt / rho = pi / 2
    out = step_amplitudes(AmplitudeState(), PriceOperator2x2(0, 0, kappa / 2), dt=np.pi / kappa, rho=1.0)
    assert out.pop_bid == pytest.approx(1.0, abs=1e-14)


def test_no_coupling_no_transfer():
    rng = np.random.default_rng(2)
    st = random_state(rng)
    for _ in range(50):
        st2 = step_amplitudes(st, PriceOperator2x2(rng.normal() * 5, rng.normal() * 5, 0), 0.7, 1.3)
        assert st2.pop_ask == pytest.approx(st.pop_ask, abs=1e-14)


def test_semigroup():
    rng = np.random.default_rng(3)
    for _ in range(50):
        op, st = random_op(rng), random_state(rng)
        full = step_amplitudes(st, op, 0.8, 1.0, renormalize=False)
        half = step_amplitudes(step_amplitudes(st, op, 0.4, 1.0, renormalize=False), op, 0.4, 1.0,
                               renormalize=False)
        np.testing.assert_allclose(half.vector(), full.vector(), atol=1e-12)


def test_rho_only_enters_through_ratio():
    rng = np.random.default_rng(4)
    op, st = random_op(rng), random_state(rng)
    a = step_amplitudes(st, op, 0.5, 2.0)
    b = step_amplitudes(st, op, 1.0, 4.0)
    np.testing.assert_allclose(a.vector(), b.vector(), atol=1e-14)


def test_unnormalized_state_rejected():
    with pytest.raises(InvalidStateError):
        step_amplitudes(AmplitudeState(1.0, 0.1), PriceOperator2x2(0, 0, 1), 1.0, 1.0)
    with pytest.raises(InvalidInputError):
        step_amplitudes(AmplitudeState(), PriceOperator2x2(0, 0, 1), 0.0, 1.0)


def test_adiabatic_small_phase():
    # Per-step population change from a pole is sin^2(g tau) ~ (g tau)^2.
    rng = np.random.default_rng(5)
    for phase in (1e-3, 3e-4):
        for _ in range(20):
            op = PriceOperator2x2(0.0, 0.0, 0.5 * rng.uniform(0.5, 1.0))
            tau = phase / op.half_gap
            out = step_amplitudes(AmplitudeState(), op, tau, 1.0)
            change = 1.0 - out.pop_ask
            assert change == pytest.approx(phase**2, rel=1e-6)


def test_simulate_noise_free_is_constant():
    traj = simulate_trajectory(AmplitudeState(0.6, 0.8), ModelParams(), 500, seed=0, mid0=50.0)
    np.testing.assert_allclose(traj.populations_ask, 0.36, atol=1e-14)
    assert np.all(traj.mids == 50.0)
    assert np.all(traj.spreads == 0.0)


def test_simulate_constant_coupling_rabi():
    kappa, rho, dt = 0.3, 2.0, 0.5
    p = ModelParams(kappa0=kappa, rho=rho, dt=dt)
    traj = simulate_trajectory(AmplitudeState(), p, 2000, seed=9)
    expected = np.cos(kappa * traj.times / (2 * rho)) ** 2
    np.testing.assert_allclose(traj.populations_ask, expected, atol=1e-11)


def test_rabi_period_average_is_half():
    kappa, rho = 1.0, 1.0
    n = 4000
    period = 2 * np.pi * rho / kappa
    p = ModelParams(kappa0=kappa, rho=rho, dt=period / n)
    traj = simulate_trajectory(AmplitudeState(), p, n, seed=0)
    assert traj.populations_ask.mean() == pytest.approx(0.5, abs=1e-6)


def test_simulate_matches_sequential_loop():
    p = ModelParams(sigma=0.01, xi0=0.1, xi1=0.3, kappa0=0.5, kappa1=0.2, rho=0.7, dt=0.3)
    traj = simulate_trajectory(AmplitudeState(), p, 3000, seed=42, mid0=10.0)
    from bidask.dynamics import shock_streams
    from bidask.model import Shocks, build_operator, eigen_prices

    rz, ru, rv = shock_streams(42)
    dz, du, dv = rz.standard_normal(3000), ru.standard_normal(3000), rv.standard_normal(3000)
    st, mid = AmplitudeState(), 10.0
    for k in range(3000):
        op = build_operator(mid, p, Shocks(dz[k], du[k], dv[k]))
        st = step_amplitudes(st, op, p.dt, p.rho)
        e = eigen_prices(op)
        mid = float(e.mid)
        assert traj.populations_ask[k] == pytest.approx(st.pop_ask, abs=1e-11)
        assert traj.spreads[k] == pytest.approx(float(e.spread), abs=1e-12)
        assert traj.mids[k] == pytest.approx(mid, abs=1e-12)
    np.testing.assert_allclose(traj.final_state.vector(), st.vector(), atol=1e-10)


def test_simulate_deterministic_and_valid():
    p = ModelParams(sigma=0.5, xi1=0.2, kappa0=0.4, kappa1=0.1, rho=1.0)
    a = simulate_trajectory(AmplitudeState(), p, 5000, seed=7)
    b = simulate_trajectory(AmplitudeState(), p, 5000, seed=7)
    np.testing.assert_array_equal(a.populations_ask, b.populations_ask)
    np.testing.assert_array_equal(a.mids, b.mids)
    assert np.all((a.populations_ask >= 0) & (a.populations_ask <= 1))
    assert np.all(a.spreads >= 0)
    assert len(a.times) == len(a.mids) == len(a.spreads) == 5000
    with pytest.raises(InvalidInputError):
        simulate_trajectory(AmplitudeState(), p, 0, seed=1)


def test_trajectory_csv():
    p = ModelParams(xi1=0.2, kappa0=0.4)
    traj = simulate_trajectory(AmplitudeState(), p, 3, seed=1)
    lines = traj.to_csv().splitlines()
    assert lines[0] == "step,time,mid,spread,pop_ask"
    assert len(lines) == 4 and lines[1].startswith("1,1,")


def test_population_histogram_counts():
    traj = simulate_trajectory(AmplitudeState(), ModelParams(), 100, seed=0)
    h = population_histogram(traj, burn_in=10, n_bins=10)
    assert h.total == 90 and h.counts[-1] == 90
    assert np.all(np.diff(h.bin_edges) > 0) and h.bin_edges[0] == 0 and h.bin_edges[-1] == 1
    with pytest.raises(InvalidInputError):
        population_histogram(traj, burn_in=100)
    with pytest.raises(InvalidInputError):
        population_histogram(traj, n_bins=1)


def test_pure_coupling_histogram_is_arcsine():
    # xi == 0: motion stays on one great circle and the time-average is exactly arcsine.
    p = ModelParams(kappa0=0.35, kappa1=0.17, rho=1.0 / 0.02)
    traj = simulate_trajectory(AmplitudeState(), p, 400_000, seed=3)
    h = population_histogram(traj, default_burn_in(p), 10)
    expected = np.diff(arcsine_cdf(h.bin_edges))
    np.testing.assert_allclose(h.fractions(), expected, atol=3e-3)


def test_theoretical_population_pdf():
    assert theoretical_population_pdf(0.5) == pytest.approx(2 / np.pi)
    mass, _ = integrate.quad(theoretical_population_pdf, 0, 0.1)
    assert mass == pytest.approx(2 / np.pi * np.arcsin(np.sqrt(0.1)), rel=1e-8)
    assert mass == pytest.approx(0.2048, abs=1e-4)
    for p in (0.25, 0.31, 0.47):
        assert theoretical_population_pdf(p, 0.2, 0.6) == pytest.approx(
            theoretical_population_pdf(0.8 - p, 0.2, 0.6))
    total, _ = integrate.quad(theoretical_population_pdf, 0.2, 0.6, args=(0.2, 0.6))
    assert total == pytest.approx(1.0, abs=1e-8)
    with pytest.raises(InvalidInputError):
        theoretical_population_pdf(1.0)


def test_gamma_ratio_check():
    rep = gamma_ratio_check(1.0, 100_000, seed=1)
    assert rep.passed
    with pytest.raises(InvalidInputError):
        gamma_ratio_check(0.0, 10_000, seed=1)
    with pytest.raises(InvalidInputError):
        gamma_ratio_check(1.0, 100, seed=1)


def test_gamma_ratio_scale_free():
    # Gamma scale cancels in the ratio: same draws up to the scale factor.
    a = gamma_ratio_check(1.0, 10_000, seed=5)
    b = gamma_ratio_check(2.0, 10_000, seed=5)
    assert a.ks_statistic == pytest.approx(b.ks_statistic, abs=1e-12)


def test_default_burn_in():
    assert default_burn_in(ModelParams()) == 1000
    p = ModelParams(kappa0=2 * np.pi, rho=1.0, dt=0.01)
    assert default_burn_in(p) == 1000


def test_tail_to_centre_ratio_edges():
    edges = np.linspace(0, 1, 11)
    h = lambda c: PopulationHistogram(edges, np.asarray(c), int(np.sum(c)))  # noqa: E731
    assert h([2, 1, 1, 1, 1, 1, 1, 1, 1, 2]).tail_to_centre_ratio() == 2.0
    assert h([1, 0, 0, 0, 0, 0, 0, 0, 0, 0]).tail_to_centre_ratio() == np.inf
    assert np.isnan(h([0, 1, 0, 0, 0, 0, 0, 0, 0, 0]).tail_to_centre_ratio())
