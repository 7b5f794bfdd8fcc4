import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from geodissip.bloch import (
    DissipatorParams,
    cycle_averaged_power,
    dissipation_rate,
    instant_frame,
    integrate_bloch,
    quality_factor,
    relaxation_matrix,
    steady_state,
    steady_state_matrix_solve,
    toy_model_dissipation,
    toy_steady_state_check,
    unit_rate,
)
from geodissip.errors import DegenerateField, NotUnit, StepTooLarge
from geodissip.model import DriveEllipse, SpinModel

from conftest import random_unit

vec = st.lists(st.floats(-3, 3, allow_nan=False), min_size=3, max_size=3).map(np.array)


def static_model(d):
    return SpinModel(DriveEllipse(0.0, 0.0), DriveEllipse(0.0, 0.0), d)


def test_params_validation():
    with pytest.raises(ValueError):
        DissipatorParams(1.0, 3.0)
    with pytest.raises(ValueError):
        DissipatorParams(1.0, 1.0, "thermal")
    with pytest.raises(ValueError):
        DissipatorParams(-1.0, 1.0)
    DissipatorParams(1.0, 2.0)  # tau2 = 2 tau1 is allowed


def test_thermal_s0():
    s = [DissipatorParams(1, 1, "thermal", beta=b).s0(1.0) for b in (0.1, 1.0, 10.0)]
    assert 0 < s[0] < s[1] < s[2] < 1
    assert s[1] == pytest.approx(np.tanh(0.5))


def test_relaxation_matrix_examples():
    np.testing.assert_allclose(relaxation_matrix([0, 0, 1], DissipatorParams(10, 10)), 0.1 * np.eye(3))
    np.testing.assert_allclose(relaxation_matrix([0, 0, 1], DissipatorParams(2, 1)), np.diag([1, 1, 0.5]))
    with pytest.raises(NotUnit):
        relaxation_matrix([0, 0, 1.1], DissipatorParams(1, 1))


def test_relaxation_matrix_spectrum(rng):
    p = DissipatorParams(3.0, 1.5)
    for _ in range(20):
        u = random_unit(rng)
        G = relaxation_matrix(u, p)
        np.testing.assert_allclose(G, G.T, atol=0)
        np.testing.assert_allclose(np.sort(np.linalg.eigvalsh(G)), [1 / 3, 2 / 3, 2 / 3], atol=1e-12)
        np.testing.assert_allclose(G @ u, u / 3, atol=1e-15)


def test_quality_factor_examples():
    assert quality_factor(1.0, 1.0) == 1.0
    assert quality_factor(1.0, 10.0) == pytest.approx(20 / 101, rel=1e-15)
    assert quality_factor(62.832, 1.0) == pytest.approx(0.031823, rel=1e-4)


@given(st.floats(1e-3, 1e3), st.floats(1e-3, 1e3))
def test_quality_factor_range(delta, tau):
    g = quality_factor(delta, tau)
    assert 0 < g <= 1


def test_adiabatic_limit():
    d = np.array([0.3, -0.2, 0.9])
    np.testing.assert_allclose(steady_state(d, np.zeros(3), DissipatorParams(2, 3)), d / np.linalg.norm(d))
    np.testing.assert_allclose(steady_state_matrix_solve(d, np.zeros(3), DissipatorParams(2, 3)),
                               d / np.linalg.norm(d), atol=1e-15)


def toy_state(t=0.0, omega=0.1):
    d = 0.5 * np.array([np.cos(omega * t), np.sin(omega * t), 0.0])
    d_dot = 0.5 * omega * np.array([-np.sin(omega * t), np.cos(omega * t), 0.0])
    return d, d_dot


def frame_components(S, d, d_dot):
    f = instant_frame(d, d_dot)
    return np.array([f.e_hat @ S, f.f_hat @ S, f.d_hat @ S])


@pytest.mark.parametrize("solver", [steady_state, steady_state_matrix_solve])
def test_toy_frame_components(solver):
    # signs (+, -, +): spin lags behind d_hat along f and leans along e
    d, d_dot = toy_state()
    S = solver(d, d_dot, DissipatorParams(10, 10))
    np.testing.assert_allclose(frame_components(S, d, d_dot), np.array([10, -1, 101]) / 102, atol=1e-14)


def test_frame_is_right_handed(rng):
    for _ in range(10):
        d, d_dot = rng.normal(size=3), rng.normal(size=3)
        f = instant_frame(d, d_dot)
        M = np.array([f.e_hat, f.f_hat, f.d_hat])
        np.testing.assert_allclose(M @ M.T, np.eye(3), atol=1e-12)
        np.testing.assert_allclose(np.cross(f.f_hat, f.d_hat), f.e_hat, atol=1e-10)


def test_matrix_solve_agrees(rng):
    worst = 0.0
    for _ in range(1000):
        d = rng.normal(size=3) * rng.uniform(0.1, 3)
        d_dot = rng.normal(size=3) * rng.uniform(0, 2)
        t1 = rng.uniform(0.1, 20)
        p = DissipatorParams(t1, rng.uniform(0.05, 2) * t1)
        a, b = steady_state(d, d_dot, p), steady_state_matrix_solve(d, d_dot, p)
        worst = max(worst, np.linalg.norm(a - b) / np.linalg.norm(a))
    assert worst <= 1e-12


@settings(max_examples=200)
@given(vec, vec, st.floats(0.01, 50), st.floats(0.01, 2.0))
def test_steady_state_norm_bound(d, d_dot, tau1, ratio):
    if np.linalg.norm(d) < 1e-3:
        return
    p = DissipatorParams(tau1, ratio * tau1)
    assert np.linalg.norm(steady_state(d, d_dot, p)) <= 1 + 1e-12


@settings(max_examples=200)
@given(vec, vec, st.floats(0.01, 50))
def test_isotropic_norm_identity(d, d_dot, tau):
    if np.linalg.norm(d) < 1e-3:
        return
    S = steady_state(d, d_dot, DissipatorParams(tau, tau))
    w = unit_rate(d, d_dot)
    x2 = (2 * np.linalg.norm(d) * tau) ** 2
    lhs = (S @ S) * (1 + (w @ w) * tau**2 + x2)
    assert lhs == pytest.approx(1 + x2, rel=1e-12)


def test_steady_state_degenerate():
    with pytest.raises(DegenerateField):
        steady_state(np.zeros(3), np.ones(3), DissipatorParams(1, 1))


def test_static_relaxation():
    tau = 10.0
    m = static_model([0, 0, 0.5])
    traj = integrate_bloch(m, DissipatorParams(tau, tau), [1.0, 0.0, 0.0], 200.0, 0.05)
    k = int(round(tau / 0.05))
    transverse = np.linalg.norm(traj.spins[k, :2])
    assert transverse == pytest.approx(np.exp(-1.0), rel=0.01)
    np.testing.assert_allclose(traj.spins[-1], [0, 0, 1], atol=1e-7)


def test_step_limits():
    m = SpinModel.toy(1.0, 0.1)
    with pytest.raises(StepTooLarge):
        integrate_bloch(m, DissipatorParams(10, 10), [0, 0, 1], 10.0, 1.0)
    with pytest.raises(ValueError):
        integrate_bloch(m, DissipatorParams(10, 10), [0, 0, 1.5], 10.0, 0.1)


def test_rk4_order():
    m = SpinModel.toy(1.0, 0.1)
    p = DissipatorParams(10, 10)
    T = 24.0
    ref = integrate_bloch(m, p, [1.0, 0, 0], T, 0.0125).spins[-1]
    errs = [np.linalg.norm(integrate_bloch(m, p, [1.0, 0, 0], T, dt).spins[-1] - ref) for dt in (0.4, 0.2)]
    order = np.log2(errs[0] / errs[1])
    assert order == pytest.approx(4.0, abs=0.2)


def test_toy_dissipation_examples():
    p = DissipatorParams(10, 10)
    assert toy_model_dissipation(1.0, 0.1, p) == pytest.approx(0.05 / 102, rel=1e-14)
    assert toy_model_dissipation(1.0, 0.0, p) == 0.0
    with pytest.raises(ValueError):
        toy_model_dissipation(0.0, 0.1, p)


def test_toy_dissipation_vanishes_for_fast_relaxation():
    taus = np.geomspace(1e-6, 0.5, 30)  # below the peak at delta tau ~ 1
    w = [toy_model_dissipation(1.0, 0.1, DissipatorParams(t, t)) for t in taus]
    assert np.all(np.diff(w) > 0)
    assert w[0] < 1e-8


def test_ode_cycle_average_and_energy_balance():
    p = DissipatorParams(10, 10)
    avg = cycle_averaged_power(SpinModel.toy(1.0, 0.1), p)
    exact = toy_model_dissipation(1.0, 0.1, p)
    assert avg.dissipation == pytest.approx(exact, rel=0.01)
    assert avg.work == pytest.approx(avg.dissipation, rel=0.02)


def test_heat_is_nonnegative(rng):
    p = DissipatorParams(2.0, 3.0)
    for _ in range(50):
        d = rng.normal(size=3)
        S = steady_state(d, rng.normal(size=3), p)
        assert dissipation_rate(d, S, p) >= -1e-15


def test_toy_steady_state_matches_ode():
    c = toy_steady_state_check(1.0, 0.02, DissipatorParams(10, 10))
    assert np.abs(c.analytic - c.ode).max() <= 5 * 0.02**2


def test_two_tone_slow_drive_tracks_steady_state():
    m = SpinModel.two_tone(omega1=0.01, omega2=0.005)
    p = DissipatorParams(1.0, 1.0)
    traj = integrate_bloch(m, p, [0, 0, 1], 300.0, 0.05)
    t = traj.times[-1]
    d = m.d_at(m.omega1 * t, m.omega2 * t)
    d_dot = m.d_dot(np.array([t]))[0]
    ratio = np.linalg.norm(unit_rate(d, d_dot)) / (2 * np.linalg.norm(d))
    S = steady_state(d, d_dot, p)
    assert np.linalg.norm(S - traj.spins[-1]) <= 5 * ratio**2
