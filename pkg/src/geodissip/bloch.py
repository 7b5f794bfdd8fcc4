"""Bloch equation with an isotropic relaxation matrix.

Conventions: the spin obeys dS/dt = 2 d x S - Gamma (S - s0 d_hat), and
S = s0 d_hat is the instantaneous equilibrium (the spin's low-energy state),
so the energy of the spin is -d.S.  Heat flows into the bath at the
non-negative rate (|d|/tau1)(s0 - d_hat.S), and the drive does work at the
rate -d_dot.S.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from .errors import DegenerateField, NotUnit, SingularMatrix, StepTooLarge
from .integrate import rk4_linear
from .model import GAP_TOLERANCE, TWO_PI, DriveModel, X_HAT, Y_HAT, Z_HAT


@dataclass(frozen=True)
class DissipatorParams:
    """Relaxation times and the equilibrium polarization s0.

    ``s0_mode`` is ``"unity"`` (s0 = 1, the low-temperature limit) or
    ``"thermal"`` (s0 = tanh(beta * gap / 2)).
    """

    tau1: float
    tau2: float
    s0_mode: str = "unity"
    beta: float | None = None

    def __post_init__(self):
        if not (self.tau1 > 0 and self.tau2 > 0):
            raise ValueError("relaxation times must be positive")
        if self.tau2 > 2 * self.tau1 + 1e-12:
            raise ValueError("tau2 <= 2 tau1 is required")
        if self.s0_mode not in ("unity", "thermal"):
            raise ValueError(f"unknown s0_mode {self.s0_mode!r}")
        if self.s0_mode == "thermal" and not (self.beta is not None and self.beta > 0):
            raise ValueError("thermal s0 needs beta > 0")

    @classmethod
    def isotropic(cls, tau, **kw):
        return cls(tau, tau, **kw)

    def s0(self, delta):
        if self.s0_mode == "unity":
            return np.ones_like(np.asarray(delta, dtype=float))
        return np.tanh(0.5 * self.beta * np.asarray(delta, dtype=float))


class InstantFrame(NamedTuple):
    d_hat: np.ndarray
    f_hat: np.ndarray
    e_hat: np.ndarray


@dataclass(frozen=True)
class BlochTrajectory:
    times: np.ndarray
    spins: np.ndarray
    step: float

    def __post_init__(self):
        if np.any(np.linalg.norm(self.spins, axis=-1) > 1 + 1e-9):
            raise ValueError("Bloch vector left the unit ball")


def _dot(a, b):
    return np.sum(a * b, axis=-1)


def quality_factor(delta, tau2):
    """gamma = 2 tau2 delta / (1 + (delta tau2)^2), in (0, 1]."""
    x = np.asarray(delta) * tau2
    return 2.0 * x / (1.0 + x * x)


def relaxation_matrix(d_hat, params: DissipatorParams) -> np.ndarray:
    d_hat = np.asarray(d_hat, dtype=float)
    if abs(np.linalg.norm(d_hat) - 1.0) > 1e-6:
        raise NotUnit(f"|d_hat| = {np.linalg.norm(d_hat)!r}")
    P = np.outer(d_hat, d_hat)
    return P / params.tau1 + (np.eye(3) - P) / params.tau2


def unit_rate(d, d_dot):
    """Time derivative of d_hat given d and its time derivative."""
    r = np.linalg.norm(d, axis=-1)[..., None]
    u = d / r
    return (d_dot - u * _dot(u, d_dot)[..., None]) / r


def instant_frame(d, d_dot) -> InstantFrame:
    """(d_hat, f_hat, e_hat) with f_hat along d_hat_dot and e_hat = f_hat x d_hat."""
    d = np.asarray(d, dtype=float)
    u = d / np.linalg.norm(d)
    w = unit_rate(d, np.asarray(d_dot, dtype=float))
    f = w / np.linalg.norm(w)
    return InstantFrame(u, f, np.cross(f, u))


def _check_gap(d):
    if np.any(np.linalg.norm(d, axis=-1) < GAP_TOLERANCE):
        raise DegenerateField("|d| below gap tolerance")


def steady_state(d, d_dot, params: DissipatorParams):
    """Quasi-adiabatic steady state to leading diabatic order.

    S = s0 [(1 + x^2) d_hat - tau2 w - gap tau2^2 (d_hat x w)] / (1 + |w|^2 tau1 tau2 + x^2)
    with w = d(d_hat)/dt and x = gap * tau2.  Broadcasts over leading axes.
    """
    d = np.asarray(d, dtype=float)
    d_dot = np.asarray(d_dot, dtype=float)
    _check_gap(d)
    r = np.linalg.norm(d, axis=-1)
    u = d / r[..., None]
    w = unit_rate(d, d_dot)
    delta = 2.0 * r
    t1, t2 = params.tau1, params.tau2
    x2 = (delta * t2) ** 2
    denom = 1.0 + _dot(w, w) * t1 * t2 + x2
    num = (1.0 + x2)[..., None] * u - t2 * w - (delta * t2**2)[..., None] * np.cross(u, w)
    return params.s0(delta)[..., None] * num / denom[..., None]


def _transverse_basis(u):
    ref = (X_HAT, Y_HAT, Z_HAT)[int(np.argmin(np.abs(u)))]
    a = ref - u * (u @ ref)
    a /= np.linalg.norm(a)
    return a, np.cross(u, a)


def _skew(v):
    return np.array([[0.0, -v[2], v[1]], [v[2], 0.0, -v[0]], [-v[1], v[0], 0.0]])


def steady_state_matrix_solve(d, d_dot, params: DissipatorParams) -> np.ndarray:
    """Same steady state, via an explicit 3x3 solve in the co-rotating frame.

    In a parallel-transported frame (x, y, z = d_hat) the spin sees the field
    gap z - |w| (a x + b y), where (a, b) locate d_hat x w / |w| in the
    transverse plane.  Setting dS'/dt = 0 gives M S' = -(s0/tau1) z with
    M = [field]x - diag(1/tau2, 1/tau2, 1/tau1).
    """
    d = np.asarray(d, dtype=float)
    d_dot = np.asarray(d_dot, dtype=float)
    _check_gap(d)
    r = np.linalg.norm(d)
    u = d / r
    w = unit_rate(d, d_dot)
    speed = np.linalg.norm(w)
    ex, ey = _transverse_basis(u)
    if speed > 0:
        n = np.cross(u, w) / speed
        a, b = n @ ex, n @ ey
    else:
        a = b = 0.0
    delta = 2.0 * r
    field = np.array([-speed * a, -speed * b, delta])
    M = _skew(field) - np.diag([1 / params.tau2, 1 / params.tau2, 1 / params.tau1])
    if np.linalg.cond(M) > 1e13:
        raise SingularMatrix("rotating-frame matrix is numerically singular")
    s0 = float(params.s0(delta))
    sp = np.linalg.solve(M, np.array([0.0, 0.0, -s0 / params.tau1]))
    return sp[0] * ex + sp[1] * ey + sp[2] * u


def bloch_rhs(d, S, params: DissipatorParams):
    """Right-hand side 2 d x S - Gamma (S - s0 d_hat), broadcasting."""
    r = np.linalg.norm(d, axis=-1)[..., None]
    u = d / r
    s0 = params.s0(2 * r)
    dev = S - s0 * u
    relax = dev / params.tau2 + (1 / params.tau1 - 1 / params.tau2) * u * _dot(u, dev)[..., None]
    return 2.0 * np.cross(d, S) - relax


def dissipation_rate(d, S, params: DissipatorParams):
    """Heat flow into the bath, d.(dS/dt) = (|d|/tau1)(s0 - d_hat.S) >= 0."""
    r = np.linalg.norm(d, axis=-1)
    return r / params.tau1 * (params.s0(2 * r) - _dot(d, S) / r)


def work_rate(d_dot, S):
    """Power delivered by the drive, -d_dot.S."""
    return -_dot(d_dot, S)


def _generator(model: DriveModel, params: DissipatorParams):
    def gen(t):
        d = model.d_at(model.omega1 * t, model.omega2 * t)
        r = np.linalg.norm(d, axis=-1)
        u = d / r[:, None]
        N = len(t)
        A = np.zeros((N, 3, 3))
        A[:, 0, 1], A[:, 0, 2] = -2 * d[:, 2], 2 * d[:, 1]
        A[:, 1, 0], A[:, 1, 2] = 2 * d[:, 2], -2 * d[:, 0]
        A[:, 2, 0], A[:, 2, 1] = -2 * d[:, 1], 2 * d[:, 0]
        P = u[:, :, None] * u[:, None, :]
        A -= P / params.tau1 + (np.eye(3) - P) / params.tau2
        b = (params.s0(2 * r) / params.tau1)[:, None] * u
        return A, b

    return gen


def max_step(model: DriveModel, params: DissipatorParams) -> float:
    """Largest dt resolving both precession and relaxation."""
    return min(TWO_PI / (10.0 * model.max_gap_estimate()), params.tau2 / 10.0)


def integrate_bloch(model: DriveModel, params: DissipatorParams, S_init, t_end: float, dt: float,
                    t0: float = 0.0) -> BlochTrajectory:
    """Fixed-step RK4 integration of the Bloch equation along phi_a = omega_a t."""
    S_init = np.asarray(S_init, dtype=float)
    if np.linalg.norm(S_init) > 1 + 1e-12:
        raise ValueError("|S_init| must not exceed 1")
    limit = max_step(model, params)
    if dt > limit * (1 + 1e-12):
        raise StepTooLarge(f"dt={dt:g} exceeds {limit:g}")
    n_steps = int(round((t_end - t0) / dt))
    times, spins = rk4_linear(_generator(model, params), S_init, t0, dt, n_steps)
    return BlochTrajectory(times, spins, dt)


def toy_model_dissipation(delta0: float, omega: float, params: DissipatorParams) -> float:
    """Exact cycle-averaged dissipation for circular driving at constant gap."""
    if not delta0 > 0:
        raise ValueError("delta0 must be positive")
    t1, t2 = params.tau1, params.tau2
    return 0.5 * delta0 * t2 * omega**2 / (1 + t1 * t2 * omega**2 + (delta0 * t2) ** 2)


def common_period(model: DriveModel, max_den: int = 1000) -> float:
    """Shortest T with omega1 T and omega2 T both multiples of 2 pi."""
    ratio = Fraction(model.omega2 / model.omega1).limit_denominator(max_den)
    if abs(float(ratio) - model.omega2 / model.omega1) > 1e-12:
        raise ValueError("drive frequencies are not commensurate")
    return ratio.denominator * TWO_PI / model.omega1


class CycleAverage(NamedTuple):
    dissipation: float
    work: float
    period: float
    dt: float


def cycle_averaged_power(model: DriveModel, params: DissipatorParams, n_per_period: int = 400,
                         period: float | None = None) -> CycleAverage:
    """ODE oracle: settle for max(10 tau1, 5 periods), then average one period."""
    T = common_period(model) if period is None else period
    n = max(n_per_period, int(np.ceil(T / max_step(model, params))))
    dt = T / n
    n_settle = int(np.ceil(max(10 * params.tau1, 5 * T) / T)) * n
    S0 = np.asarray(model.d_at(0.0, 0.0))
    S0 = S0 / np.linalg.norm(S0)
    traj = integrate_bloch(model, params, S0, (n_settle + n) * dt, dt)
    t = traj.times[n_settle:-1]
    S = traj.spins[n_settle:-1]
    d = model.d_at(model.omega1 * t, model.omega2 * t)
    heat = dissipation_rate(d, S, params).mean()
    work = work_rate(model.d_dot(t), S).mean()
    return CycleAverage(float(heat), float(work), T, dt)


class FrameComparison(NamedTuple):
    analytic: np.ndarray
    ode: np.ndarray
    time: float


def toy_steady_state_check(delta0: float, omega: float, params: DissipatorParams,
                           settle_factor: float = 30.0) -> FrameComparison:
    """Steady state of the circular toy drive, closed form vs RK4.

    Both are returned as (e, f, d) components in the instantaneous frame at the
    end of a settling run of ``settle_factor`` * max(tau1, tau2).
    """
    from .model import SpinModel

    model = SpinModel.toy(delta0, omega)
    dt = min(max_step(model, params), TWO_PI / (omega * 200))
    t_end = settle_factor * max(params.tau1, params.tau2)
    n = int(np.ceil(t_end / dt))
    dt = t_end / n
    traj = integrate_bloch(model, params, Z_HAT, n * dt, dt)
    t = traj.times[-1]
    d = model.d_at(omega * t, omega * t)
    d_dot = model.d_dot(np.array([t]))[0]
    frame = np.array(instant_frame(d, d_dot))[[2, 1, 0]]
    S = steady_state(d, d_dot, params)
    return FrameComparison(frame @ S, frame @ traj.spins[-1], float(t))
