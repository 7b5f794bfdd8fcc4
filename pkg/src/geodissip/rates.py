"""Time- and torus-averaged dissipation and frequency-conversion rates.

Averages are taken either over the phase torus (incommensurate drives) or
along a closed Lissajous trajectory with omega2/omega1 = n/(n+1).  Rates are
normalized by W0 = omega1 omega2 / (2 pi), so the conversion rate tends to the
Chern number for weak relaxation.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from .bloch import DissipatorParams, steady_state
from .geometry import DEFAULT_N_GRID, PointGeometry, geometry_at, torus_grid
from .model import TWO_PI, DriveModel

N_PER_PERIOD = 400
GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class Incommensurate:
    """Torus average, using the model's own omega1 and omega2."""

    n_grid: int = DEFAULT_N_GRID


@dataclass(frozen=True)
class Commensurate:
    """Closed trajectory with omega2 = omega1 n/(n+1), period (n+1) 2pi/omega1."""

    n: int
    n_per_period: int = N_PER_PERIOD

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")


@dataclass(frozen=True)
class GoldenTrajectory:
    """Long open trajectory with omega2/omega1 = golden ratio; cross-check only."""

    periods: int = 200
    n_per_period: int = N_PER_PERIOD


class RateReport(NamedTuple):
    w_d: float
    w_d_exact: float
    w_c: float
    w_ad: float
    w0: float
    w_d_bar: float
    w_c_bar: float


def normalization(omega1: float, omega2: float) -> float:
    return omega1 * omega2 / TWO_PI


def _frequencies(model: DriveModel, mode):
    if isinstance(mode, Commensurate):
        return model.omega1, model.omega1 * mode.n / (mode.n + 1)
    if isinstance(mode, GoldenTrajectory):
        return model.omega1, model.omega1 * GOLDEN
    return model.omega1, model.omega2


def sample(model: DriveModel, params: DissipatorParams, mode=Incommensurate()) -> PointGeometry:
    """Geometry at the quadrature nodes implied by ``mode``; checks the gap."""
    if isinstance(mode, Incommensurate):
        return torus_grid(model, params, mode.n_grid)
    w1, w2 = _frequencies(model, mode)
    if isinstance(mode, Commensurate):
        n_t = mode.n_per_period * (mode.n + 1)
        T = (mode.n + 1) * TWO_PI / w1
    else:
        n_t = mode.n_per_period * mode.periods
        T = mode.periods * TWO_PI / w1
    t = T * np.arange(n_t) / n_t
    geo = geometry_at(model, w1 * t, w2 * t, params)
    geo.assert_gap()
    return geo


def _metric_speed(geo: PointGeometry, w1, w2):
    return w1 * w1 * geo.g11 + 2 * w1 * w2 * geo.g12 + w2 * w2 * geo.g22


def dissipation_metric_avg(model, params, mode=Incommensurate(), geo=None) -> float:
    """avg[gamma g_ab] omega_a omega_b (leading diabatic order)."""
    geo = sample(model, params, mode) if geo is None else geo
    w1, w2 = _frequencies(model, mode)
    return float(np.mean(geo.gamma * _metric_speed(geo, w1, w2)))


def dissipation_exact_avg(model, params, mode=Incommensurate(), geo=None) -> float:
    """avg of tau2 gap |w|^2 / 2 / (1 + |w|^2 tau1 tau2 + (gap tau2)^2), w = d(d_hat)/dt."""
    geo = sample(model, params, mode) if geo is None else geo
    w1, w2 = _frequencies(model, mode)
    speed2 = 4.0 * _metric_speed(geo, w1, w2)
    t1, t2 = params.tau1, params.tau2
    x = geo.delta * t2
    return float(np.mean(0.5 * t2 * geo.delta * speed2 / (1 + speed2 * t1 * t2 + x * x)))


def conversion_weight(delta, tau2):
    x2 = (np.asarray(delta) * tau2) ** 2
    return x2 / (1 + x2)


def conversion_avg(model, params, mode=Incommensurate(), geo=None) -> float:
    """avg[x^2/(1+x^2) Omega_12] omega1 omega2, x = gap tau2.

    Positive values mean net power flows from drive 2 into drive 1.
    """
    geo = sample(model, params, mode) if geo is None else geo
    w1, w2 = _frequencies(model, mode)
    return float(np.mean(conversion_weight(geo.delta, params.tau2) * geo.omega12) * w1 * w2)


def power_decomposition(model, params, phi1, phi2):
    """Pointwise split W12 = w_ad + w_c of the transfer power.

    W12 = (P1 - P2)/2 with P_a = omega_a d_a(d).S_st the power absorbed by
    drive a.  Then w_ad = gamma (omega2^2 g22 - omega1^2 g11)/2 and
    w_c = x^2/(1+x^2) Omega_12 omega1 omega2.  Broadcasts over phases.
    """
    geo = geometry_at(model, phi1, phi2, params)
    w1, w2 = model.omega1, model.omega2
    w_ad = 0.5 * geo.gamma * (w2 * w2 * geo.g22 - w1 * w1 * geo.g11)
    w_c = conversion_weight(geo.delta, params.tau2) * geo.omega12 * w1 * w2
    return w_ad, w_c


def transfer_power_direct(model, params, phi1, phi2, geometric_only: bool = False):
    """(P1 - P2)/2 evaluated by substituting the steady state.

    With ``geometric_only`` the derivatives of |d| are dropped from d_a(d);
    those pieces are total derivatives that vanish on averaging but are
    first order pointwise.
    """
    phi1, phi2 = np.broadcast_arrays(np.asarray(phi1, float), np.asarray(phi2, float))
    d = model.d_at(phi1, phi2)
    d1, d2 = model.d_derivatives(phi1, phi2)
    w1, w2 = model.omega1, model.omega2
    S = steady_state(d, w1 * d1 + w2 * d2, params)
    if geometric_only:
        r = np.linalg.norm(d, axis=-1)[..., None]
        u = d / r
        d1 = d1 - u * np.sum(u * d1, axis=-1, keepdims=True)
        d2 = d2 - u * np.sum(u * d2, axis=-1, keepdims=True)
    p1 = w1 * np.sum(d1 * S, axis=-1)
    p2 = w2 * np.sum(d2 * S, axis=-1)
    return 0.5 * (p1 - p2)


def rate_report(model, params, mode=Incommensurate()) -> RateReport:
    geo = sample(model, params, mode)
    w1, w2 = _frequencies(model, mode)
    w_d = dissipation_metric_avg(model, params, mode, geo)
    w_c = conversion_avg(model, params, mode, geo)
    w_ad = float(np.mean(0.5 * geo.gamma * (w2 * w2 * geo.g22 - w1 * w1 * geo.g11)))
    w0 = normalization(w1, w2)
    return RateReport(
        w_d=w_d,
        w_d_exact=dissipation_exact_avg(model, params, mode, geo),
        w_c=w_c,
        w_ad=w_ad,
        w0=w0,
        w_d_bar=w_d / w0,
        w_c_bar=w_c / w0,
    )


class SweepRow(NamedTuple):
    n: int | None
    w_d_bar: float
    w_c_bar: float
    delta_w_d: float
    delta_w_c: float


def commensurate_sweep(model, params, n_values, n_grid: int = DEFAULT_N_GRID,
                       n_per_period: int = N_PER_PERIOD) -> list[SweepRow]:
    """Normalized rates along Lissajous curves omega2/omega1 = n/(n+1).

    Each row's deviation is measured against the torus average taken at the
    same frequency ratio, so it isolates the effect of the trajectory closing
    on itself; delta_w_d is relative, delta_w_c absolute.  The final row
    (n=None) is the n -> infinity limit, the torus average at omega2 = omega1.
    """
    rows = []
    for n in n_values:
        n = int(n)
        rep = rate_report(model, params, Commensurate(n, n_per_period))
        ref_model = replace(model, omega2=model.omega1 * n / (n + 1))
        ref = rate_report(ref_model, params, Incommensurate(n_grid))
        rows.append(
            SweepRow(n, rep.w_d_bar, rep.w_c_bar,
                     (rep.w_d_bar - ref.w_d_bar) / ref.w_d_bar, rep.w_c_bar - ref.w_c_bar)
        )
    inf = rate_report(replace(model, omega2=model.omega1), params, Incommensurate(n_grid))
    rows.append(SweepRow(None, inf.w_d_bar, inf.w_c_bar, 0.0, 0.0))
    return rows
