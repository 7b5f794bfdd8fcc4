"""Lower and upper bounds on the averaged dissipation rate.

All torus averages carry the 1/(4 pi^2) normalization, so e.g. ``g12_avg``
is the mean of g12 over the torus; multiply by 4 pi^2 for the raw integral.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .bloch import DissipatorParams
from .errors import InvariantViolation
from .geometry import DEFAULT_N_CHERN, DEFAULT_N_GRID, PointGeometry, chern_number, torus_grid
from .model import TWO_PI, DriveModel
from .rates import dissipation_metric_avg, normalization

CHAIN_RTOL = 1e-9


class BoundsReport(NamedTuple):
    w_d: float
    w_gb: float
    w_tb: float
    w_fb: float
    w_ub: float
    gamma_min: float
    gamma_max: float
    delta_min: float
    p1: float
    p2: float
    chern: int
    g12_avg: float
    w0: float


def smoothness(geo: PointGeometry) -> tuple[float, float]:
    """P_i = torus mean of |d_i(d)|^2 (full d, not d_hat)."""
    return float(np.mean(np.sum(geo.d1**2, axis=-1))), float(np.mean(np.sum(geo.d2**2, axis=-1)))


def _grid(model, params, n_grid, geo):
    return torus_grid(model, params, n_grid) if geo is None else geo


def geometric_bound(model: DriveModel, params: DissipatorParams, n_grid: int = DEFAULT_N_GRID, geo=None) -> float:
    """omega1 omega2 * mean(gamma |Omega_12|)."""
    geo = _grid(model, params, n_grid, geo)
    return float(model.omega1 * model.omega2 * np.mean(geo.gamma * np.abs(geo.omega12)))


def topological_bound(model, params, n_grid: int = DEFAULT_N_GRID, geo=None, chern=None) -> float:
    """W0 gamma_min |C|."""
    geo = _grid(model, params, n_grid, geo)
    c = chern_number(model, DEFAULT_N_CHERN) if chern is None else chern
    return float(normalization(model.omega1, model.omega2) * geo.gamma.min() * abs(c))


def fb_bound(model, params, n_grid: int = DEFAULT_N_GRID, geo=None, chern=None) -> float:
    """omega1 omega2 gamma_min delta_min^2 C^2 / (8 pi^2 (P1 + P2)); holds for any sign of g12."""
    geo = _grid(model, params, n_grid, geo)
    c = chern_number(model, DEFAULT_N_CHERN) if chern is None else chern
    p1, p2 = smoothness(geo)
    if not p1 + p2 > 0:
        raise ValueError("P1 + P2 must be positive")
    num = model.omega1 * model.omega2 * geo.gamma.min() * geo.delta.min() ** 2 * c * c
    return float(num / (8 * np.pi**2 * (p1 + p2)))


def upper_bound(model, params, n_grid: int = DEFAULT_N_GRID, geo=None) -> float:
    """2 gamma_max (omega1^2 P1 + omega2^2 P2) / delta_min^2."""
    geo = _grid(model, params, n_grid, geo)
    p1, p2 = smoothness(geo)
    w1, w2 = model.omega1, model.omega2
    return float(2 * geo.gamma.max() * (w1 * w1 * p1 + w2 * w2 * p2) / geo.delta.min() ** 2)


def inequality_chain_R(model, n_grid: int = DEFAULT_N_GRID, geo=None, chern=None):
    """(|C|/4pi, mean sqrt(g11 g22), (P1+P2)/(2 delta_min^2)); ordered lhs <= mid <= rhs."""
    geo = _grid(model, None, n_grid, geo)
    c = chern_number(model, DEFAULT_N_CHERN) if chern is None else chern
    p1, p2 = smoothness(geo)
    lhs = abs(c) / (4 * np.pi)
    mid = float(np.mean(np.sqrt(geo.g11 * geo.g22)))
    rhs = (p1 + p2) / (2 * geo.delta.min() ** 2)
    # lhs = mid exactly when g12 vanishes pointwise; allow for quadrature error
    tol = CHAIN_RTOL * rhs
    if not (lhs <= mid + tol and mid <= rhs + tol):
        raise InvariantViolation(f"R chain out of order: {lhs:.12g} <= {mid:.12g} <= {rhs:.12g}")
    return lhs, mid, rhs


def averaged_g12(model, n_grid: int = DEFAULT_N_GRID, geo=None) -> float:
    """Torus mean of g12 (raw integral / 4 pi^2)."""
    geo = _grid(model, None, n_grid, geo)
    return float(np.mean(geo.g12))


def bounds_report(model: DriveModel, params: DissipatorParams, n_grid: int = DEFAULT_N_GRID,
                  n_chern: int = DEFAULT_N_CHERN, chern: int | None = None) -> BoundsReport:
    """All bounds on one grid; pass ``chern`` to reuse a known Chern number."""
    geo = torus_grid(model, params, n_grid)
    c = chern_number(model, n_chern) if chern is None else chern
    p1, p2 = smoothness(geo)
    return BoundsReport(
        w_d=dissipation_metric_avg(model, params, geo=geo),
        w_gb=geometric_bound(model, params, geo=geo),
        w_tb=topological_bound(model, params, geo=geo, chern=c),
        w_fb=fb_bound(model, params, geo=geo, chern=c),
        w_ub=upper_bound(model, params, geo=geo),
        gamma_min=float(geo.gamma.min()),
        gamma_max=float(geo.gamma.max()),
        delta_min=float(geo.delta.min()),
        p1=p1,
        p2=p2,
        chern=c,
        g12_avg=float(np.mean(geo.g12)),
        w0=normalization(model.omega1, model.omega2),
    )
