"""Quantum metric, Berry curvature and Chern numbers on the phase torus.

Everything here is the Fubini-Study geometry of the two-level unit vector
d_hat: g_ab = 1/4 d_a(d_hat).d_b(d_hat) and
Omega_12 = 1/2 d_hat.(d_1(d_hat) x d_2(d_hat)).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .bloch import DissipatorParams, quality_factor
from .errors import DegenerateField, GapClosure, UnresolvedTopology
from .model import TWO_PI, DriveModel

DEFAULT_N_GRID = 256
DEFAULT_N_CHERN = 128
RELATIVE_GAP_FLOOR = 1e-6


class GeomSample(NamedTuple):
    g11: float
    g12: float
    g22: float
    omega12: float
    delta: float
    gamma: float


def _dot(a, b):
    return np.sum(a * b, axis=-1)


def metric_param_space(dhat_derivs) -> np.ndarray:
    """G_ij = 1/4 d_i(d_hat).d_j(d_hat) for a stack of k derivative vectors (k, 3)."""
    D = np.asarray(dhat_derivs, dtype=float)
    return 0.25 * D @ D.T


def unit_jacobian(d) -> np.ndarray:
    """d(d_hat)/d(d) = (1 - d_hat d_hat^T)/|d|."""
    d = np.asarray(d, dtype=float)
    r = np.linalg.norm(d)
    u = d / r
    return (np.eye(3) - np.outer(u, u)) / r


def unit_derivatives(d, d1, d2):
    """Project derivatives of d onto derivatives of d_hat."""
    r = np.linalg.norm(d, axis=-1)[..., None]
    u = d / r
    u1 = (d1 - u * _dot(u, d1)[..., None]) / r
    u2 = (d2 - u * _dot(u, d2)[..., None]) / r
    return u, u1, u2


@dataclass(frozen=True)
class PointGeometry:
    """Geometric data at an array of phase points (struct of arrays)."""

    phi1: np.ndarray
    phi2: np.ndarray
    d: np.ndarray
    d1: np.ndarray
    d2: np.ndarray
    g11: np.ndarray
    g12: np.ndarray
    g22: np.ndarray
    omega12: np.ndarray
    delta: np.ndarray
    gamma: np.ndarray
    det_g: np.ndarray

    def sample(self, index) -> GeomSample:
        return GeomSample(*(float(getattr(self, k)[index]) for k in GeomSample._fields))

    def assert_gap(self, floor: float = RELATIVE_GAP_FLOOR):
        """Raise GapClosure if min gap < floor * max gap."""
        k = int(np.argmin(self.delta))
        lo, hi = self.delta.flat[k], self.delta.max()
        if lo < floor * hi:
            phase = (float(self.phi1.flat[k]), float(self.phi2.flat[k]))
            raise GapClosure(f"gap {lo:.3g} at phase {phase} (max gap {hi:.3g})", phase=phase)


def geometry_at(model: DriveModel, phi1, phi2, params: DissipatorParams | None = None) -> PointGeometry:
    """Vectorized metric/curvature data at the given phases."""
    phi1, phi2 = np.broadcast_arrays(np.asarray(phi1, float), np.asarray(phi2, float))
    try:
        d = model.d_at(phi1, phi2)
    except DegenerateField as exc:
        r = np.linalg.norm(model.d_raw(np.mod(phi1, TWO_PI), np.mod(phi2, TWO_PI)), axis=-1)
        k = np.unravel_index(int(np.argmin(r)), r.shape) if r.ndim else ()
        phase = (float(phi1[k]), float(phi2[k]))
        raise GapClosure(f"gap closes at phase {phase}", phase=phase) from exc
    d1, d2 = model.d_derivatives(phi1, phi2)
    u, u1, u2 = unit_derivatives(d, d1, d2)
    g11 = 0.25 * _dot(u1, u1)
    g22 = 0.25 * _dot(u2, u2)
    g12 = 0.25 * _dot(u1, u2)
    cross = np.cross(u1, u2)
    omega = 0.5 * _dot(u, cross)
    # Lagrange identity: avoids the cancellation in g11 g22 - g12^2, whose
    # rounding error would otherwise be amplified by the square root
    det_g = _dot(cross, cross) / 16.0
    delta = np.asarray(model.gap_values(d), dtype=float)
    gamma = quality_factor(delta, params.tau2) if params is not None else np.full_like(delta, np.nan)
    return PointGeometry(phi1, phi2, d, d1, d2, g11, g12, g22, omega, delta, gamma, det_g)


def qgt_sample(model: DriveModel, phi1: float, phi2: float, params: DissipatorParams) -> GeomSample:
    return geometry_at(model, phi1, phi2, params).sample(())


def torus_phases(n1: int, n2: int | None = None, shift=(0.0, 0.0)):
    n2 = n1 if n2 is None else n2
    p1 = shift[0] + TWO_PI * np.arange(n1) / n1
    p2 = shift[1] + TWO_PI * np.arange(n2) / n2
    return np.meshgrid(p1, p2, indexing="ij")


def torus_grid(model: DriveModel, params: DissipatorParams | None = None, n1: int = DEFAULT_N_GRID,
               n2: int | None = None, shift=(0.0, 0.0), check_gap: bool = True) -> PointGeometry:
    """Sample the uniform periodic n1 x n2 grid on the phase torus."""
    p1, p2 = torus_phases(n1, n2, shift)
    geo = geometry_at(model, p1, p2, params)
    if check_gap:
        geo.assert_gap()
    return geo


def torus_average(f: Callable | np.ndarray, n_grid: int = DEFAULT_N_GRID) -> float:
    """Periodic rectangle rule for the normalized torus integral of f(phi1, phi2)."""
    if callable(f):
        p1, p2 = torus_phases(n_grid)
        values = np.broadcast_to(f(p1, p2), p1.shape)
    else:
        values = np.asarray(f)
    return float(np.mean(values))


def _solid_angle(a, b, c):
    # signed area of the spherical triangle (a, b, c), Van Oosterom-Strackee
    num = _dot(a, np.cross(b, c))
    den = 1.0 + _dot(a, b) + _dot(b, c) + _dot(c, a)
    return 2.0 * np.arctan2(num, den)


def plaquette_flux(u: np.ndarray) -> np.ndarray:
    """Berry flux through each plaquette of a periodic grid of unit vectors.

    The flux equals half the solid angle swept by d_hat around the plaquette
    (the gauge-invariant lattice field strength); it sums to 2 pi C exactly.
    """
    a = u
    b = np.roll(u, -1, axis=0)
    c = np.roll(b, -1, axis=1)
    e = np.roll(u, -1, axis=1)
    return 0.5 * (_solid_angle(a, b, c) + _solid_angle(a, c, e))


def chern_from_grid(model: DriveModel, n_grid: int) -> tuple[int, float]:
    p1, p2 = torus_phases(n_grid)
    geo = geometry_at(model, p1, p2)
    geo.assert_gap()
    u = geo.d / np.linalg.norm(geo.d, axis=-1)[..., None]
    total = plaquette_flux(u).sum() / TWO_PI
    return int(np.rint(total)), float(total)


def chern_number(model: DriveModel, n_grid: int = DEFAULT_N_CHERN, verify: bool = True) -> int:
    """Integer Chern number of d_hat over the phase torus (plaquette method).

    With ``verify`` the grid is doubled and both results must agree.
    """
    if n_grid < 8:
        raise ValueError("n_grid must be at least 8")
    c, _ = chern_from_grid(model, n_grid)
    if verify:
        c2, _ = chern_from_grid(model, 2 * n_grid)
        if c2 != c:
            raise UnresolvedTopology(f"Chern number {c} at n={n_grid} but {c2} at n={2 * n_grid}")
    return c


def curvature_chern(model: DriveModel, n_grid: int = DEFAULT_N_GRID) -> float:
    """(1/2pi) * torus integral of Omega_12 by the rectangle rule (not integer)."""
    geo = torus_grid(model, None, n_grid)
    return float(TWO_PI * geo.omega12.mean())
