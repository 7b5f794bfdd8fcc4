"""Symmetry conditions under which the torus-averaged g12 vanishes.

For elliptic drives the angular momentum S_a = B_a x dB_a/dphi_a is constant.
If S1 is perpendicular to S2 and at least one of them is perpendicular to the
static field m, a reflection of one drive phase maps d to a mirror image of
itself and flips the sign of g12, so its average is zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bounds import averaged_g12
from .errors import InvariantViolation
from .geometry import DEFAULT_N_GRID, torus_grid
from .model import DriveEllipse, SpinModel

PERP_TOL = 1e-10
G12_REL_TOL = 1e-8


@dataclass(frozen=True)
class SymmetryVerdict:
    s1: np.ndarray
    s2: np.ndarray
    s1_perp_s2: bool
    s1_perp_m: bool
    s2_perp_m: bool
    sufficient: bool
    g12_avg_numeric: float
    metric_scale: float


def drive_angular_momentum(drive: DriveEllipse) -> np.ndarray:
    """B x dB/dphi = -amp_sin amp_cos (axis_sin x axis_cos), independent of phi."""
    return -drive.amp_sin * drive.amp_cos * np.cross(drive.axis_sin, drive.axis_cos)


def perpendicular(a, b, tol: float = PERP_TOL) -> bool:
    """|a_hat . b_hat| <= tol; a zero vector is perpendicular to everything."""
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        return True
    return bool(abs(np.dot(a, b)) / (na * nb) <= tol)


def check_sufficient_conditions(model: SpinModel, n_grid: int = DEFAULT_N_GRID) -> SymmetryVerdict:
    s1 = drive_angular_momentum(model.drive1)
    s2 = drive_angular_momentum(model.drive2)
    m = model.zeeman
    p12, p1m, p2m = perpendicular(s1, s2), perpendicular(s1, m), perpendicular(s2, m)
    sufficient = p12 and (p1m or p2m)
    geo = torus_grid(model, None, n_grid)
    g12 = averaged_g12(model, geo=geo)
    scale = float(0.5 * np.mean(geo.g11 + geo.g22))
    if sufficient and abs(g12) > G12_REL_TOL * scale:
        raise InvariantViolation(f"symmetric configuration but mean g12 = {g12:.3g}")
    return SymmetryVerdict(s1, s2, p12, p1m, p2m, sufficient, g12, scale)
