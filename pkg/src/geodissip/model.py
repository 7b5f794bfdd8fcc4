"""Driven two-level Hamiltonians H = h0 + d(phi1, phi2) . sigma.

All field vectors are numpy arrays with a trailing axis of length 3.  Every
``d_at``/``d_derivatives`` call broadcasts over array-valued phases, so a
whole torus grid or trajectory is evaluated in one call.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional

import numpy as np

from .errors import DegenerateField

GAP_TOLERANCE = 1e-10
H_FD = 1e-5
TWO_PI = 2.0 * np.pi

X_HAT = np.array([1.0, 0.0, 0.0])
Y_HAT = np.array([0.0, 1.0, 0.0])
Z_HAT = np.array([0.0, 0.0, 1.0])


def vec3(x, y=None, z=None) -> np.ndarray:
    """Build a finite real 3-vector from three numbers or one sequence."""
    v = np.asarray([x, y, z] if y is not None else x, dtype=float)
    if v.shape != (3,):
        raise ValueError(f"expected a 3-vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"non-finite vector component: {v}")
    return v


def spherical(m: float, theta: float, phi: float) -> np.ndarray:
    """m (sin(theta) cos(phi), sin(theta) sin(phi), cos(theta))."""
    return m * np.array([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)])


class PhasePoint(NamedTuple):
    phi1: float
    phi2: float


def _reduce(phi):
    # idempotent reduction to [0, 2pi): mod can round up to exactly 2pi
    r = np.mod(np.asarray(phi, dtype=float), TWO_PI)
    return np.where(r >= TWO_PI, 0.0, r)


def _norm(v):
    return np.linalg.norm(v, axis=-1)


@dataclass(frozen=True)
class DriveEllipse:
    """B(phi) = amp_sin sin(phi) axis_sin + amp_cos cos(phi) axis_cos."""

    amp_sin: float
    amp_cos: float
    axis_sin: np.ndarray = field(default_factory=lambda: Y_HAT.copy())
    axis_cos: np.ndarray = field(default_factory=lambda: Z_HAT.copy())

    def __post_init__(self):
        object.__setattr__(self, "axis_sin", vec3(self.axis_sin))
        object.__setattr__(self, "axis_cos", vec3(self.axis_cos))
        if self.amp_sin < 0 or self.amp_cos < 0:
            raise ValueError("ellipse amplitudes must be non-negative")
        for name in ("axis_sin", "axis_cos"):
            if abs(np.linalg.norm(getattr(self, name)) - 1.0) > 1e-12:
                raise ValueError(f"{name} must be a unit vector")
        if abs(self.axis_sin @ self.axis_cos) > 1e-12:
            raise ValueError("principal axes of an ellipse must be orthogonal")

    def field(self, phi):
        phi = np.asarray(phi, dtype=float)[..., None]
        return self.amp_sin * np.sin(phi) * self.axis_sin + self.amp_cos * np.cos(phi) * self.axis_cos

    def derivative(self, phi):
        phi = np.asarray(phi, dtype=float)[..., None]
        return self.amp_sin * np.cos(phi) * self.axis_sin - self.amp_cos * np.sin(phi) * self.axis_cos

    @property
    def max_radius(self) -> float:
        return max(self.amp_sin, self.amp_cos)


class DriveModel:
    """Base class for models that map the two drive phases to the vector d.

    Subclasses implement :meth:`d_raw`; derivatives default to central finite
    differences with step ``h_fd``.
    """

    omega1: float
    omega2: float
    h_fd: float = H_FD
    gap_tolerance: float = GAP_TOLERANCE

    def d_raw(self, phi1, phi2) -> np.ndarray:
        raise NotImplementedError

    def d_at(self, phi1, phi2) -> np.ndarray:
        d = self.d_raw(_reduce(phi1), _reduce(phi2))
        small = _norm(d) < self.gap_tolerance
        if np.any(small):
            raise DegenerateField(f"|d| < {self.gap_tolerance:g}: gap closes")
        return d

    def gap(self, phi1, phi2):
        """Spectral gap 2|d|."""
        return self.gap_values(self.d_at(phi1, phi2))

    def gap_values(self, d):
        """2|d| for already evaluated field vectors."""
        return 2.0 * _norm(d)

    def d_derivatives(self, phi1, phi2):
        h = self.h_fd
        p1, p2 = _reduce(phi1), _reduce(phi2)
        d1 = (self.d_raw(p1 + h, p2) - self.d_raw(p1 - h, p2)) / (2 * h)
        d2 = (self.d_raw(p1, p2 + h) - self.d_raw(p1, p2 - h)) / (2 * h)
        return d1, d2

    def d_dot(self, t):
        """Full time derivative of d along phi_a = omega_a t."""
        d1, d2 = self.d_derivatives(self.omega1 * t, self.omega2 * t)
        return self.omega1 * d1 + self.omega2 * d2

    def max_gap_estimate(self, n: int = 64) -> float:
        ph = TWO_PI * np.arange(n) / n
        p1, p2 = np.meshgrid(ph, ph, indexing="ij")
        return float(2.0 * _norm(self.d_raw(p1, p2)).max())


@dataclass(frozen=True)
class SpinModel(DriveModel):
    """Spin in a static Zeeman field plus two elliptically polarized drives.

    ``h0`` is an inert scalar shift: it commutes with everything and is kept
    only so configurations round-trip.
    """

    drive1: DriveEllipse
    drive2: DriveEllipse
    zeeman: np.ndarray
    omega1: float = 1.0
    omega2: float = 1.0
    fixed_gap: Optional[float] = None
    h0: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "zeeman", vec3(self.zeeman))
        if not (self.omega1 > 0 and self.omega2 > 0):
            raise ValueError("drive frequencies must be positive")
        if self.fixed_gap is not None and not self.fixed_gap > 0:
            raise ValueError("fixed_gap must be positive")

    @classmethod
    def two_tone(cls, b11=1.0, b12=0.5, b21=0.5, b22=1.0, m=1.0, theta=0.0, phi=0.0,
                 omega1=1.0, omega2=1.0, fixed_gap=None):
        """The two-tone frequency-converter spin model.

        B1 = (b11 sin phi1, 0, b12 cos phi1), B2 = (0, b21 sin phi2, b22 cos phi2),
        d = m(theta, phi) + B1 + B2.
        """
        return cls(
            drive1=DriveEllipse(b11, b12, X_HAT, Z_HAT),
            drive2=DriveEllipse(b21, b22, Y_HAT, Z_HAT),
            zeeman=spherical(m, theta, phi),
            omega1=omega1,
            omega2=omega2,
            fixed_gap=fixed_gap,
        )

    @classmethod
    def toy(cls, delta0=1.0, omega=0.1):
        """d = delta0/2 (cos wt, sin wt, 0): circular drive at constant gap."""
        return cls(
            drive1=DriveEllipse(delta0 / 2, delta0 / 2, Y_HAT, X_HAT),
            drive2=DriveEllipse(0.0, 0.0, Y_HAT, Z_HAT),
            zeeman=np.zeros(3),
            omega1=omega,
            omega2=omega,
        )

    def bare_d(self, phi1, phi2):
        return self.zeeman + self.drive1.field(phi1) + self.drive2.field(phi2)

    def d_raw(self, phi1, phi2):
        d = self.bare_d(phi1, phi2)
        if self.fixed_gap is None:
            return d
        r = _norm(d)[..., None]
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(r > 0, 0.5 * self.fixed_gap * d / np.where(r > 0, r, 1.0), 0.0)

    def d_derivatives(self, phi1, phi2):
        p1, p2 = _reduce(phi1), _reduce(phi2)
        d1 = self.drive1.derivative(p1)
        d2 = self.drive2.derivative(p2)
        d1, d2 = np.broadcast_arrays(d1, d2)
        if self.fixed_gap is None:
            return np.array(d1), np.array(d2)
        # d -> (gap/2) d/|d|: keep only the transverse part of each derivative
        d = self.bare_d(p1, p2)
        r = _norm(d)[..., None]
        u = d / r
        scale = 0.5 * self.fixed_gap / r
        t1 = scale * (d1 - u * np.sum(u * d1, axis=-1, keepdims=True))
        t2 = scale * (d2 - u * np.sum(u * d2, axis=-1, keepdims=True))
        return t1, t2

    def gap_values(self, d):
        if self.fixed_gap is not None:
            return np.full(np.shape(d)[:-1], float(self.fixed_gap))
        return 2.0 * _norm(d)

    def max_gap_estimate(self, n: int = 64) -> float:
        if self.fixed_gap is not None:
            return float(self.fixed_gap)
        bound = np.linalg.norm(self.zeeman) + self.drive1.max_radius + self.drive2.max_radius
        return 2.0 * float(bound)


@dataclass(frozen=True)
class CallableModel(DriveModel):
    """User-supplied d(phi1, phi2); derivatives by central differences.

    ``func`` must broadcast over array phases and return shape (..., 3).
    """

    func: Callable
    omega1: float = 1.0
    omega2: float = 1.0
    h_fd: float = H_FD

    def d_raw(self, phi1, phi2):
        return np.asarray(self.func(np.asarray(phi1, float), np.asarray(phi2, float)), dtype=float)


def sphere_chart(radius: float = 0.5, omega1=1.0, omega2=1.0) -> CallableModel:
    """d = r (sin phi1 cos phi2, sin phi1 sin phi2, cos phi1): the round-sphere chart."""

    def f(p1, p2):
        return radius * np.stack(
            np.broadcast_arrays(np.sin(p1) * np.cos(p2), np.sin(p1) * np.sin(p2), np.cos(p1)), axis=-1
        )

    return CallableModel(f, omega1, omega2)


def _cover_polar(p1):
    # smooth 0 -> pi on [0, pi] with vanishing slope at both ends, mirrored back on [pi, 2pi]
    q = np.where(p1 <= np.pi, p1, TWO_PI - p1)
    return q - 0.5 * np.sin(2 * q)


def sphere_cover(radius: float = 0.5, omega1=1.0, omega2=1.0) -> CallableModel:
    """Degree-one map of the torus onto the sphere at constant |d|.

    On phi1 in [0, pi] the polar angle sweeps north to south while phi2 is the
    azimuth; on the way back the azimuth is frozen, so the Berry curvature is
    non-negative everywhere and integrates to exactly one.
    """

    def f(p1, p2):
        p1 = np.mod(p1, TWO_PI)
        th = _cover_polar(p1)
        az = np.where(p1 <= np.pi, p2, 0.0)
        return radius * np.stack(
            np.broadcast_arrays(np.sin(th) * np.cos(az), np.sin(th) * np.sin(az), np.cos(th)), axis=-1
        )

    return CallableModel(f, omega1, omega2)
