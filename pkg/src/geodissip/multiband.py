"""N-level generalization: diabatic density-matrix corrections and the
dissipation metric Lambda_ij.

Only gauge-invariant objects are exposed.  Berry connections between distinct
bands enter through the products

    A^i_mn A^j_nm = <m|d_i H|n><n|d_j H|m> / (E_n - E_m)^2,

which do not depend on the phases of the eigenvectors.  Units have hbar = 1;
energies are eigenvalues of H and Delta_mn = E_m - E_n.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DegenerateSpectrum
from .integrate import rk4_linear
from .model import H_FD, DriveModel

HERMITIAN_TOL = 1e-12
DEGENERACY_TOL = 1e-8

SIGMA = np.array(
    [[[0, 1], [1, 0]], [[0, -1j], [1j, 0]], [[1, 0], [0, -1]]], dtype=complex
)
_S2 = np.sqrt(0.5)
SPIN1 = np.array(
    [
        [[0, _S2, 0], [_S2, 0, _S2], [0, _S2, 0]],
        [[0, -1j * _S2, 0], [1j * _S2, 0, -1j * _S2], [0, 1j * _S2, 0]],
        [[1, 0, 0], [0, 0, 0], [0, 0, -1]],
    ],
    dtype=complex,
)


def _check_hermitian(H, what="H"):
    H = np.asarray(H, dtype=complex)
    if np.max(np.abs(H - np.conj(np.swapaxes(H, -1, -2))), initial=0.0) > HERMITIAN_TOL * max(1.0, np.abs(H).max()):
        raise ValueError(f"{what} is not Hermitian")
    return H


@dataclass(frozen=True)
class MultibandModel:
    """H(alpha) on a dim-level system with pairwise relaxation times tau_mn.

    ``derivative(alpha)`` returns the stack d_i H, shape (k, dim, dim); when
    omitted, central differences with step ``h_fd`` are used.
    """

    dim: int
    hamiltonian: Callable
    relaxation_times: np.ndarray
    derivative: Optional[Callable] = None
    h_fd: float = H_FD

    def __post_init__(self):
        if self.dim < 2:
            raise ValueError("dim must be >= 2")
        tau = np.array(self.relaxation_times, dtype=float)
        if tau.shape != (self.dim, self.dim):
            raise ValueError(f"relaxation_times must be {self.dim}x{self.dim}")
        off = ~np.eye(self.dim, dtype=bool)
        if not np.all(tau[off] > 0):
            raise ValueError("tau_mn must be positive for m != n")
        if not np.allclose(tau, tau.T, rtol=0, atol=0):
            raise ValueError("relaxation_times must be symmetric")
        object.__setattr__(self, "relaxation_times", tau)

    def H(self, alpha) -> np.ndarray:
        H = _check_hermitian(self.hamiltonian(np.asarray(alpha, dtype=float)))
        if H.shape != (self.dim, self.dim):
            raise ValueError(f"H has shape {H.shape}, expected {(self.dim, self.dim)}")
        return H

    def dH(self, alpha) -> np.ndarray:
        alpha = np.asarray(alpha, dtype=float)
        if self.derivative is not None:
            return _check_hermitian(self.derivative(alpha), "dH")
        h = self.h_fd
        out = []
        for i in range(alpha.size):
            e = np.zeros_like(alpha)
            e[i] = h
            out.append((self.H(alpha + e) - self.H(alpha - e)) / (2 * h))
        return np.array(out)


@dataclass(frozen=True)
class OccupationProfile:
    rho_eq: np.ndarray = field(default_factory=lambda: np.array([1.0, 0.0]))

    def __post_init__(self):
        r = np.array(self.rho_eq, dtype=float)
        if np.any(r < 0) or np.any(r > 1):
            raise ValueError("occupations must lie in [0, 1]")
        if abs(r.sum() - 1.0) > 1e-12:
            raise ValueError("occupations must sum to 1")
        object.__setattr__(self, "rho_eq", r)

    @classmethod
    def ground(cls, dim: int) -> "OccupationProfile":
        r = np.zeros(dim)
        r[0] = 1.0
        return cls(r)


def eig_sorted(H, tol: float = DEGENERACY_TOL):
    """Ascending eigenpairs; DegenerateSpectrum if adjacent levels are closer than tol * width."""
    E, V = np.linalg.eigh(_check_hermitian(H))
    width = E[-1] - E[0]
    if width <= 0 or np.min(np.diff(E)) < tol * width:
        raise DegenerateSpectrum(f"near-degenerate levels {E}")
    return E, V


def _eigen_data(model: MultibandModel, alpha):
    E, V = eig_sorted(model.H(alpha))
    dH = model.dH(alpha)
    M = np.conj(V.T)[None] @ dH @ V[None]  # <m| d_i H |n>
    return E, V, M


def _pair_products(E, M):
    """Q[i, j, m, n] = A^i_mn A^j_nm, zero on the diagonal."""
    dE = E[None, :] - E[:, None]  # E_n - E_m
    np.fill_diagonal(dE, np.inf)
    return M[:, None] * np.swapaxes(M, -1, -2)[None] / dE**2


def berry_connection_product(model: MultibandModel, alpha, i: int, j: int, m: int, n: int) -> complex:
    """Gauge-invariant A^i_mn A^j_nm with A^i_mn = -i <m|d_i n>."""
    if m == n:
        raise ValueError("m and n must differ")
    E, _, M = _eigen_data(model, alpha)
    return complex(M[i, m, n] * M[j, n, m] / (E[n] - E[m]) ** 2)


def quantum_geometric_tensor(model: MultibandModel, alpha, band: int = 0) -> np.ndarray:
    """sum_{n != band} A^i_{band n} A^j_{n band}; real part is the metric."""
    E, _, M = _eigen_data(model, alpha)
    Q = _pair_products(E, M)
    return Q[:, :, band, :].sum(axis=-1)


def diabatic_correction(model: MultibandModel, alpha, alpha_dot, occ: OccupationProfile,
                        basis: str = "lab") -> np.ndarray:
    """First-order off-diagonal correction to the steady density matrix.

    delta_rho_mn = A^i_mn alpha_dot^i (rho_m - rho_n) / (E_m - E_n - i/tau_mn)
    in the instantaneous eigenbasis, diagonal zero.  ``basis="lab"`` returns
    V delta_rho V^dagger, which is gauge invariant.
    """
    E, V, M = _eigen_data(model, alpha)
    a_dot = np.asarray(alpha_dot, dtype=float)
    rho = occ.rho_eq
    dE = E[None, :] - E[:, None]
    np.fill_diagonal(dE, np.inf)
    A = -1j * np.tensordot(a_dot, M, axes=1) / dE  # A^i_mn alpha_dot^i
    Emn = E[:, None] - E[None, :]
    tau = model.relaxation_times.copy()
    np.fill_diagonal(tau, 1.0)
    drho = A * (rho[:, None] - rho[None, :]) / (Emn - 1j / tau)
    np.fill_diagonal(drho, 0.0)
    if basis == "eigen":
        return drho
    if basis != "lab":
        raise ValueError("basis must be 'lab' or 'eigen'")
    return V @ drho @ np.conj(V.T)


def lambda_metric(model: MultibandModel, alpha, occ: OccupationProfile) -> np.ndarray:
    """Lambda_ij with dissipated power = Lambda_ij alpha_dot^i alpha_dot^j.

    Lambda_ij = 2 sum_{m<n} (rho_m - rho_n) Im{A^i_mn A^j_nm / (1 + i/(Delta_mn tau_mn))}.
    The symmetric part is dissipative, the antisymmetric part transfers
    power between parameter directions.
    """
    E, _, M = _eigen_data(model, alpha)
    Q = _pair_products(E, M)
    rho = occ.rho_eq
    k = M.shape[0]
    lam = np.zeros((k, k))
    for m in range(model.dim):
        for n in range(m + 1, model.dim):
            dmn = E[m] - E[n]
            lam += 2 * (rho[m] - rho[n]) * np.imag(Q[:, :, m, n] / (1 + 1j / (dmn * model.relaxation_times[m, n])))
    return lam


# --- models ---------------------------------------------------------------


def spin_model(drive: DriveModel, spin: str = "1/2", tau: float | np.ndarray = 1.0) -> MultibandModel:
    """H(phi1, phi2) = 2 d.J for a two-tone drive model, spin 1/2 or 1.

    Level spacing is 2|d| in both cases.  For spin 1/2 this is H = d.sigma,
    and the Bloch vector of the two-level description is S = -<sigma>, so
    that its ground state is S = +d_hat.  ``tau`` is either a scalar relaxation
    time for the transitions out of the ground state or a full table.
    """
    J = {"1/2": 0.5 * SIGMA, "1": SPIN1}[spin]
    dim = J.shape[-1]

    def H(alpha):
        d = drive.d_at(alpha[0], alpha[1])
        return 2.0 * np.tensordot(d, J, axes=1)

    def dH(alpha):
        d1, d2 = drive.d_derivatives(alpha[0], alpha[1])
        return 2.0 * np.array([np.tensordot(d1, J, axes=1), np.tensordot(d2, J, axes=1)])

    if np.ndim(tau) == 0:
        tau = lindblad_taus(np.full(dim - 1, float(tau)))
    return MultibandModel(dim, H, np.asarray(tau, dtype=float), dH)


def lindblad_taus(tau_ground: Sequence[float]) -> np.ndarray:
    """Coherence times produced by decay jumps |0><n| with rates 2/tau_0n.

    tau_0n is given; coherences between excited levels then decay at the mean
    of their rates, tau_mn = 2/(k_m + k_n).
    """
    k = np.concatenate([[0.0], 2.0 / np.asarray(tau_ground, dtype=float)])
    dim = k.size
    tau = 2.0 / (k[:, None] + k[None, :] + np.eye(dim))
    np.fill_diagonal(tau, np.inf)
    return tau


# --- density-matrix oracle ------------------------------------------------


def _lindblad_generator(model: MultibandModel, path):
    dim = model.dim
    I = np.eye(dim)
    k = np.array([0.0] + [2.0 / model.relaxation_times[0, n] for n in range(1, dim)])

    def gen(t):
        H = np.array([model.H(path(tt)) for tt in t])
        E, V = np.linalg.eigh(H)
        if np.any(np.diff(E, axis=-1) < DEGENERACY_TOL * (E[:, -1:] - E[:, :1])):
            raise DegenerateSpectrum("levels cross along the path")
        # row-major vec: vec(X rho Y) = (X kron Y^T) vec(rho)
        L = -1j * (np.einsum("tab,cd->tacbd", H, I) - np.einsum("ab,tdc->tacbd", I, H))
        g = V[:, :, 0]
        for n in range(1, dim):
            J = np.sqrt(k[n]) * g[:, :, None] * np.conj(V[:, None, :, n])
            JdJ = np.conj(np.swapaxes(J, 1, 2)) @ J
            L += np.einsum("tab,tcd->tacbd", J, np.conj(J))
            L -= 0.5 * (np.einsum("tab,cd->tacbd", JdJ, I) + np.einsum("ab,tdc->tacbd", I, JdJ))
        return L.reshape(t.size, dim * dim, dim * dim), np.zeros((t.size, dim * dim), dtype=complex)

    return gen


def lindblad_cycle_power(model: MultibandModel, path, path_dot, period: float, dt: float,
                         settle: float) -> float:
    """Period-averaged Tr(rho dH/dt) from a Lindblad integration.

    Jump operators sqrt(2/tau_0n)|0><n| act in the instantaneous eigenbasis,
    so coherences with the ground level decay at 1/tau_0n.  The state starts in
    the instantaneous ground state and is settled for ``settle`` before one
    period is averaged.
    """
    n_per = int(np.ceil(period / dt))
    dt = period / n_per
    n_settle = int(np.ceil(settle / period)) * n_per
    _, V = eig_sorted(model.H(path(0.0)))
    rho0 = np.outer(V[:, 0], np.conj(V[:, 0]))
    times, states = rk4_linear(_lindblad_generator(model, path), rho0.ravel(), 0.0, dt,
                               n_settle + n_per)
    t = times[n_settle:-1]
    rhos = states[n_settle:-1].reshape(-1, model.dim, model.dim)
    power = np.empty(t.size)
    for idx, tt in enumerate(t):
        Hdot = np.tensordot(path_dot(tt), model.dH(path(tt)), axes=1)
        power[idx] = np.real(np.trace(rhos[idx] @ Hdot))
    return float(power.mean())


def lambda_cycle_power(model: MultibandModel, path, path_dot, occ: OccupationProfile, period: float,
                       n_samples: int = 4000) -> float:
    """Period average of Lambda_ij alpha_dot^i alpha_dot^j."""
    t = period * np.arange(n_samples) / n_samples
    vals = [path_dot(tt) @ lambda_metric(model, path(tt), occ) @ path_dot(tt) for tt in t]
    return float(np.mean(vals))


def lissajous_path(omega1: float, omega2: float):
    def path(t):
        return np.array([omega1 * t, omega2 * t])

    def path_dot(t):
        return np.array([omega1, omega2])

    return path, path_dot

