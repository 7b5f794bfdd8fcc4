"""Fixed-step classical RK4 for linear inhomogeneous ODEs y' = A(t) y + b(t).

Because the right-hand side is affine in y, each RK4 step is itself an affine
map y -> P_n y + q_n.  The step maps are built for all steps at once with
batched matrix products; only the cheap recursion runs in a Python loop.  The
result is identical (up to rounding) to stepping RK4 stage by stage.
"""

import numpy as np


def rk4_step_maps(generator, t0: float, dt: float, n_steps: int) -> np.ndarray:
    """Augmented RK4 step matrices, shape (n_steps, k+1, k+1).

    ``generator(t)`` takes an array of times (N,) and returns ``(A, b)`` with
    shapes (N, k, k) and (N, k).
    """
    t_half = t0 + dt * np.arange(2 * n_steps + 1) / 2.0
    A, b = generator(t_half)
    N, k, _ = A.shape
    dtype = np.result_type(A, b)
    G = np.zeros((N, k + 1, k + 1), dtype=dtype)
    G[:, :k, :k] = A
    G[:, :k, k] = b
    G0, Gh, G1 = G[0:-1:2], G[1::2], G[2::2]
    eye = np.eye(k + 1, dtype=dtype)
    K1 = G0
    K2 = Gh @ (eye + 0.5 * dt * K1)
    K3 = Gh @ (eye + 0.5 * dt * K2)
    K4 = G1 @ (eye + dt * K3)
    return eye + (dt / 6.0) * (K1 + 2.0 * K2 + 2.0 * K3 + K4)


def rk4_linear(generator, y0, t0: float, dt: float, n_steps: int, chunk: int = 8192):
    """Integrate and return ``(times, states)`` sampled every ``dt``.

    Step maps are built ``chunk`` steps at a time to bound memory.
    """
    y = np.append(np.asarray(y0), 1.0)
    out = None
    done = 0
    while done < n_steps or out is None:
        m = min(chunk, n_steps - done)
        P = rk4_step_maps(generator, t0 + done * dt, dt, m) if m > 0 else None
        if out is None:
            dtype = np.result_type(y, P) if P is not None else y.dtype
            out = np.empty((n_steps + 1, y.size), dtype=dtype)
            y = y.astype(dtype)
            out[0] = y
        for j in range(m):
            y = P[j] @ y
            out[done + j + 1] = y
        done += m
    times = t0 + dt * np.arange(n_steps + 1)
    return times, out[:, :-1]
