import numpy as np
import pytest

from geodissip.integrate import rk4_linear, rk4_step_maps


def scalar_generator(t):
    # y' = cos(t) y + sin(t): smooth, non-autonomous
    t = np.asarray(t)
    return np.cos(t)[:, None, None], np.sin(t)[:, None]


def naive_rk4(f, y0, t0, dt, n):
    y, t = np.array(y0, dtype=complex), t0
    out = [y.copy()]
    for _ in range(n):
        k1 = f(t, y)
        k2 = f(t + dt / 2, y + dt / 2 * k1)
        k3 = f(t + dt / 2, y + dt / 2 * k2)
        k4 = f(t + dt, y + dt * k3)
        y = y + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t += dt
        out.append(y.copy())
    return np.array(out)


def test_matches_stagewise_rk4(rng):
    A0, A1 = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)), rng.normal(size=(3, 3))
    b0 = rng.normal(size=3)

    def gen(t):
        t = np.asarray(t)
        A = A0[None] + np.sin(t)[:, None, None] * A1[None]
        return A, np.cos(t)[:, None] * b0[None]

    def f(t, y):
        A, b = gen(np.array([t]))
        return A[0] @ y + b[0]

    y0 = rng.normal(size=3)
    times, ys = rk4_linear(gen, y0, 0.3, 0.01, 200)
    ref = naive_rk4(f, y0, 0.3, 0.01, 200)
    np.testing.assert_allclose(ys, ref, rtol=1e-12, atol=1e-12)
    assert times[0] == 0.3 and times[-1] == pytest.approx(2.3)


def test_fourth_order():
    t_end = 4.0
    # exact: y = exp(sin t) (y0 + int_0^t sin(s) exp(-sin s) ds); use a very fine reference
    ref = rk4_linear(scalar_generator, [1.0], 0.0, t_end / 20000, 20000)[1][-1, 0]
    errs = []
    for n in (50, 100, 200):
        errs.append(abs(rk4_linear(scalar_generator, [1.0], 0.0, t_end / n, n)[1][-1, 0] - ref))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(np.abs(orders - 4) < 0.2)


def test_chunking_is_invisible(rng):
    y0 = [0.5]
    a = rk4_linear(scalar_generator, y0, 0.0, 0.05, 137, chunk=10)[1]
    b = rk4_linear(scalar_generator, y0, 0.0, 0.05, 137, chunk=8192)[1]
    # chunk start times are recomputed, so only rounding may differ
    np.testing.assert_allclose(a, b, rtol=1e-13, atol=0)


def test_zero_steps():
    times, ys = rk4_linear(scalar_generator, [2.0], 1.0, 0.1, 0)
    assert times.tolist() == [1.0]
    assert ys.tolist() == [[2.0]]


def test_step_map_shape():
    P = rk4_step_maps(scalar_generator, 0.0, 0.1, 7)
    assert P.shape == (7, 2, 2)
    np.testing.assert_array_equal(P[:, 1], np.tile([0.0, 1.0], (7, 1)))
