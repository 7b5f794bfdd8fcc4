import numpy as np
import pytest

from geodissip.bloch import DissipatorParams
from geodissip.model import SpinModel

# m values away from the topological transitions at |m| = 0.5, 1.5
OFF_TRANSITION_M = [-1.9, -1.2, -1.0, -0.25, 0.25, 0.8, 1.0, 1.2, 2.0]


@pytest.fixture
def standard():
    return SpinModel.two_tone()


@pytest.fixture
def params10():
    return DissipatorParams.isotropic(10.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_unit(rng):
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)


def triad_model(rng):
    """Random drives whose angular momenta and Zeeman vector form a right-angle triad.

    Drive 1 lives in the (e1, e2) plane, drive 2 in (e3, e1), so S1 ~ e3 and
    S2 ~ e2; m is then placed perpendicular to one of them.
    """
    from scipy.spatial.transform import Rotation

    from geodissip.model import DriveEllipse, SpinModel

    e1, e2, e3 = Rotation.random(random_state=rng).as_matrix().T
    ax1 = (e1, e2) if rng.random() < 0.5 else (e2, e1)
    ax2 = (e3, e1) if rng.random() < 0.5 else (e1, e3)
    d1 = DriveEllipse(rng.uniform(0, 1.5), rng.uniform(0, 1.5), *ax1)
    d2 = DriveEllipse(rng.uniform(0, 1.5), rng.uniform(0, 1.5), *ax2)
    c = rng.normal(size=2) * rng.uniform(0.2, 2.0)
    m = c[0] * e1 + c[1] * (e3 if rng.random() < 0.5 else e2)
    return SpinModel(d1, d2, m)


def random_drive(rng):
    """Two random elliptic drives plus a random Zeeman vector."""
    from geodissip.model import DriveEllipse, SpinModel

    def ellipse():
        a = random_unit(rng)
        b = np.cross(a, random_unit(rng))
        return DriveEllipse(rng.uniform(0.2, 1.0), rng.uniform(0.2, 1.0), a, b / np.linalg.norm(b))

    return SpinModel(ellipse(), ellipse(), rng.uniform(1.0, 2.5) * random_unit(rng))


# --- acceptance summary ------------------------------------------------------

ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
