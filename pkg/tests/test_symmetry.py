import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from geodissip.errors import GapClosure, InvariantViolation
from geodissip.model import DriveEllipse, SpinModel, X_HAT, Y_HAT, Z_HAT
from geodissip.symmetry import check_sufficient_conditions, drive_angular_momentum, perpendicular

from conftest import triad_model


def test_angular_momentum_examples():
    std = SpinModel.two_tone()
    np.testing.assert_allclose(drive_angular_momentum(std.drive1), [0, 0.5, 0], atol=1e-15)
    np.testing.assert_allclose(drive_angular_momentum(std.drive2), [-0.5, 0, 0], atol=1e-15)
    assert np.all(drive_angular_momentum(DriveEllipse(1.0, 0.0, X_HAT, Y_HAT)) == 0)
    circ = drive_angular_momentum(DriveEllipse(1.0, 1.0, X_HAT, Y_HAT))
    np.testing.assert_allclose(np.abs(circ), [0, 0, 1])


@pytest.mark.parametrize("phi", [0.0, 0.7, 2.0, 4.4])
def test_angular_momentum_is_literal_cross_product(phi):
    drive = DriveEllipse(0.8, 0.3, Y_HAT, Z_HAT)
    np.testing.assert_allclose(
        np.cross(drive.field(phi), drive.derivative(phi)), drive_angular_momentum(drive), atol=1e-15
    )


def test_perpendicular():
    assert perpendicular(X_HAT, Y_HAT)
    assert not perpendicular(X_HAT, X_HAT + 1e-6 * Y_HAT)
    assert perpendicular(np.zeros(3), X_HAT)
    assert not perpendicular(X_HAT, X_HAT + Y_HAT)


def test_standard_config_is_a_triad():
    v = check_sufficient_conditions(SpinModel.two_tone(), 128)
    assert v.s1_perp_s2 and v.s1_perp_m and v.s2_perp_m and v.sufficient
    assert abs(v.g12_avg_numeric) <= 1e-8 * v.metric_scale


def test_tilted_zeeman_breaks_symmetry():
    v = check_sufficient_conditions(SpinModel.two_tone(m=1.2, theta=0.2 * np.pi, phi=0.5), 128)
    assert v.s1_perp_s2 and not v.s1_perp_m and not v.s2_perp_m
    assert not v.sufficient
    assert abs(v.g12_avg_numeric) > 1e-3 * v.metric_scale


def test_explicit_triad():
    # drive 1 in x-y (S1 along z), drive 2 spanned by z and x (S2 along y), m in the x-z plane
    model = SpinModel(DriveEllipse(1.0, 0.4, X_HAT, Y_HAT), DriveEllipse(0.7, 0.5, Z_HAT, X_HAT),
                      np.array([0.9, 0.0, 0.6]))
    v = check_sufficient_conditions(model, 128)
    assert v.sufficient and v.s2_perp_m and not v.s1_perp_m
    assert abs(v.g12_avg_numeric) <= 1e-8 * v.metric_scale


def test_violation_is_fatal(monkeypatch):
    import geodissip.symmetry as sym

    monkeypatch.setattr(sym, "averaged_g12", lambda model, geo: 1.0)
    with pytest.raises(InvariantViolation):
        check_sufficient_conditions(SpinModel.two_tone(), 32)


def test_gap_closure_propagates():
    with pytest.raises(GapClosure):
        check_sufficient_conditions(SpinModel.two_tone(m=0.5), 64)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_triads_have_vanishing_g12(seed):
    model = triad_model(np.random.default_rng(seed))
    try:
        v = check_sufficient_conditions(model, 64)
    except GapClosure:
        return
    assert v.sufficient
    assert abs(v.g12_avg_numeric) <= 1e-8 * v.metric_scale
