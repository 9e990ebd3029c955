from __future__ import annotations

import math

import numpy as np
import pytest

import mvac as mv
from mvac.exceptions import NonMinimalPairError
from mvac.initdata import base_reflection


@pytest.fixture
def spec() -> mv.OrbitSpec:
    return mv.OrbitSpec.from_reflection(base_reflection(2), [1.0, 0.0])


def test_profile_s_symmetry():
    z = np.linspace(-5.0, 5.0, 11)
    np.testing.assert_allclose(mv.profile_s(z) + mv.profile_s(-z), 1.0, atol=1e-15)
    assert mv.profile_s(0.0) == 0.5


def test_profile_s_solves_profile_ode():
    z = np.linspace(-4.0, 4.0, 81)
    s = mv.profile_s(z)
    h = 1e-5
    slope = (mv.profile_s(z + h) - mv.profile_s(z - h)) / (2 * h)
    np.testing.assert_allclose(slope, math.sqrt(2.0) * s * (1.0 - s), atol=1e-9)


def test_from_reflection_gives_minimal_pair(spec: mv.OrbitSpec):
    assert spec.gap == pytest.approx(2.0)
    assert spec.is_minimal
    np.testing.assert_allclose(spec.a_plus, np.eye(2), atol=1e-15)


def test_non_minimal_pair():
    spec = mv.OrbitSpec(a_plus=np.diag([1.0, -1.0, -1.0]), a_minus=np.diag([-1.0, 1.0, 1.0]))
    assert not spec.is_minimal
    with pytest.raises(NonMinimalPairError, match="not a minimal pair"):
        mv.minimal_orbit(spec, 0.0)


@pytest.mark.parametrize(
    ("a_plus", "a_minus", "match"),
    [
        (np.diag([1.0, 2.0]), np.diag([1.0, -1.0]), "not orthogonal"),
        (np.diag([1.0, -1.0]), np.diag([1.0, -1.0]), "determinant"),
        (np.eye(3), np.diag([1.0, -1.0]), "same dimension"),
        (np.ones(2), np.diag([1.0, -1.0]), "square matrix"),
    ],
)
def test_orbit_spec_validation(a_plus: np.ndarray, a_minus: np.ndarray, match: str):
    with pytest.raises(ValueError, match=match):
        mv.OrbitSpec(a_plus=a_plus, a_minus=a_minus)


def test_minimal_orbit_endpoints(spec: mv.OrbitSpec):
    ends = mv.minimal_orbit(spec, [-40.0, 40.0])
    np.testing.assert_allclose(ends[0], spec.a_minus, atol=1e-15)
    np.testing.assert_allclose(ends[1], spec.a_plus, atol=1e-15)


def test_minimal_orbit_shift(spec: mv.OrbitSpec):
    shifted = mv.OrbitSpec(spec.a_plus, spec.a_minus, tau=0.5)
    np.testing.assert_allclose(
        mv.minimal_orbit(shifted, 1.0), mv.minimal_orbit(spec, 1.5), atol=1e-15
    )


def test_surface_tension():
    assert mv.surface_tension() == pytest.approx(mv.SURFACE_TENSION, abs=1e-9)


def test_orbit_energy(spec: mv.OrbitSpec):
    curve = mv.sample_orbit(spec, np.linspace(-20.0, 20.0, 40_001))
    assert mv.orbit_energy(curve) == pytest.approx(mv.SURFACE_TENSION, abs=1e-6)


def test_equipartition(spec: mv.OrbitSpec):
    assert mv.equipartition_deviation(spec, np.linspace(-20.0, 20.0, 4_001)) <= 1e-10


def test_ode_residual_second_order(spec: mv.OrbitSpec):
    coarse = mv.ode_residual(spec, np.linspace(-20.0, 20.0, 8_001))
    fine = mv.ode_residual(spec, np.linspace(-20.0, 20.0, 16_001))
    assert 3.5 <= coarse / fine <= 4.5


def test_ode_residual_rejects_coarse_grid(spec: mv.OrbitSpec):
    with pytest.raises(ValueError, match="exceeds"):
        mv.ode_residual(spec, np.linspace(-20.0, 20.0, 101))


@pytest.mark.parametrize(
    ("z", "match"),
    [
        (np.array([0.0, 1.0]), "at least 3 samples"),
        (np.array([0.0, 2.0, 1.0]), "strictly increasing"),
        (np.array([0.0, 1.0, 3.0]), "uniformly spaced"),
    ],
)
def test_curve_validation(z: np.ndarray, match: str):
    with pytest.raises(ValueError, match=match):
        mv.Curve1D(z, np.zeros((z.size, 2, 2)))


def test_line_modulated_energy_of_rescaled_orbit(spec: mv.OrbitSpec):
    eps = 0.05
    z = np.linspace(-20.0, 20.0, 40_001)
    curve = mv.sample_orbit(spec, eps * z, width=eps)
    assert mv.line_modulated_energy(curve, eps) == pytest.approx(0.0, abs=1e-5)


def test_line_modulated_energy_positive_off_profile(spec: mv.OrbitSpec):
    eps = 0.05
    z = np.linspace(-20.0, 20.0, 40_001)
    curve = mv.sample_orbit(spec, eps * z, width=2.0 * eps)
    assert mv.line_modulated_energy(curve, eps) > 0.1


def test_line_modulated_energy_rejects_eps():
    curve = mv.Curve1D(np.linspace(0.0, 1.0, 3), np.zeros((3, 2, 2)))
    with pytest.raises(ValueError, match="eps must be positive"):
        mv.line_modulated_energy(curve, 0.0)
