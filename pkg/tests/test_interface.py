from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import pytest

import mvac as mv
from mvac.exceptions import ExtinctionError


@pytest.fixture
def circle() -> mv.SphereInterface:
    return mv.SphereInterface(dim=2, center=(0.0, 0.0), r0=0.3, delta_gamma=0.1)


@pytest.fixture
def line() -> mv.SphereInterface:
    return mv.SphereInterface(dim=2, center=(0.0, 0.0), r0=0.3, delta_gamma=0.1, flat=True)


@dataclass
class InvalidCase:
    name: str
    kwargs: dict
    match: str


invalid_cases = [
    InvalidCase("dim", {"dim": 3, "center": (0.0, 0.0, 0.0)}, "dim must be 1 or 2"),
    InvalidCase("center", {"center": (0.0,)}, "center must have 2 coordinates"),
    InvalidCase("radius", {"r0": 0.0}, "r0 must be positive"),
    InvalidCase("tube", {"delta_gamma": 1.5}, "delta_gamma must lie in"),
]


@pytest.mark.parametrize("case", invalid_cases, ids=lambda c: c.name)
def test_sphere_interface_validation(case: InvalidCase):
    kwargs = {"dim": 2, "center": (0.0, 0.0), "r0": 0.3, "delta_gamma": 0.1} | case.kwargs
    with pytest.raises(ValueError, match=case.match):
        mv.SphereInterface(**kwargs)


def test_radius_at(circle: mv.SphereInterface):
    assert mv.radius_at(circle, 0.0) == pytest.approx(0.3)
    assert mv.radius_at(circle, 0.02) == pytest.approx(math.sqrt(0.05))


def test_radius_in_one_dimension_is_constant():
    g = mv.SphereInterface(dim=1, center=(0.0,), r0=0.4, delta_gamma=0.1)
    assert mv.radius_at(g, 10.0) == pytest.approx(0.4)
    assert mv.normal_velocity(g, 1.0) == 0.0


def test_extinction(circle: mv.SphereInterface):
    with pytest.raises(ExtinctionError, match="extinct") as info:
        mv.radius_at(circle, 0.04)
    assert info.value.radius_squared == pytest.approx(0.01)


def test_normal_velocity_is_radius_rate(circle: mv.SphereInterface):
    t, dt = 0.01, 1e-7
    rate = (mv.radius_at(circle, t + dt) - mv.radius_at(circle, t - dt)) / (2 * dt)
    assert mv.normal_velocity(circle, t) == pytest.approx(rate, rel=1e-6)


def test_flat_interface_is_stationary(line: mv.SphereInterface):
    assert mv.radius_at(line, 100.0) == math.inf
    assert mv.normal_velocity(line, 0.0) == 0.0
    np.testing.assert_array_equal(mv.signed_distance(line, [[0.25, 0.5]], 3.0), [0.25])


@pytest.mark.parametrize(
    ("r0", "delta_gamma", "t_final", "match"),
    [
        (0.15, 0.2, 0.0, "margin"),
        (0.3, 0.1, 0.03, "margin"),
        (0.8, 0.3, 0.0, "leaves the domain"),
    ],
)
def test_check_horizon_rejects(r0: float, delta_gamma: float, t_final: float, match: str):
    g = mv.SphereInterface(dim=2, center=(0.0, 0.0), r0=r0, delta_gamma=delta_gamma)
    with pytest.raises(ValueError, match=match):
        g.check_horizon(t_final, 2.0)


def test_check_horizon_accepts_exact_margin(circle: mv.SphereInterface):
    circle.check_horizon(0.02, 2.0)


def test_signed_distance_sign(circle: mv.SphereInterface):
    d = mv.signed_distance(circle, [[0.0, 0.0], [0.3, 0.0], [0.5, 0.0]], 0.0)
    np.testing.assert_allclose(d, [0.3, 0.0, -0.2], atol=1e-15)


def test_grad_signed_distance_matches_difference_quotient(circle: mv.SphereInterface):
    rng = np.random.default_rng(0)
    x = rng.uniform(-0.8, 0.8, size=(50, 2))
    grad = mv.grad_signed_distance(circle, x, 0.0)
    h = 1e-6
    for i in range(2):
        shift = np.zeros(2)
        shift[i] = h
        numeric = (
            mv.signed_distance(circle, x + shift, 0.0) - mv.signed_distance(circle, x - shift, 0.0)
        ) / (2 * h)
        np.testing.assert_allclose(grad[:, i], numeric, atol=1e-6)


def test_grad_signed_distance_at_center(circle: mv.SphereInterface):
    grad, flag = mv.grad_signed_distance(circle, [[0.0, 0.0], [0.1, 0.0]], 0.0, return_flag=True)
    np.testing.assert_array_equal(flag, [True, False])
    np.testing.assert_allclose(grad, [[1.0, 0.0], [-1.0, 0.0]])


def test_cutoff_and_plateau():
    s = np.linspace(-1.5, 1.5, 301)
    psi = mv.cutoff_psi(s)
    bump = mv.plateau_bump(s)
    assert np.all((psi >= 0) & (psi <= 1))
    assert np.all(bump[np.abs(s) <= 0.5] == 1.0)
    assert np.all(bump[np.abs(s) >= 1.0] == 0.0)
    np.testing.assert_allclose(psi, psi[::-1], atol=1e-12)


def test_plateau_bump_slope():
    s = np.array([-0.9, -0.75, -0.6, 0.2, 0.6, 0.75, 0.9])
    h = 1e-6
    numeric = (mv.plateau_bump(s + h) - mv.plateau_bump(s - h)) / (2 * h)
    np.testing.assert_allclose(mv.plateau_bump_slope(s), numeric, atol=1e-6)


def test_xi_field_is_unit_on_interface(circle: mv.SphereInterface):
    points = mv.sample_interface(circle, 0.01, 16)
    xi = mv.xi_field(circle, points, 0.01)
    np.testing.assert_allclose(np.linalg.norm(xi, axis=-1), 1.0, atol=1e-12)
    far = mv.xi_field(circle, [[0.9, 0.0]], 0.0)
    np.testing.assert_array_equal(far, 0.0)


def test_xi_divergence_is_minus_curvature_on_interface(circle: mv.SphereInterface):
    t = 0.01
    points = mv.sample_interface(circle, t, 8)
    np.testing.assert_allclose(
        mv.xi_divergence(circle, points, t), -1.0 / mv.radius_at(circle, t), rtol=1e-5
    )


def test_extended_h(circle: mv.SphereInterface):
    points = mv.sample_interface(circle, 0.0, 8)
    h = mv.extended_h(circle, points, 0.0)
    np.testing.assert_allclose(h, -points / 0.3**2, atol=1e-12)
    np.testing.assert_array_equal(mv.extended_h(circle, [[0.9, 0.0]], 0.0), 0.0)


def test_project_onto_interface(circle: mv.SphereInterface, line: mv.SphereInterface):
    rng = np.random.default_rng(1)
    x = rng.uniform(-0.5, 0.5, size=(20, 2))
    on_circle = mv.project_onto_interface(circle, x, 0.01)
    np.testing.assert_allclose(mv.signed_distance(circle, on_circle, 0.01), 0.0, atol=1e-14)
    on_line = mv.project_onto_interface(line, x, 0.0)
    np.testing.assert_array_equal(on_line[:, 0], 0.0)
    np.testing.assert_array_equal(on_line[:, 1], x[:, 1])


@pytest.mark.parametrize(
    ("g", "count", "expected"),
    [
        (mv.SphereInterface(dim=1, center=(0.1,), r0=0.4, delta_gamma=0.1), 8, 2),
        (mv.SphereInterface(dim=1, center=(0.0,), r0=0.4, delta_gamma=0.1, flat=True), 8, 1),
        (mv.SphereInterface(dim=2, center=(0.0, 0.0), r0=0.3, delta_gamma=0.1), 32, 32),
    ],
)
def test_sample_interface(g: mv.SphereInterface, count: int, expected: int):
    points = mv.sample_interface(g, 0.0, count)
    assert points.shape == (expected, g.dim)
    np.testing.assert_allclose(mv.signed_distance(g, points, 0.0), 0.0, atol=1e-14)


def test_geometric_residuals_bounded(circle: mv.SphereInterface):
    grid = mv.GridSpec(dim=2, cells=64)
    for t in (0.0, 0.01, 0.02):
        res = mv.geometric_residuals(circle, t, grid)
        row = res.as_row()
        assert set(row) == {"t", "divergence", "transport", "length_transport", "bound"}
        assert all(math.isfinite(v) for v in row.values())
        assert res.divergence < 10.0 / circle.delta_gamma**2
        assert res.bound < 10.0 / circle.delta_gamma**2


def test_geometric_residuals_flat_interface(line: mv.SphereInterface):
    res = mv.geometric_residuals(line, 0.0, mv.GridSpec(dim=2, cells=64))
    assert res.transport == pytest.approx(0.0, abs=1e-6)
    assert res.length_transport == pytest.approx(0.0, abs=1e-6)
    assert res.divergence > 0
