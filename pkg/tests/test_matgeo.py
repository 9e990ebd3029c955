from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import pytest

import mvac as mv
from mvac.exceptions import DegenerateProjectionError
from mvac.initdata import base_reflection


def rotation(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s], [s, c]])


@pytest.fixture
def samples() -> list[np.ndarray]:
    rng = np.random.default_rng(7)
    return [rng.uniform(-2.0, 2.0, size=(500, 2, 2)), rng.uniform(-2.0, 2.0, size=(500, 3, 3))]


@dataclass
class DistanceCase:
    name: str
    matrix: np.ndarray
    rho_plus: float
    rho_minus: float


distance_cases = [
    DistanceCase("identity", np.eye(2), 0.0, 2.0),
    DistanceCase("reflection", np.diag([1.0, -1.0]), 2.0, 0.0),
    DistanceCase("zero", np.zeros((2, 2)), math.sqrt(2.0), math.sqrt(2.0)),
    DistanceCase("scaled identity", 2.0 * np.eye(3), math.sqrt(3.0), math.sqrt(11.0)),
    DistanceCase("rank one", np.diag([1.0, 0.0]), 1.0, 1.0),
]


@pytest.mark.parametrize("case", distance_cases, ids=lambda c: c.name)
def test_dist_to_component(case: DistanceCase):
    assert mv.dist_to_component(case.matrix, 1) == pytest.approx(case.rho_plus, abs=1e-12)
    assert mv.dist_to_component(case.matrix, -1) == pytest.approx(case.rho_minus, abs=1e-12)


def test_dist_to_component_matches_angle_search():
    rng = np.random.default_rng(3)
    angles = np.linspace(0.0, 2.0 * math.pi, 200_000, endpoint=False)
    flip = np.diag([1.0, -1.0])
    rotations = np.stack([rotation(x) for x in angles])
    for a in rng.uniform(-2.0, 2.0, size=(20, 2, 2)):
        plus = np.min(np.linalg.norm(a - rotations, axis=(1, 2)))
        minus = np.min(np.linalg.norm(a - rotations @ flip, axis=(1, 2)))
        assert mv.dist_to_component(a, 1) == pytest.approx(plus, abs=1e-6)
        assert mv.dist_to_component(a, -1) == pytest.approx(minus, abs=1e-6)


def test_dist_to_component_rejects_bad_sign():
    with pytest.raises(ValueError, match="component sign"):
        mv.dist_to_component(np.eye(2), 0)


def test_non_square_input():
    with pytest.raises(ValueError, match="square matrix"):
        mv.frob_norm(np.zeros((2, 3)))


def test_svd_reconstructs_and_tracks_determinant(samples: list[np.ndarray]):
    for a in samples:
        r = mv.svd(a)
        np.testing.assert_allclose(r.reconstruct(), a, atol=1e-12)
        assert np.all(np.diff(r.sigma, axis=-1) <= 0)
        np.testing.assert_array_equal(r.det_sign, np.sign(np.linalg.det(a)).astype(np.int8))


def test_svd_flags_singular_matrix():
    r = mv.svd(np.diag([1.0, 0.0]))
    assert int(r.det_sign) == 0
    assert int(r.frame_sign) in (-1, 1)


def test_svd_rejects_non_finite():
    with pytest.raises(ValueError, match="non-finite"):
        mv.svd(np.array([[np.nan, 0.0], [0.0, 1.0]]))


def test_potential_vanishes_on_orthogonal_group():
    for q in (np.eye(3), rotation(0.7), base_reflection(2, 1.3)):
        assert mv.potential_f(q) == pytest.approx(0.0, abs=1e-15)
        np.testing.assert_allclose(mv.potential_grad(q), 0.0, atol=1e-15)


def test_potential_grad_is_derivative():
    rng = np.random.default_rng(11)
    a = rng.standard_normal((3, 3))
    direction = rng.standard_normal((3, 3))
    h = 1e-6
    numeric = (mv.potential_f(a + h * direction) - mv.potential_f(a - h * direction)) / (2 * h)
    assert numeric == pytest.approx(mv.frob_inner(mv.potential_grad(a), direction), rel=1e-7)


def test_commutator_is_antisymmetric(samples: list[np.ndarray]):
    for a in samples:
        c = mv.commutator(a, a[::-1])
        np.testing.assert_allclose(c, -np.swapaxes(c, -1, -2), atol=1e-14)


def test_commutator_law(samples: list[np.ndarray]):
    p = mv.QuasiDistParams(0.04)
    for a in samples:
        defect = mv.frob_norm(mv.commutator(mv.quasi_distance_grad(a, p), a))
        assert np.all(defect <= 1e-8 * (1.0 + mv.frob_norm(a) ** 2))
        exact = mv.frob_norm(mv.commutator(mv.potential_grad(a), a))
        assert np.all(exact <= 1e-10 * (1.0 + mv.frob_norm(a) ** 3))


def test_quasi_potential_below_potential(samples: list[np.ndarray]):
    for a in samples:
        assert np.all(mv.quasi_potential(a) <= mv.potential_f(a) + 1e-10)


def test_potential_above_distance_quartic(samples: list[np.ndarray]):
    for a in samples:
        rho = np.minimum(mv.dist_to_component(a, 1), mv.dist_to_component(a, -1))
        f = np.asarray(mv.potential_f(a))
        assert np.all(0.25 * (2.0 - rho) ** 2 * rho**2 <= f + 1e-10 * (1.0 + f))


def random_orthogonal(rng: np.random.Generator, n: int, sign: int) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    q = q * np.sign(np.diag(r))
    if np.sign(np.linalg.det(q)) != sign:
        q[:, 0] = -q[:, 0]
    return q


@pytest.mark.parametrize("sign", [1, -1])
def test_smoothed_quasi_distance_is_invariant(samples: list[np.ndarray], sign: int):
    rng = np.random.default_rng(11)
    p = mv.QuasiDistParams(0.08)
    for a in samples:
        n = a.shape[-1]
        u, v = random_orthogonal(rng, n, sign), random_orthogonal(rng, n, sign)
        np.testing.assert_allclose(
            mv.quasi_distance_smoothed(u @ a @ v.T, p), mv.quasi_distance_smoothed(a, p), atol=1e-10
        )


def test_quasi_distance_is_lipschitz(samples: list[np.ndarray]):
    rng = np.random.default_rng(5)
    for a in samples:
        near = a + 1e-3 * rng.standard_normal(a.shape)
        far = rng.uniform(-2.0, 2.0, size=a.shape)
        for b in (near, far):
            gap = np.abs(np.asarray(mv.quasi_distance(a)) - np.asarray(mv.quasi_distance(b)))
            assert np.all(gap <= mv.frob_norm(a - b) / math.sqrt(2.0) + 1e-9)


def test_differential_inequality(samples: list[np.ndarray]):
    for eps in (0.08, 0.04, 0.02):
        p = mv.QuasiDistParams(eps)
        for a in samples:
            slope = mv.frob_norm(mv.quasi_distance_grad(a, p))
            assert np.all(slope <= np.sqrt(2.0 * mv.potential_f(a) + eps**4) + 1e-9)


def test_quasi_distance_on_components():
    assert mv.quasi_distance(base_reflection(3, 0.4)) == pytest.approx(0.0, abs=1e-15)
    assert mv.quasi_distance(rotation(2.0)) == pytest.approx(mv.SURFACE_TENSION, abs=1e-15)


def test_smoothed_quasi_distance_error_bound(samples: list[np.ndarray]):
    p = mv.QuasiDistParams(0.2, k=2)
    bound = mv.SMOOTHING_ERROR_CONSTANT * p.smoothing_width
    for a in samples:
        gap = np.abs(mv.quasi_distance_smoothed(a, p) - mv.quasi_distance(a))
        assert np.all(gap <= bound + 1e-12)


def test_quasi_distance_grad_matches_difference_quotient():
    p = mv.QuasiDistParams(0.1, k=2)
    rng = np.random.default_rng(5)
    a = np.eye(2) + 0.3 * rng.standard_normal((2, 2))
    direction = rng.standard_normal((2, 2))
    h = 1e-6
    numeric = (
        mv.quasi_distance_smoothed(a + h * direction, p)
        - mv.quasi_distance_smoothed(a - h * direction, p)
    ) / (2 * h)
    analytic = mv.frob_inner(mv.quasi_distance_grad(a, p), direction)
    assert numeric == pytest.approx(analytic, rel=1e-5, abs=1e-9)


def test_quasi_distance_grad_zero_on_middle_branch():
    p = mv.QuasiDistParams(0.04)
    np.testing.assert_array_equal(mv.quasi_distance_grad(np.zeros((2, 2)), p), 0.0)
    assert mv.quasi_distance_smoothed(np.zeros((2, 2)), p) == 0.5 * mv.SURFACE_TENSION


def test_quasi_distance_grad_flags_degenerate():
    p = mv.QuasiDistParams(0.3, k=2)
    _, degenerate = mv.quasi_distance_grad_flags(np.diag([1.0, 0.0]), p)
    assert bool(degenerate)


def test_project_pi_is_projection(samples: list[np.ndarray]):
    p = mv.QuasiDistParams(0.04)
    rng = np.random.default_rng(2)
    for a in samples:
        g = rng.standard_normal(a.shape)
        once = mv.project_pi(a, g, p)
        np.testing.assert_allclose(mv.project_pi(a, once, p), once, atol=1e-10)
        np.testing.assert_allclose(mv.frob_inner(g - once, once), 0.0, atol=1e-10)


def test_nearest_orthogonal():
    a = np.diag([2.0, 0.5])
    np.testing.assert_allclose(mv.nearest_orthogonal(a), np.eye(2), atol=1e-14)
    np.testing.assert_allclose(mv.nearest_orthogonal(a, -1), np.diag([1.0, -1.0]), atol=1e-14)


def test_nearest_orthogonal_degenerate():
    with pytest.raises(DegenerateProjectionError, match="not unique"):
        mv.nearest_orthogonal(np.eye(2), -1)
    _, degenerate = mv.nearest_orthogonal_flags(np.eye(2), -1)
    assert bool(degenerate)


@dataclass
class ProfileCase:
    rho: float
    expected: float


@pytest.mark.parametrize(
    "case",
    [ProfileCase(0.0, 0.0), ProfileCase(1.0, 0.25), ProfileCase(3.0, 0.25)],
    ids=lambda c: f"rho={c.rho}",
)
def test_quasi_potential_profile(case: ProfileCase):
    assert mv.quasi_potential_profile(case.rho) == pytest.approx(case.expected)


def test_quasi_potential_profile_rejects_negative():
    with pytest.raises(ValueError, match="non-negative"):
        mv.quasi_potential_profile(-0.1)


def test_quasi_potential_antiderivative_reaches_half_tension():
    assert mv.quasi_potential_antiderivative(1.0) == pytest.approx(0.5 * mv.SURFACE_TENSION)
    assert mv.quasi_potential_antiderivative(5.0) == mv.quasi_potential_antiderivative(1.0)


@pytest.mark.parametrize(("eps", "k"), [(0.0, 5), (0.1, 0), (0.9, 1)])
def test_quasi_dist_params_validation(eps: float, k: int):
    with pytest.raises(ValueError, match="must"):
        mv.QuasiDistParams(eps, k)


def test_batched_evaluation_matches_single(samples: list[np.ndarray]):
    p = mv.QuasiDistParams(0.08)
    a = samples[0][:10]
    batched = mv.quasi_distance_smoothed(a, p)
    single = [mv.quasi_distance_smoothed(m, p) for m in a]
    np.testing.assert_allclose(batched, single, rtol=0, atol=1e-14)
    np.testing.assert_allclose(
        mv.quasi_distance_grad(a, p), [mv.quasi_distance_grad(m, p) for m in a], atol=1e-14
    )
