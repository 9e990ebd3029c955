"""Connecting orbits between the two orthogonal components and their one-dimensional energies."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np
from scipy.integrate import quad, trapezoid
from scipy.special import expit

from mvac.exceptions import NonMinimalPairError
from mvac.matgeo import (
    frob_norm,
    potential_f,
    potential_grad,
    quasi_distance,
    quasi_distance_smoothed,
    quasi_potential,
    quasi_potential_profile,
)

if TYPE_CHECKING:
    import numpy.typing as npt

    from mvac.matgeo import QuasiDistParams
    from mvac.typing import FloatArray, Mat, MatStack

__all__ = [
    "ORBIT_HALF_WIDTH",
    "Curve1D",
    "OrbitSpec",
    "equipartition_deviation",
    "line_modulated_energy",
    "minimal_orbit",
    "ode_residual",
    "orbit_energy",
    "profile_s",
    "sample_orbit",
    "surface_tension",
]

ORBIT_HALF_WIDTH = 20.0
"""Half-width of the `z` window resolving the orbit profile to machine precision."""

ORTHOGONALITY_TOL = 1e-10
MINIMAL_PAIR_TOL = 1e-8
SPACING_TOL = 1e-12


def profile_s(z: npt.ArrayLike) -> float | FloatArray:
    """Sigmoid profile `s(z) = 1 - 1/(1 + exp(sqrt(2) z))` of the minimal orbit.

    Evaluated as a logistic function, which is stable for large `|z|`.

    Examples:
        >>> mv.profile_s(0.0)
        0.5
        >>> mv.profile_s(-700.0), mv.profile_s(700.0)
        (0.0, 1.0)
    """
    value = expit(math.sqrt(2.0) * np.asarray(z, dtype=np.float64))
    return float(value) if np.ndim(value) == 0 else value


def _profile_slope(z: npt.ArrayLike) -> FloatArray:
    s = np.asarray(profile_s(z))
    return math.sqrt(2.0) * s * (1.0 - s)


@dataclass(frozen=True)
class OrbitSpec:
    """Endpoints of a connecting orbit and its shift.

    Attributes:
        a_plus: Endpoint on O(n)+ reached as `z -> +inf`.
        a_minus: Endpoint on O(n)- reached as `z -> -inf`.
        tau: Shift of the profile.
    """

    a_plus: Mat
    a_minus: Mat
    tau: float = 0.0

    def __post_init__(self) -> None:
        for name, sign in (("a_plus", 1.0), ("a_minus", -1.0)):
            a = np.asarray(getattr(self, name), dtype=np.float64)
            object.__setattr__(self, name, a)
            if a.ndim != 2 or a.shape[0] != a.shape[1]:
                msg = f"{name} must be a square matrix, got shape {a.shape}"
                raise ValueError(msg)
            defect = np.linalg.norm(a @ a.T - np.eye(a.shape[0]))
            if defect > ORTHOGONALITY_TOL:
                msg = f"{name} is not orthogonal (|A A^T - I| = {defect:.3g})"
                raise ValueError(msg)
            if np.sign(np.linalg.det(a)) != sign:
                msg = f"{name} must have determinant {sign:+.0f}"
                raise ValueError(msg)
        if self.a_plus.shape != self.a_minus.shape:
            msg = "a_plus and a_minus must have the same dimension"
            raise ValueError(msg)

    @classmethod
    def from_reflection(
        cls, a_minus: npt.ArrayLike, axis: npt.ArrayLike, tau: float = 0.0
    ) -> OrbitSpec:
        """Build the minimal pair `(a_minus (I - 2 n n^T), a_minus)` for a unit `axis`."""
        a_minus = np.asarray(a_minus, dtype=np.float64)
        n = np.asarray(axis, dtype=np.float64)
        n = n / np.linalg.norm(n)
        a_plus = a_minus @ (np.eye(n.size) - 2.0 * np.outer(n, n))
        return cls(a_plus=a_plus, a_minus=a_minus, tau=tau)

    @property
    def gap(self) -> float:
        """Frobenius distance between the endpoints."""
        return float(np.linalg.norm(self.a_plus - self.a_minus))

    @property
    def is_minimal(self) -> bool:
        return abs(self.gap - 2.0) <= MINIMAL_PAIR_TOL

    def require_minimal(self) -> None:
        if not self.is_minimal:
            msg = f"endpoints are not a minimal pair: |A+ - A-| = {self.gap:.12g}, expected 2"
            raise NonMinimalPairError(msg)


def minimal_orbit(spec: OrbitSpec, z: npt.ArrayLike) -> MatStack:
    """Evaluate `s(z + tau) A+ + (1 - s(z + tau)) A-`.

    Examples:
        >>> spec = mv.OrbitSpec.from_reflection(np.diag([1.0, -1.0]), [0.0, 1.0])
        >>> mv.minimal_orbit(spec, 0.0).tolist()
        [[1.0, 0.0], [0.0, 0.0]]
    """
    spec.require_minimal()
    s = np.asarray(profile_s(np.asarray(z, dtype=np.float64) + spec.tau))[..., None, None]
    return s * spec.a_plus + (1.0 - s) * spec.a_minus


def _orbit_derivative(spec: OrbitSpec, z: npt.ArrayLike) -> MatStack:
    slope = _profile_slope(np.asarray(z, dtype=np.float64) + spec.tau)[..., None, None]
    return slope * (spec.a_plus - spec.a_minus)


@dataclass(frozen=True)
class Curve1D:
    """Matrix-valued curve sampled on a uniform grid.

    Attributes:
        z_grid: Strictly increasing, uniformly spaced sample positions.
        values: One matrix per sample, shape `(len(z_grid), n, n)`.
    """

    z_grid: FloatArray
    values: MatStack
    spacing: float = field(init=False)

    def __post_init__(self) -> None:
        z = np.asarray(self.z_grid, dtype=np.float64)
        values = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "z_grid", z)
        object.__setattr__(self, "values", values)
        if z.ndim != 1 or z.size < 3:
            msg = f"a curve needs at least 3 samples, got {z.size}"
            raise ValueError(msg)
        if values.shape[0] != z.size or values.ndim != 3:
            msg = f"values shape {values.shape} does not match {z.size} samples"
            raise ValueError(msg)
        steps = np.diff(z)
        if np.any(steps <= 0):
            msg = "z_grid must be strictly increasing"
            raise ValueError(msg)
        h = (z[-1] - z[0]) / (z.size - 1)
        if np.max(np.abs(steps - h)) > SPACING_TOL * max(1.0, abs(h)):
            msg = "z_grid must be uniformly spaced"
            raise ValueError(msg)
        object.__setattr__(self, "spacing", float(h))

    def derivative(self) -> MatStack:
        """Centered differences, second-order one-sided at both ends."""
        return np.gradient(self.values, self.spacing, axis=0, edge_order=2)


def sample_orbit(spec: OrbitSpec, z_grid: npt.ArrayLike, width: float = 1.0) -> Curve1D:
    """Sample the minimal orbit rescaled to `width`, i.e. `z -> orbit(z / width)`."""
    z = np.asarray(z_grid, dtype=np.float64)
    return Curve1D(z, minimal_orbit(spec, z / width))


def orbit_energy(curve: Curve1D) -> float:
    """One-dimensional energy `int 1/2 |u'|^2 + F(u) dz` by the trapezoid rule."""
    slope = frob_norm(curve.derivative())
    integrand = 0.5 * np.asarray(slope) ** 2 + np.asarray(potential_f(curve.values))
    return float(trapezoid(integrand, dx=curve.spacing))


def surface_tension() -> float:
    """Energy of a minimal connecting orbit, computed by adaptive quadrature.

    Examples:
        >>> round(mv.surface_tension(), 10)
        0.9428090416
    """

    def integrand(rho: float) -> float:
        return 2.0 * math.sqrt(2.0 * quasi_potential_profile(rho))

    return quad(integrand, 0.0, 1.0, epsabs=1e-13, epsrel=1e-13)[0]


def _uniform_grid(z_grid: npt.ArrayLike, max_spacing: float | None = None) -> FloatArray:
    z = np.asarray(z_grid, dtype=np.float64)
    Curve1D(z, np.zeros((z.size, 1, 1)))
    if max_spacing is not None and z[1] - z[0] > max_spacing:
        msg = f"grid spacing {z[1] - z[0]:g} exceeds {max_spacing:g}"
        raise ValueError(msg)
    return z


def ode_residual(spec: OrbitSpec, z_grid: npt.ArrayLike) -> float:
    """Largest defect of the orbit equation `u'' = DF(u)` under the 3-point stencil."""
    z = _uniform_grid(z_grid, max_spacing=1e-2)
    h = z[1] - z[0]
    theta = minimal_orbit(spec, z)
    second = (theta[2:] - 2.0 * theta[1:-1] + theta[:-2]) / h**2
    return float(np.max(frob_norm(second - potential_grad(theta[1:-1]))))


def equipartition_deviation(spec: OrbitSpec, z_grid: npt.ArrayLike) -> float:
    """Largest `|1/2 |u'|^2 - F(u)|` along the orbit, with the analytic derivative."""
    z = np.asarray(z_grid, dtype=np.float64)
    kinetic = 0.5 * np.asarray(frob_norm(_orbit_derivative(spec, z))) ** 2
    return float(np.max(np.abs(kinetic - np.asarray(potential_f(minimal_orbit(spec, z))))))


def line_modulated_energy(
    curve: Curve1D, eps: float, p: QuasiDistParams | None = None
) -> float:
    """Excess of the line energy over the quasi-distance it climbs.

    Computes the trapezoid integral of `1/2 |g'|^2 + F~(g)/eps^2` minus
    `(d(g(end)) - d(g(start)))/eps`. The boundary term uses the unsmoothed quasi-distance,
    or the smoothed one when `p` is given.
    """
    if not eps > 0:
        msg = f"eps must be positive, got {eps}"
        raise ValueError(msg)
    slope = np.asarray(frob_norm(curve.derivative()))
    integrand = 0.5 * slope**2 + np.asarray(quasi_potential(curve.values)) / eps**2
    bulk = float(trapezoid(integrand, dx=curve.spacing))
    ends = curve.values[[0, -1]]
    d = quasi_distance(ends) if p is None else quasi_distance_smoothed(ends, p)
    d = np.asarray(d)
    return bulk - float(d[1] - d[0]) / eps
