"""Analytic mean-curvature-flow reference interfaces and the fields extended from them."""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass
from typing import TYPE_CHECKING

import numpy as np

from mvac.exceptions import ExtinctionError

if TYPE_CHECKING:
    from collections.abc import Callable

    import numpy.typing as npt

    from mvac.solver import GridSpec
    from mvac.typing import FloatArray, PointArray

__all__ = [
    "GeometricResiduals",
    "SphereInterface",
    "cutoff_psi",
    "extended_h",
    "geometric_residuals",
    "grad_signed_distance",
    "normal_velocity",
    "plateau_bump",
    "plateau_bump_slope",
    "project_onto_interface",
    "radius_at",
    "sample_interface",
    "signed_distance",
    "xi_divergence",
    "xi_field",
]

logger = logging.getLogger(__name__)

CENTER_TOL = 1e-14
TIME_STEP = 1e-6
MARGIN_TOL = 1e-12


@dataclass(frozen=True)
class SphereInterface:
    """Shrinking sphere (circle, or interval in 1D) or stationary flat interface.

    The inside of the sphere, respectively `{x1 > 0}` for the flat interface, is the phase
    where the field sits on O(n)+.

    Attributes:
        dim: Spatial dimension, 1 or 2.
        center: Center of the sphere.
        r0: Initial radius.
        delta_gamma: Width of the tubular neighborhood carrying the extended fields.
        flat: Use the hyperplane `{x1 = 0}` instead of a sphere.
    """

    dim: int
    center: tuple[float, ...]
    r0: float
    delta_gamma: float
    flat: bool = False

    def __post_init__(self) -> None:
        if self.dim not in (1, 2):
            msg = f"dim must be 1 or 2, got {self.dim}"
            raise ValueError(msg)
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        if len(self.center) != self.dim:
            msg = f"center must have {self.dim} coordinates, got {len(self.center)}"
            raise ValueError(msg)
        if not self.flat and not self.r0 > 0:
            msg = f"r0 must be positive, got {self.r0}"
            raise ValueError(msg)
        if not 0 < self.delta_gamma < 1:
            msg = f"delta_gamma must lie in (0, 1), got {self.delta_gamma}"
            raise ValueError(msg)

    def check_horizon(self, t_final: float, side_length: float) -> None:
        """Check that the interface survives up to `t_final` inside `[-L/2, L/2]^dim`.

        Raises:
            ValueError: Naming the violated quantity.
        """
        half = 0.5 * side_length
        if self.flat:
            if self.delta_gamma > half:
                msg = f"delta_gamma={self.delta_gamma} exceeds the half side length {half}"
                raise ValueError(msg)
            return
        margin = self.r0 - math.sqrt(2.0 * (self.dim - 1) * t_final)
        if margin < self.delta_gamma - MARGIN_TOL:
            msg = (
                f"r0={self.r0} leaves a margin {margin:.6g} below delta_gamma="
                f"{self.delta_gamma} at t_final={t_final}"
            )
            raise ValueError(msg)
        reach = max(abs(c) for c in self.center) + self.r0 + self.delta_gamma
        if reach > half:
            msg = (
                f"ball of radius r0 + delta_gamma={self.r0 + self.delta_gamma:.6g} around "
                f"{self.center} leaves the domain [-{half}, {half}]^{self.dim}"
            )
            raise ValueError(msg)


def radius_at(g: SphereInterface, t: float) -> float:
    """Radius `sqrt(r0^2 - 2 (dim - 1) t)` of the sphere evolving by mean curvature.

    Raises:
        ExtinctionError: If the squared radius drops to `delta_gamma^2`.

    Examples:
        >>> g = mv.SphereInterface(dim=2, center=(0.0, 0.0), r0=0.3, delta_gamma=0.1)
        >>> round(mv.radius_at(g, 0.01), 6)
        0.264575
    """
    if g.flat:
        return math.inf
    radius_squared = g.r0**2 - 2.0 * (g.dim - 1) * t
    if radius_squared <= g.delta_gamma**2:
        raise ExtinctionError(t, radius_squared, g.delta_gamma)
    return math.sqrt(radius_squared)


def normal_velocity(g: SphereInterface, t: float) -> float:
    """Normal velocity `dR/dt = -(dim - 1)/R`, which equals the mean curvature with sign."""
    if g.flat:
        return 0.0
    return -(g.dim - 1) / radius_at(g, t)


def _offsets(g: SphereInterface, x: npt.ArrayLike) -> tuple[PointArray, FloatArray]:
    offset = np.asarray(x, dtype=np.float64) - np.asarray(g.center)
    return offset, np.linalg.norm(offset, axis=-1)


def signed_distance(g: SphereInterface, x: npt.ArrayLike, t: float) -> FloatArray:
    """Signed distance to the interface, positive inside the O(n)+ phase."""
    if g.flat:
        return np.asarray(x, dtype=np.float64)[..., 0]
    _, r = _offsets(g, x)
    return radius_at(g, t) - r


def grad_signed_distance(
    g: SphereInterface, x: npt.ArrayLike, t: float, *, return_flag: bool = False
) -> PointArray | tuple[PointArray, npt.NDArray[np.bool_]]:
    """Unit gradient of the signed distance.

    At the sphere center the gradient is undefined; the first unit vector is returned there,
    and `return_flag=True` additionally returns the mask of such points.
    """
    del t
    grad, flag = _normal_and_flag(g, x)
    if return_flag:
        return grad, flag
    return grad


def _normal_and_flag(
    g: SphereInterface, x: npt.ArrayLike
) -> tuple[PointArray, npt.NDArray[np.bool_]]:
    x = np.asarray(x, dtype=np.float64)
    unit = np.zeros(x.shape[-1])
    unit[0] = 1.0
    if g.flat:
        grad = np.broadcast_to(unit, x.shape).copy()
        flag = np.zeros(x.shape[:-1], dtype=bool)
    else:
        offset, r = _offsets(g, x)
        flag = r <= CENTER_TOL
        safe = np.where(flag, 1.0, r)[..., None]
        grad = np.where(flag[..., None], unit, -offset / safe)
    return grad, flag


def cutoff_psi(s: npt.ArrayLike) -> float | FloatArray:
    """Smooth even cutoff `exp(1 - 1/(1 - s^2))` on `(-1, 1)`, zero outside.

    Examples:
        >>> mv.cutoff_psi(0.0), mv.cutoff_psi(1.0)
        (1.0, 0.0)
        >>> round(mv.cutoff_psi(0.5), 6)
        0.716531
    """
    s = np.asarray(s, dtype=np.float64)
    out = np.zeros_like(s)
    inside = np.abs(s) < 1.0
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - s[inside] ** 2))
    return float(out) if out.ndim == 0 else out


def plateau_bump(s: npt.ArrayLike) -> float | FloatArray:
    """Cutoff equal to 1 on `|s| <= 1/2`, 0 on `|s| >= 1`, smooth in between.

    Examples:
        >>> mv.plateau_bump(0.25), mv.plateau_bump(0.5), mv.plateau_bump(1.5)
        (1.0, 1.0, 0.0)
    """
    s = np.abs(np.asarray(s, dtype=np.float64))
    out = np.where(s <= 0.5, 1.0, 0.0)
    ramp = (s > 0.5) & (s < 1.0)
    u = 2.0 * s[ramp] - 1.0
    out[ramp] = np.exp(1.0 - 1.0 / (1.0 - u**2))
    return float(out) if out.ndim == 0 else out


def plateau_bump_slope(s: npt.ArrayLike) -> float | FloatArray:
    """Derivative of `plateau_bump`."""
    s = np.asarray(s, dtype=np.float64)
    a = np.abs(s)
    out = np.zeros_like(s)
    ramp = (a > 0.5) & (a < 1.0)
    u = 2.0 * a[ramp] - 1.0
    bump = np.exp(1.0 - 1.0 / (1.0 - u**2))
    out[ramp] = -4.0 * u / (1.0 - u**2) ** 2 * bump * np.sign(s[ramp])
    return float(out) if out.ndim == 0 else out


def xi_field(g: SphereInterface, x: npt.ArrayLike, t: float) -> PointArray:
    """Extended normal `psi(d/delta_gamma) grad d`, of length at most 1."""
    weight = np.asarray(cutoff_psi(signed_distance(g, x, t) / g.delta_gamma))
    return weight[..., None] * _normal_and_flag(g, x)[0]


def extended_h(g: SphereInterface, x: npt.ArrayLike, t: float) -> PointArray:
    """Extended mean curvature vector, pointing toward the center of a shrinking sphere.

    Uses the curvature of the projection point, `(dim - 1)/R(t)`, cut off by the plateau bump
    so that the vector equals the curvature vector on the inner half of the tube.
    """
    x = np.asarray(x, dtype=np.float64)
    if g.flat or g.dim == 1:
        return np.zeros_like(x)
    weight = np.asarray(plateau_bump(signed_distance(g, x, t) / g.delta_gamma))
    curvature = (g.dim - 1) / radius_at(g, t)
    return (curvature * weight)[..., None] * _normal_and_flag(g, x)[0]


def project_onto_interface(g: SphereInterface, x: npt.ArrayLike, t: float) -> PointArray:
    """Nearest point on the interface (for the center, the point along the first axis)."""
    x = np.asarray(x, dtype=np.float64)
    if g.flat:
        out = x.copy()
        out[..., 0] = 0.0
        return out
    return x - signed_distance(g, x, t)[..., None] * _normal_and_flag(g, x)[0]


def sample_interface(
    g: SphereInterface, t: float, count: int, side_length: float = 2.0
) -> PointArray:
    """Sample points on the interface at time `t`.

    A circle gets `count` equally spaced points, a 1D sphere its two end points, and a flat
    line `count` points spanning the domain side.
    """
    if g.dim == 1:
        if g.flat:
            return np.zeros((1, 1))
        radius = radius_at(g, t)
        return np.array([[g.center[0] - radius], [g.center[0] + radius]])
    if g.flat:
        ys = np.linspace(-0.5 * side_length, 0.5 * side_length, count)
        return np.stack([np.zeros(count), ys], axis=-1)
    angles = np.linspace(0.0, 2.0 * math.pi, count, endpoint=False)
    radius = radius_at(g, t)
    return np.asarray(g.center) + radius * np.stack([np.cos(angles), np.sin(angles)], axis=-1)


@dataclass(frozen=True)
class GeometricResiduals:
    """Scaled defects of the identities satisfied by the extended fields.

    Attributes:
        divergence: `|div xi + H . xi| / (|d| + h)` on the inner half tube.
        transport: `|dt xi + (H . grad) xi + (grad H)^T xi| / (|d| + h)` on the inner half tube.
        length_transport: `|dt |xi|^2 + (H . grad) |xi|^2| / (|d| + h)` on the inner half tube.
        bound: `|grad xi| + |H| + |grad H|` over the whole grid.
    """

    t: float
    divergence: float
    transport: float
    length_transport: float
    bound: float

    def as_row(self) -> dict[str, float]:
        return asdict(self)


def _jacobian(
    field: Callable[[PointArray], PointArray], x: PointArray, h: float
) -> FloatArray:
    """Central-difference Jacobian, `out[..., j, i] = d field_j / d x_i`."""
    columns = []
    for i in range(x.shape[-1]):
        shift = np.zeros(x.shape[-1])
        shift[i] = h
        columns.append((field(x + shift) - field(x - shift)) / (2.0 * h))
    return np.stack(columns, axis=-1)


def geometric_residuals(g: SphereInterface, t: float, grid: GridSpec) -> GeometricResiduals:
    """Check the extended-field identities on the nodes of `grid` by central differences."""
    h = grid.h
    x = grid.coordinates().reshape(-1, grid.dim)

    def xi_at(p: PointArray, s: float = t) -> PointArray:
        return xi_field(g, p, s)

    def h_at(p: PointArray) -> PointArray:
        return extended_h(g, p, t)

    jac_xi_all = _jacobian(xi_at, x, h)
    jac_h_all = _jacobian(h_at, x, h)
    bound = float(
        np.max(
            np.linalg.norm(jac_xi_all, axis=(-2, -1))
            + np.linalg.norm(h_at(x), axis=-1)
            + np.linalg.norm(jac_h_all, axis=(-2, -1))
        )
    )

    d = signed_distance(g, x, t)
    tube = np.abs(d) < 0.5 * g.delta_gamma
    if not np.any(tube):
        msg = f"no grid node within delta_gamma/2 of the interface at t={t:g}"
        logger.warning(msg)
        return GeometricResiduals(t, 0.0, 0.0, 0.0, bound)

    xs, ds = x[tube], np.abs(d[tube]) + h
    xi, hv = xi_at(xs), h_at(xs)
    jac_xi, jac_h = jac_xi_all[tube], jac_h_all[tube]
    dt_xi = (xi_at(xs, t + TIME_STEP) - xi_at(xs, t - TIME_STEP)) / (2.0 * TIME_STEP)

    divergence = np.trace(jac_xi, axis1=-2, axis2=-1) + np.sum(hv * xi, axis=-1)
    transport = (
        dt_xi
        + np.einsum("...ji,...i->...j", jac_xi, hv)
        + np.einsum("...ji,...j->...i", jac_h, xi)
    )
    dt_length = 2.0 * np.sum(xi * dt_xi, axis=-1)
    grad_length = 2.0 * np.einsum("...j,...ji->...i", xi, jac_xi)
    length_transport = dt_length + np.sum(hv * grad_length, axis=-1)

    return GeometricResiduals(
        t=t,
        divergence=float(np.max(np.abs(divergence) / ds)),
        transport=float(np.max(np.linalg.norm(transport, axis=-1) / ds)),
        length_transport=float(np.max(np.abs(length_transport) / ds)),
        bound=bound,
    )


def xi_divergence(g: SphereInterface, x: npt.ArrayLike, t: float) -> FloatArray:
    """Divergence of the extended normal by central differences of step `1e-6`."""
    x = np.asarray(x, dtype=np.float64)
    jac = _jacobian(lambda p: xi_field(g, p, t), x, TIME_STEP)
    return np.trace(jac, axis1=-2, axis2=-1)
