"""Well-prepared initial data: bulk maps glued across the initial interface by the orbit profile."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

from mvac.interface import plateau_bump, signed_distance
from mvac.kinds import PolarsScenarioKind, parse_kind
from mvac.profile1d import ORTHOGONALITY_TOL, profile_s
from mvac.solver import Field
from mvac.stencils import boundary_mask

if TYPE_CHECKING:
    import numpy.typing as npt

    from mvac.config import RunConfig
    from mvac.interface import SphereInterface
    from mvac.kinds import ScenarioKind
    from mvac.typing import FloatArray, Mat, MatStack, PointArray

__all__ = [
    "ScenarioSpec",
    "base_reflection",
    "build_well_prepared",
    "bulk_maps",
    "interpolation_profile",
    "l2_gap_to_sharp_limit",
    "sharp_interface_limit",
]

UNIT_TOL = 1e-12


def base_reflection(n: int, angle: float = 0.0) -> Mat:
    """`diag(-1, 1, ..., 1)` rotated by `angle` in the plane of the first two axes.

    Examples:
        >>> mv.base_reflection(2).tolist()
        [[-1.0, 0.0], [0.0, 1.0]]
    """
    return _plane_rotation(n, angle) @ np.diag([-1.0] + [1.0] * (n - 1))


def _plane_rotation(n: int, angle: npt.ArrayLike) -> MatStack:
    angle = np.asarray(angle, dtype=np.float64)
    out = np.broadcast_to(np.eye(n), (*angle.shape, n, n)).copy()
    c, s = np.cos(angle), np.sin(angle)
    out[..., 0, 0], out[..., 0, 1] = c, -s
    out[..., 1, 0], out[..., 1, 1] = s, c
    return out


def _reflection(axis: PointArray) -> MatStack:
    return np.eye(axis.shape[-1]) - 2.0 * axis[..., :, None] * axis[..., None, :]


@dataclass(frozen=True)
class ScenarioSpec:
    """Bulk maps of the initial data and the width of the gluing layer.

    Attributes:
        kind: `"constant"` keeps the reflection axis fixed; `"rotating_axis"` turns it
            `winding` times in the plane of the first two axes along the interface.
        a_minus_base: Base map on O(n)-.
        axis: Unit reflection axis at polar angle zero.
        winding: Number of turns of the rotating axis.
        delta: Half-width of the gluing layer, below `delta_gamma / 2`.
        noise: Amplitude of the seeded perturbation added outside the layer.
    """

    kind: ScenarioKind
    a_minus_base: Mat
    axis: FloatArray
    winding: int = 1
    delta: float = 0.04
    noise: float = 0.0
    a_plus_base: Mat = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", parse_kind(self.kind, PolarsScenarioKind, "scenario"))
        base = np.asarray(self.a_minus_base, dtype=np.float64)
        axis = np.asarray(self.axis, dtype=np.float64)
        object.__setattr__(self, "a_minus_base", base)
        n = base.shape[-1]
        if base.shape != (n, n) or n < 2:
            msg = f"a_minus_base must be a square matrix of size at least 2, got {base.shape}"
            raise ValueError(msg)
        if np.linalg.norm(base @ base.T - np.eye(n)) > ORTHOGONALITY_TOL:
            msg = "a_minus_base must be orthogonal"
            raise ValueError(msg)
        if np.linalg.det(base) > 0:
            msg = "a_minus_base must have determinant -1"
            raise ValueError(msg)
        if axis.shape != (n,):
            msg = f"axis must have {n} components, got shape {axis.shape}"
            raise ValueError(msg)
        if abs(np.linalg.norm(axis) - 1.0) > UNIT_TOL:
            msg = f"axis must be a unit vector, got norm {np.linalg.norm(axis):.12g}"
            raise ValueError(msg)
        if not self.delta > 0:
            msg = f"delta must be positive, got {self.delta}"
            raise ValueError(msg)
        if self.noise < 0:
            msg = f"noise must be non-negative, got {self.noise}"
            raise ValueError(msg)
        object.__setattr__(self, "axis", axis)
        object.__setattr__(self, "a_plus_base", base @ _reflection(axis))

    @property
    def n(self) -> int:
        return self.a_minus_base.shape[-1]

    def check_interface(self, g: SphereInterface) -> None:
        """Require the gluing layer to fit in half the tubular neighborhood."""
        if self.delta >= 0.5 * g.delta_gamma:
            msg = f"delta={self.delta} must be below delta_gamma/2={0.5 * g.delta_gamma}"
            raise ValueError(msg)


def _polar_angle(g: SphereInterface, x: PointArray, side_length: float) -> FloatArray:
    if g.flat:
        if g.dim == 1:
            return np.zeros(x.shape[:-1])
        return 2.0 * math.pi * x[..., 1] / side_length
    offset = x - np.asarray(g.center)
    if g.dim == 1:
        return np.where(offset[..., 0] >= 0, 0.0, math.pi)
    return np.arctan2(offset[..., 1], offset[..., 0])


def bulk_maps(x: npt.ArrayLike, cfg: RunConfig) -> tuple[MatStack, MatStack, PointArray]:
    """Bulk maps `A+`, `A-` and reflection axis at the points `x`.

    The maps satisfy `A+ = A- (I - 2 n n^T)` everywhere. The rotating axis is carried by
    `A-`, which lives outside the sphere, so that both maps are smooth in their phases.
    """
    x = np.asarray(x, dtype=np.float64)
    sc = cfg.scenario
    batch = x.shape[:-1]
    if sc.kind == "constant":
        axis = np.broadcast_to(sc.axis, (*batch, sc.n))
        a_minus = np.broadcast_to(sc.a_minus_base, (*batch, sc.n, sc.n))
        a_plus = np.broadcast_to(sc.a_plus_base, (*batch, sc.n, sc.n))
        return a_plus.copy(), a_minus.copy(), axis.copy()
    angle = sc.winding * _polar_angle(cfg.interface, x, cfg.grid.side_length)
    axis = np.einsum("...ij,j->...i", _plane_rotation(sc.n, angle), sc.axis)
    a_plus = np.broadcast_to(sc.a_plus_base, (*batch, sc.n, sc.n)).copy()
    a_minus = a_plus @ _reflection(axis)
    return a_plus, a_minus, axis


def interpolation_profile(
    x: npt.ArrayLike, eps: float, g: SphereInterface, delta: float
) -> float | FloatArray:
    """Gluing weight `eta s(d/eps) + (1 - eta) 1[d > 0]`, `eta` the plateau bump of width `delta`.

    Examples:
        >>> g = mv.SphereInterface(dim=2, center=(0.0, 0.0), r0=0.3, delta_gamma=0.1)
        >>> x = [[0.3, 0.0], [0.0, 0.0], [0.9, 0.0]]
        >>> mv.interpolation_profile(x, 0.02, g, 0.04).tolist()
        [0.5, 1.0, 0.0]
    """
    d = signed_distance(g, x, 0.0)
    eta = np.asarray(plateau_bump(d / delta))
    value = eta * np.asarray(profile_s(d / eps)) + (1.0 - eta) * (d > 0)
    return float(value) if np.ndim(value) == 0 else value


def build_well_prepared(cfg: RunConfig) -> Field:
    """Initial field `(1 - S) A- + S A+` on the configured grid.

    Raises:
        ValueError: If the gluing layer does not fit the tubular neighborhood.
    """
    sc, g, grid = cfg.scenario, cfg.interface, cfg.grid
    sc.check_interface(g)
    x = grid.coordinates()
    a_plus, a_minus, _ = bulk_maps(x, cfg)
    s = np.asarray(interpolation_profile(x, cfg.eps, g, sc.delta))[..., None, None]
    values = (1.0 - s) * a_minus + s * a_plus
    if sc.noise > 0:
        d = signed_distance(g, x, 0.0)
        off_layer = (np.abs(d) >= sc.delta) & ~boundary_mask(grid)
        rng = np.random.default_rng(cfg.seed)
        perturbation = rng.standard_normal(values.shape)
        values = values + sc.noise * off_layer[..., None, None] * perturbation
    return Field(grid, 0.0, values)


def sharp_interface_limit(cfg: RunConfig) -> Field:
    """The limit field `A+ 1[d > 0] + A- 1[d <= 0]` of the initial data as `eps -> 0`."""
    x = cfg.grid.coordinates()
    a_plus, a_minus, _ = bulk_maps(x, cfg)
    inside = (signed_distance(cfg.interface, x, 0.0) > 0)[..., None, None]
    return Field(cfg.grid, 0.0, np.where(inside, a_plus, a_minus))


def l2_gap_to_sharp_limit(f: Field, cfg: RunConfig) -> float:
    """Discrete L2 distance between `f` and the sharp-interface limit, of order `sqrt(eps)`."""
    diff = f.values - sharp_interface_limit(cfg).values
    return math.sqrt(float(np.sum(diff * diff)) * f.grid.cell_volume)
