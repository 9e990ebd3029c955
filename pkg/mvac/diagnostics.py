"""Modulated-energy diagnostics of phase-field trajectories.

Energies are integrated with the midpoint rule over grid cells: matrix values are the means
of the cell corners and gradients the cell-centered differences, so that a field which is
constant on a cell contributes no gradient energy. Pointwise identities which need a
Laplacian or a time derivative are evaluated at interior nodes instead.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING

import numpy as np
import polars as pl
from scipy.integrate import cumulative_trapezoid
from scipy.interpolate import RegularGridInterpolator
from scipy.spatial import cKDTree

from mvac.interface import (
    extended_h,
    grad_signed_distance,
    plateau_bump,
    plateau_bump_slope,
    radius_at,
    sample_interface,
    signed_distance,
    xi_divergence,
    xi_field,
)
from mvac.matgeo import (
    SURFACE_TENSION,
    commutator,
    frob_inner,
    nearest_orthogonal_flags,
    potential_grad,
    project_pi,
    quasi_distance,
    quasi_distance_grad_flags,
    quasi_distance_smoothed,
    quasi_potential,
    regularized_potential,
)
from mvac.solver import max_singular_value
from mvac.stencils import (
    cell_average,
    cell_centers,
    cell_gradient,
    central_gradient,
    laplacian,
)

if TYPE_CHECKING:
    import numpy.typing as npt

    from mvac.config import RunConfig
    from mvac.interface import SphereInterface
    from mvac.matgeo import QuasiDistParams
    from mvac.solver import Field, Trajectory
    from mvac.typing import FloatArray, MatStack, PointArray

__all__ = [
    "AntisymmetricBump",
    "CoercivityReport",
    "EnergyReport",
    "coercivity_check",
    "curvature_identity_defect",
    "default_test_functions",
    "energy_reports",
    "extract_interface",
    "hausdorff",
    "minimal_pair_defect",
    "modulated_energy",
    "orthogonality_defect",
    "psi_field",
    "weak_residual",
]

logger = logging.getLogger(__name__)

GRADIENT_GATE = 1e-8
INTERFACE_SAMPLES = 256
STRADDLE_ANGLE = math.pi / 6
TIME_SUBDIVISIONS = 64
"""Quadrature nodes of the time bump per snapshot interval."""


@dataclass(frozen=True)
class EnergyReport:
    """Diagnostics of one snapshot; quantities not computed are NaN.

    Attributes:
        t: Snapshot time.
        dirichlet: `int eps/2 |grad A|^2`.
        potential: `int F_eps(A)/eps`.
        coupling: `int xi . grad psi`.
        modulated_energy: `dirichlet + potential - coupling`.
        coercivity_lhs1: `int (eps/2 |grad A|^2 + F_eps/eps + |grad psi|) min(d^2, 1)`.
        coercivity_lhs2: `eps int |grad A - Pi grad A|^2`.
        orthogonality_max_defect: Largest defect of the projection identities.
        curvature_identity_defect: Largest defect of `H_eps |grad A| = -eps dA/dt : grad A`.
        interface_hausdorff: Hausdorff distance of the extracted level set to the reference.
        minimal_pair_defect: Largest `| |P+ - P-| - 2 |` over the interface probes.
        weak_residuals: Weak residual per test function, integrated up to `t`.
        degeneracy_count: Cells where the quasi-distance gradient fell back to zero.
        max_singular_value: Largest singular value over the nodes.
        modulated_energy_unsmoothed: The modulated energy with the unsmoothed quasi-distance.
        commutator_residual: Largest defect of the commutator form of the equation.
        proj_dt_defect: `eps int |dA/dt - Pi dA/dt|^2`.
        dissipation: Three raw dissipation integrals.
        bulk_energy: `int |grad A|^2 + F_eps/eps^2` away from the tubular neighborhood.
        normal_alignment: `int (1 - n_eps . xi) |grad psi|`.
        minimal_pair_skipped: Probe points skipped for degenerate projections.
    """

    t: float
    dirichlet: float
    potential: float
    coupling: float
    modulated_energy: float
    coercivity_lhs1: float = math.nan
    coercivity_lhs2: float = math.nan
    orthogonality_max_defect: float = math.nan
    curvature_identity_defect: float = math.nan
    interface_hausdorff: float = math.nan
    minimal_pair_defect: float = math.nan
    weak_residuals: tuple[float, ...] = ()
    degeneracy_count: int = 0
    max_singular_value: float = math.nan
    modulated_energy_unsmoothed: float = math.nan
    commutator_residual: float = math.nan
    proj_dt_defect: float = math.nan
    dissipation: tuple[float, float, float] = (math.nan, math.nan, math.nan)
    bulk_energy: float = math.nan
    normal_alignment: float = math.nan
    minimal_pair_skipped: int = 0

    @property
    def coercivity_ratios(self) -> tuple[float, float]:
        rhs = self.modulated_energy
        if not rhs > 0:
            return math.nan, math.nan
        return self.coercivity_lhs1 / rhs, self.coercivity_lhs2 / rhs

    def as_row(self) -> dict[str, float | int]:
        """Flatten into the columns of the diagnostics CSV."""
        ratio1, ratio2 = self.coercivity_ratios
        row: dict[str, float | int] = {
            "t": self.t,
            "E_mod": self.modulated_energy,
            "dirichlet": self.dirichlet,
            "potential": self.potential,
            "coupling": self.coupling,
            "coerc1_ratio": ratio1,
            "coerc2_ratio": ratio2,
            "orth_defect": self.orthogonality_max_defect,
            "curv_defect": self.curvature_identity_defect,
            "hausdorff": self.interface_hausdorff,
            "minpair_defect": self.minimal_pair_defect,
        }
        row.update({f"weak_res_{i}": r for i, r in enumerate(self.weak_residuals, start=1)})
        row.update({
            "degeneracies": self.degeneracy_count,
            "max_sv": self.max_singular_value,
            "coerc1_lhs": self.coercivity_lhs1,
            "coerc2_lhs": self.coercivity_lhs2,
            "E_mod_unsmoothed": self.modulated_energy_unsmoothed,
            "commutator_residual": self.commutator_residual,
            "proj_dt_defect": self.proj_dt_defect,
        })
        row.update({f"dissip_{i}": d for i, d in enumerate(self.dissipation, start=1)})
        row.update({
            "bulk_energy": self.bulk_energy,
            "normal_alignment": self.normal_alignment,
            "minpair_skipped": self.minimal_pair_skipped,
        })
        return row


@dataclass(frozen=True)
class CoercivityReport:
    lhs1: float
    lhs2: float
    rhs: float

    @property
    def ratio1(self) -> float:
        return self.lhs1 / self.rhs if self.rhs > 0 else math.nan

    @property
    def ratio2(self) -> float:
        return self.lhs2 / self.rhs if self.rhs > 0 else math.nan


@dataclass(frozen=True)
class _Cells:
    """Cell-centered quantities shared by the energy integrals."""

    values: MatStack
    gradient: MatStack
    psi_gradient: FloatArray
    xi: PointArray
    distance: FloatArray
    volume: float
    degenerate: npt.NDArray[np.bool_] = field(repr=False)


def _cells(f: Field, g: SphereInterface, p: QuasiDistParams) -> _Cells:
    grid = f.grid
    centers = cell_centers(grid)
    values = cell_average(f.values, grid)
    _, degenerate = quasi_distance_grad_flags(values, p)
    return _Cells(
        values=values,
        gradient=cell_gradient(f.values, grid),
        psi_gradient=cell_gradient(psi_field(f, p), grid),
        xi=xi_field(g, centers, f.t),
        distance=signed_distance(g, centers, f.t),
        volume=grid.cell_volume,
        degenerate=degenerate,
    )


def _sq_norm(stacked: MatStack) -> FloatArray:
    """Squared Frobenius norm summed over the leading gradient axis."""
    return np.einsum("i...jk,i...jk->...", stacked, stacked)


def _coupling(xi: PointArray, psi_gradient: FloatArray) -> FloatArray:
    return np.einsum("...i,i...->...", xi, psi_gradient)


def psi_field(f: Field, p: QuasiDistParams) -> FloatArray:
    """Smoothed quasi-distance of the field at every node."""
    return np.asarray(quasi_distance_smoothed(f.values, p))


def _energy(c: _Cells, f: Field, p: QuasiDistParams) -> EnergyReport:
    eps = p.eps
    dirichlet = 0.5 * eps * float(np.sum(_sq_norm(c.gradient))) * c.volume
    potential = float(np.sum(regularized_potential(c.values, eps, p.k))) / eps * c.volume
    coupling = float(np.sum(_coupling(c.xi, c.psi_gradient))) * c.volume
    return EnergyReport(
        t=f.t,
        dirichlet=dirichlet,
        potential=potential,
        coupling=coupling,
        modulated_energy=dirichlet + potential - coupling,
        degeneracy_count=int(np.count_nonzero(c.degenerate)),
    )


def modulated_energy(f: Field, g: SphereInterface, p: QuasiDistParams) -> EnergyReport:
    """Energy terms of the field relative to the reference interface at `f.t`.

    The coupling term uses the difference quotients of the node values of `psi_field`.
    """
    return _energy(_cells(f, g, p), f, p)


def _coercivity(c: _Cells, p: QuasiDistParams, rhs: float) -> CoercivityReport:
    eps = p.eps
    density = (
        0.5 * eps * _sq_norm(c.gradient)
        + np.asarray(regularized_potential(c.values, eps, p.k)) / eps
        + np.linalg.norm(c.psi_gradient, axis=0)
    )
    lhs1 = float(np.sum(density * np.minimum(c.distance**2, 1.0))) * c.volume
    normal_part = c.gradient - project_pi(c.values, c.gradient, p)
    lhs2 = eps * float(np.sum(_sq_norm(normal_part))) * c.volume
    return CoercivityReport(lhs1=lhs1, lhs2=lhs2, rhs=rhs)


def coercivity_check(f: Field, g: SphereInterface, p: QuasiDistParams) -> CoercivityReport:
    """Both coercivity integrals against the modulated energy."""
    c = _cells(f, g, p)
    return _coercivity(c, p, _energy(c, f, p).modulated_energy)


def _orthogonality(values: MatStack, gradient: MatStack, p: QuasiDistParams) -> float:
    direction, _ = quasi_distance_grad_flags(values, p)
    projected = project_pi(values, gradient, p)
    chain = np.asarray(frob_inner(direction, gradient))
    chain_norm = np.linalg.norm(chain, axis=0)
    projected_norm = np.sqrt(_sq_norm(projected))
    direction_norm = np.sqrt(np.asarray(frob_inner(direction, direction)))
    length = np.abs(projected_norm * direction_norm - chain_norm)
    orthogonal = np.abs(np.asarray(frob_inner(gradient - projected, projected)))
    return float(max(np.max(length), np.max(orthogonal)))


def orthogonality_defect(f: Field, p: QuasiDistParams) -> float:
    """Largest defect of the two projection identities.

    The identities `|Pi grad A| |Dd| = |Dd : grad A|` and `(grad A - Pi grad A) : Pi grad A = 0`
    are algebraic and hold to rounding error.
    """
    grid = f.grid
    return _orthogonality(cell_average(f.values, grid), cell_gradient(f.values, grid), p)


def _curvature_defect(f: Field, rate: MatStack, eps: float) -> float:
    grid = f.grid
    gradient, valid = central_gradient(f.values, grid)
    driving = eps * laplacian(f.values, grid) - potential_grad(f.values) / eps
    lhs = np.asarray(frob_inner(-driving, gradient))
    rhs = np.asarray(frob_inner(-eps * rate, gradient))
    gate = valid & (np.sqrt(_sq_norm(gradient)) > GRADIENT_GATE)
    if not np.any(gate):
        return 0.0
    return float(np.max(np.abs(lhs - rhs)[:, gate]))


def curvature_identity_defect(traj: Trajectory, index: int | None = None) -> float:
    """Defect of `H_eps |grad A| = -eps dA/dt : grad A` at the interior nodes.

    `H_eps` is taken from its definition with the discrete Laplacian and `dA/dt` from the
    difference between a snapshot and its successor. Returns the value at snapshot
    `index`, or the largest value over all snapshots.
    """
    rates = traj.time_derivatives()
    indices = range(len(traj.snapshots)) if index is None else [index]
    return max(_curvature_defect(traj.snapshots[j], rates[j], traj.eps) for j in indices)


def extract_interface(f: Field, p: QuasiDistParams) -> PointArray:
    """Crossings of the `psi_field` level `c/2` along grid edges, by linear interpolation.

    Returns an empty `(0, dim)` array, with a warning, when the level is not crossed.
    """
    grid = f.grid
    level = psi_field(f, p) - 0.5 * SURFACE_TENSION
    x = grid.coordinates()
    points = []
    for axis in range(grid.dim):
        lower = [slice(None)] * grid.dim
        upper = [slice(None)] * grid.dim
        lower[axis] = slice(None, -1)
        upper[axis] = slice(1, None)
        a, b = level[tuple(lower)], level[tuple(upper)]
        crossing = (a < 0) != (b < 0)
        weight = a[crossing] / (a[crossing] - b[crossing])
        start = x[tuple(lower)][crossing]
        start[:, axis] += weight * grid.h
        points.append(start)
    out = np.concatenate(points, axis=0)
    if out.shape[0] == 0:
        msg = f"no interface crossing found at t={f.t:g}"
        logger.warning(msg)
    return out


def hausdorff(
    pts: npt.ArrayLike,
    g: SphereInterface,
    t: float,
    *,
    samples: int = INTERFACE_SAMPLES,
    side_length: float = 2.0,
) -> float:
    """Hausdorff distance between a point set and the reference interface at time `t`.

    Raises:
        ValueError: If `pts` is empty.
    """
    pts = np.asarray(pts, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[0] == 0:
        msg = "hausdorff distance needs a nonempty point set"
        raise ValueError(msg)
    to_interface = float(np.max(np.abs(signed_distance(g, pts, t))))
    reference = sample_interface(g, t, samples, side_length)
    to_points, _ = cKDTree(pts).query(reference)
    return max(to_interface, float(np.max(to_points)))


def minimal_pair_defect(
    f: Field,
    g: SphereInterface,
    t: float,
    probe_delta: float,
    *,
    count: int = 64,
) -> tuple[float, int]:
    """Largest `| |P+ - P-| - 2 |` over `count` interface points, with the number skipped.

    `P+` and `P-` are the nearest points on O(n)+ and O(n)- of the field interpolated at
    `probe_delta` on either side of the interface. Points whose projection is not unique
    are skipped; the defect is NaN when all are.
    """
    grid = f.grid
    if not probe_delta > 2.0 * grid.h:
        msg = f"probe_delta={probe_delta:g} must exceed 2h={2.0 * grid.h:g}"
        raise ValueError(msg)
    n = f.n
    axes = (grid.axis_coordinates(),) * grid.dim
    interpolate = RegularGridInterpolator(
        axes, f.values.reshape(*grid.shape, n * n), bounds_error=False, fill_value=None
    )
    base = sample_interface(g, t, count, grid.side_length)
    normal = np.asarray(grad_signed_distance(g, base, t))
    inner = interpolate(base + probe_delta * normal).reshape(-1, n, n)
    outer = interpolate(base - probe_delta * normal).reshape(-1, n, n)
    p_plus, bad_plus = nearest_orthogonal_flags(inner, 1)
    p_minus, bad_minus = nearest_orthogonal_flags(outer, -1)
    usable = ~(bad_plus | bad_minus)
    skipped = int(np.count_nonzero(~usable))
    if skipped:
        msg = f"skipped {skipped} of {usable.size} minimal-pair probes with degenerate projection"
        logger.warning(msg)
    if not np.any(usable):
        return math.nan, skipped
    gap = np.linalg.norm(p_plus[usable] - p_minus[usable], axis=(-2, -1))
    return float(np.max(np.abs(gap - 2.0))), skipped


@dataclass(frozen=True)
class AntisymmetricBump:
    """Test function `b_t(t) b_x(x) E` with plateau bumps and an elementary antisymmetric `E`.

    `b_t` is supported in `(0, t_final)` and `b_x` in the ball of `radius` around `center`;
    an infinite radius makes `b_x` identically one.

    Attributes:
        n: Matrix dimension.
        center: Center of the spatial bump.
        radius: Radius of the spatial support.
        t_final: End of the time interval.
        entry: Indices `(i, j)` of `E = e_i e_j^T - e_j e_i^T`.
        amplitude: Scalar factor.
    """

    n: int
    center: tuple[float, ...]
    radius: float
    t_final: float
    entry: tuple[int, int] = (0, 1)
    amplitude: float = 1.0

    def __post_init__(self) -> None:
        i, j = self.entry
        if i == j or not (0 <= i < self.n and 0 <= j < self.n):
            msg = f"entry {self.entry} does not select an off-diagonal entry of {self.n}x{self.n}"
            raise ValueError(msg)
        if not self.radius > 0:
            msg = f"radius must be positive, got {self.radius}"
            raise ValueError(msg)

    @property
    def matrix(self) -> MatStack:
        out = np.zeros((self.n, self.n))
        i, j = self.entry
        out[i, j], out[j, i] = self.amplitude, -self.amplitude
        return out

    def time_factor(self, t: float) -> float:
        if not self.t_final > 0:
            return 0.0
        half = 0.5 * self.t_final
        return float(plateau_bump((t - half) / half))

    def _scaled(self, x: PointArray) -> tuple[PointArray, FloatArray]:
        offset = np.asarray(x, dtype=np.float64) - np.asarray(self.center)
        return offset, np.linalg.norm(offset, axis=-1) / self.radius

    def space_factor(self, x: npt.ArrayLike) -> FloatArray:
        x = np.asarray(x, dtype=np.float64)
        if math.isinf(self.radius):
            return np.ones(x.shape[:-1])
        _, s = self._scaled(x)
        return np.asarray(plateau_bump(s))

    def space_gradient(self, x: npt.ArrayLike) -> PointArray:
        """Gradient of the spatial factor, stacked along a leading axis of length `dim`."""
        x = np.asarray(x, dtype=np.float64)
        if math.isinf(self.radius):
            return np.zeros((x.shape[-1], *x.shape[:-1]))
        offset, s = self._scaled(x)
        safe = np.where(s > 0, s, 1.0) * self.radius**2
        grad = np.asarray(plateau_bump_slope(s))[..., None] * offset / safe[..., None]
        return np.moveaxis(grad, -1, 0)


def default_test_functions(cfg: RunConfig) -> list[AntisymmetricBump]:
    """Bumps inside the O(n)+ phase, inside the O(n)- phase and straddling the interface.

    On a circle the straddling bump sits at polar angle `STRADDLE_ANGLE`, off the mirror
    lines of the grid: a bump centered on one of them sees the discrete commutator flux of
    the rotating-axis data cancel exactly.
    """
    g, side = cfg.interface, cfg.grid.side_length
    unit = np.zeros(cfg.dim)
    unit[0] = 1.0
    center = np.asarray(g.center)
    if g.flat:
        quarter = 0.25 * side
        placements = [
            (center + quarter * unit, 0.5 * quarter),
            (center - quarter * unit, 0.5 * quarter),
            (center, 0.5 * quarter),
        ]
    else:
        gap = 0.5 * side - abs(g.center[0]) - g.r0
        across = unit.copy()
        if cfg.dim == 2:
            across[:] = math.cos(STRADDLE_ANGLE), math.sin(STRADDLE_ANGLE)
        placements = [
            (center, 0.5 * radius_at(g, cfg.t_final)),
            (center + (g.r0 + 0.5 * gap) * unit, 0.4 * gap),
            (center + g.r0 * across, 0.5 * g.r0),
        ]
    return [
        AntisymmetricBump(n=cfg.n, center=tuple(c), radius=r, t_final=cfg.t_final)
        for c, r in placements
    ]


def _weak_density(f: Field, rate: MatStack, phi: AntisymmetricBump) -> float:
    """Spatial integral of the weak form at one snapshot, without the time factor."""
    grid = f.grid
    x = grid.coordinates()
    gradient, valid = central_gradient(f.values, grid)
    e = phi.matrix
    time_part = phi.space_factor(x) * np.asarray(frob_inner(commutator(rate, f.values), e))
    flux = np.asarray(frob_inner(commutator(gradient, f.values), e))
    space_part = np.einsum("i...,i...->...", flux, phi.space_gradient(x))
    density = 0.5 * (time_part + space_part)
    return float(np.sum(density[valid])) * grid.cell_volume


def _weak_cumulative(
    traj: Trajectory, rates: list[MatStack], test_fn: AntisymmetricBump
) -> FloatArray:
    """Running time integral of the weak form, sampled at the snapshot times.

    The spatial integrals are interpolated linearly between snapshots and integrated against
    the time bump on `TIME_SUBDIVISIONS` nodes per interval.
    """
    times = np.asarray(traj.times, dtype=np.float64)
    if times.size < 2:
        return np.zeros(times.size)
    spatial = np.array([
        _weak_density(f, rate, test_fn) for f, rate in zip(traj.snapshots, rates, strict=True)
    ])
    nodes = np.concatenate([
        *(
            np.linspace(a, b, TIME_SUBDIVISIONS, endpoint=False)
            for a, b in zip(times[:-1], times[1:], strict=True)
        ),
        times[-1:],
    ])
    bump = np.array([test_fn.time_factor(t) for t in nodes])
    running = cumulative_trapezoid(bump * np.interp(nodes, times, spatial), x=nodes, initial=0.0)
    return running[::TIME_SUBDIVISIONS]


def weak_residual(traj: Trajectory, test_fn: AntisymmetricBump, upto: int | None = None) -> float:
    """Absolute space-time integral of `1/2 [dA/dt, A] : Phi + 1/2 sum_i [d_i A, A] : d_i Phi`.

    The time integral runs over the snapshots `0..upto`, all by default.
    """
    running = _weak_cumulative(traj, traj.time_derivatives(), test_fn)
    return abs(float(running[-1 if upto is None else upto]))


def _commutator_residual(f: Field, rate: MatStack) -> float:
    grid = f.grid
    gradient, valid = central_gradient(f.values, grid)
    flux = commutator(gradient, f.values)
    divergence = np.zeros_like(f.values)
    inner = valid.copy()
    for axis in range(grid.dim):
        component, _ = central_gradient(flux[axis], grid)
        divergence += component[axis]
        inner &= np.roll(valid, 1, axis=axis) & np.roll(valid, -1, axis=axis)
    defect = np.linalg.norm(commutator(rate, f.values) - divergence, axis=(-2, -1))
    return float(np.max(defect[inner])) if np.any(inner) else 0.0


def _rate_terms(
    f: Field, rate: MatStack, g: SphereInterface, p: QuasiDistParams
) -> tuple[float, tuple[float, float, float]]:
    grid, eps = f.grid, p.eps
    x = grid.coordinates()
    gradient, valid = central_gradient(f.values, grid)
    w = grid.cell_volume

    def integrate(density: FloatArray) -> float:
        return float(np.sum(density[valid])) * w

    normal_rate = rate - project_pi(f.values, rate, p)
    proj_dt = eps * integrate(np.asarray(frob_inner(normal_rate, normal_rate)))

    direction, _ = quasi_distance_grad_flags(f.values, p)
    divergence = xi_divergence(g, x, f.t)
    mismatch = eps * rate - divergence[..., None, None] * direction
    dissip_1 = integrate(np.asarray(frob_inner(mismatch, mismatch))) / (2.0 * eps)

    norm = np.sqrt(_sq_norm(gradient))
    driving = eps * laplacian(f.values, grid) - potential_grad(f.values) / eps
    safe = np.where(norm > GRADIENT_GATE, norm, 1.0)
    h_eps = np.where(norm > GRADIENT_GATE, -np.asarray(frob_inner(driving, gradient)) / safe, 0.0)
    h_ref = np.moveaxis(extended_h(g, x, f.t), -1, 0)
    gap = h_eps - eps * norm * h_ref
    dissip_2 = integrate(np.sum(gap**2, axis=0)) / (2.0 * eps)
    dissip_3 = (
        integrate(eps**2 * np.asarray(frob_inner(rate, rate))) - integrate(np.sum(h_eps**2, axis=0))
    ) / (2.0 * eps)
    return proj_dt, (dissip_1, dissip_2, dissip_3)


def _snapshot_report(
    traj: Trajectory,
    index: int,
    cfg: RunConfig,
    rates: list[MatStack],
    weak: tuple[float, ...],
) -> EnergyReport:
    f, rate = traj.snapshots[index], rates[index]
    g, p = cfg.interface, cfg.quasi_params
    c = _cells(f, g, p)
    report = _energy(c, f, p)
    coerc = _coercivity(c, p, report.modulated_energy)

    unsmoothed_psi = cell_gradient(np.asarray(quasi_distance(f.values)), f.grid)
    unsmoothed = (
        report.dirichlet
        + float(np.sum(quasi_potential(c.values))) / p.eps * c.volume
        - float(np.sum(_coupling(c.xi, unsmoothed_psi))) * c.volume
    )
    psi_norm = np.linalg.norm(c.psi_gradient, axis=0)
    alignment = float(np.sum(psi_norm - _coupling(c.xi, c.psi_gradient))) * c.volume
    bulk = np.abs(c.distance) >= g.delta_gamma
    bulk_density = _sq_norm(c.gradient) + np.asarray(
        regularized_potential(c.values, p.eps, p.k)
    ) / p.eps**2
    proj_dt, dissipation = _rate_terms(f, rate, g, p)

    points = extract_interface(f, p)
    distance = (
        hausdorff(points, g, f.t, side_length=f.grid.side_length)
        if points.shape[0]
        else math.nan
    )
    pair, skipped = minimal_pair_defect(
        f, g, f.t, cfg.effective_probe_delta, count=cfg.probe_count
    )

    return replace(
        report,
        coercivity_lhs1=coerc.lhs1,
        coercivity_lhs2=coerc.lhs2,
        orthogonality_max_defect=_orthogonality(c.values, c.gradient, p),
        curvature_identity_defect=_curvature_defect(f, rate, p.eps),
        interface_hausdorff=distance,
        minimal_pair_defect=pair,
        minimal_pair_skipped=skipped,
        weak_residuals=weak,
        max_singular_value=max_singular_value(f),
        modulated_energy_unsmoothed=unsmoothed,
        commutator_residual=_commutator_residual(f, rate),
        proj_dt_defect=proj_dt,
        dissipation=dissipation,
        bulk_energy=float(np.sum(bulk_density[bulk])) * c.volume,
        normal_alignment=alignment,
    )


def energy_reports(
    traj: Trajectory, cfg: RunConfig, tests: list[AntisymmetricBump] | None = None
) -> pl.DataFrame:
    """All diagnostics of a trajectory, one row per snapshot."""
    tests = default_test_functions(cfg) if tests is None else tests
    rates = traj.time_derivatives()
    cumulative = [np.abs(_weak_cumulative(traj, rates, phi)) for phi in tests]
    rows = []
    for index in range(len(traj.snapshots)):
        weak = tuple(float(series[index]) for series in cumulative)
        report = _snapshot_report(traj, index, cfg, rates, weak)
        msg = (
            f"t={report.t:g} E={report.modulated_energy:.6g} "
            f"E/eps={report.modulated_energy / cfg.eps:.6g} "
            f"hausdorff={report.interface_hausdorff:.3g}"
        )
        logger.debug(msg)
        rows.append(report.as_row())
    return pl.DataFrame(rows)

