"""Explicit finite-difference integration of the matrix-valued Allen-Cahn equation.

The equation `dA/dt = Lap A - eps^-2 (A A^T A - A)` is discretized with the standard
node-centered stencil on `[-L/2, L/2]^dim` and stepped with forward Euler or Heun.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING

import numpy as np
import polars as pl

from mvac.exceptions import BlowUpError
from mvac.interface import radius_at
from mvac.kinds import PolarsBoundary, PolarsScheme, parse_kind
from mvac.matgeo import potential_f, potential_grad
from mvac.stencils import boundary_mask, edge_differences, laplacian

if TYPE_CHECKING:
    import numpy.typing as npt

    from mvac.config import RunConfig
    from mvac.kinds import Boundary, Scheme
    from mvac.typing import FloatArray, MatStack, PointArray

__all__ = [
    "STEP_LOG_SCHEMA",
    "Field",
    "GridSpec",
    "TimeStepper",
    "Trajectory",
    "discrete_laplacian",
    "gl_energy",
    "max_singular_value",
    "run_simulation",
    "step",
]

logger = logging.getLogger(__name__)

MIN_CELLS = 16

STEP_LOG_SCHEMA = {
    "step": pl.Int64,
    "t": pl.Float64,
    "dt": pl.Float64,
    "max_singular_value": pl.Float64,
    "gl_energy": pl.Float64,
}


@dataclass(frozen=True)
class GridSpec:
    """Uniform node-centered grid on `[-L/2, L/2]^dim`.

    Dirichlet grids carry `cells + 1` nodes per side including both boundary nodes;
    periodic grids carry `cells` nodes per side.

    Attributes:
        dim: Spatial dimension, 1 or 2.
        cells: Number of cells per side.
        side_length: Side length `L` of the domain.
        boundary: `"dirichlet"` or `"periodic"`.
    """

    dim: int
    cells: int
    side_length: float = 2.0
    boundary: Boundary = "dirichlet"

    def __post_init__(self) -> None:
        if self.dim not in (1, 2):
            msg = f"dim must be 1 or 2, got {self.dim}"
            raise ValueError(msg)
        if self.cells < MIN_CELLS:
            msg = f"cells must be at least {MIN_CELLS}, got {self.cells}"
            raise ValueError(msg)
        if not self.side_length > 0:
            msg = f"side_length must be positive, got {self.side_length}"
            raise ValueError(msg)
        object.__setattr__(self, "boundary", parse_kind(self.boundary, PolarsBoundary, "boundary"))

    @property
    def h(self) -> float:
        return self.side_length / self.cells

    @property
    def periodic(self) -> bool:
        return self.boundary == "periodic"

    @property
    def nodes_per_side(self) -> int:
        return self.cells if self.periodic else self.cells + 1

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.nodes_per_side,) * self.dim

    @property
    def cell_volume(self) -> float:
        return self.h**self.dim

    def axis_coordinates(self) -> FloatArray:
        return -0.5 * self.side_length + np.arange(self.nodes_per_side) * self.h

    def coordinates(self) -> PointArray:
        """Node coordinates with shape `shape + (dim,)`."""
        mesh = np.meshgrid(*([self.axis_coordinates()] * self.dim), indexing="ij")
        return np.stack(mesh, axis=-1)

    def check_resolution(self, eps: float) -> None:
        """Require `h <= eps` and warn when `h > eps/2`."""
        if self.h > eps:
            msg = f"grid spacing h={self.h:.6g} does not resolve eps={eps:g}"
            raise ValueError(msg)
        if self.h > 0.5 * eps:
            msg = f"grid spacing h={self.h:.6g} exceeds eps/2={0.5 * eps:g}; layers are coarse"
            logger.warning(msg)


@dataclass(frozen=True)
class Field:
    """Matrix field sampled at the grid nodes.

    Attributes:
        grid: Grid the field lives on.
        t: Time of the field.
        values: Node values, shape `grid.shape + (n, n)`.
    """

    grid: GridSpec
    t: float
    values: MatStack

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", values)
        expected = self.grid.shape
        if values.shape[: self.grid.dim] != expected or values.ndim != self.grid.dim + 2:
            msg = f"field values of shape {values.shape} do not fit grid nodes {expected}"
            raise ValueError(msg)
        if values.shape[-1] != values.shape[-2]:
            msg = f"field values must be square matrices, got {values.shape[-2:]}"
            raise ValueError(msg)

    @property
    def n(self) -> int:
        return self.values.shape[-1]

    def with_values(self, values: MatStack, t: float | None = None) -> Field:
        return Field(self.grid, self.t if t is None else t, values)


@dataclass(frozen=True)
class TimeStepper:
    """Explicit time stepping controls.

    Attributes:
        dt_safety: Fraction of the stability bound used as time step.
        scheme: `"euler"` or `"heun"`.
    """

    dt_safety: float = 0.2
    scheme: Scheme = "euler"

    def __post_init__(self) -> None:
        if not 0 < self.dt_safety <= 1:
            msg = f"dt_safety must lie in (0, 1], got {self.dt_safety}"
            raise ValueError(msg)
        object.__setattr__(self, "scheme", parse_kind(self.scheme, PolarsScheme, "scheme"))

    def dt(self, grid: GridSpec, eps: float) -> float:
        """`dt_safety * min(h^2 / (2 dim), eps^2 / 4)`."""
        return self.dt_safety * min(grid.h**2 / (2 * grid.dim), eps**2 / 4.0)


def discrete_laplacian(f: Field) -> Field:
    """Apply the discrete Laplacian entrywise."""
    return f.with_values(laplacian(f.values, f.grid))


def _rate(values: MatStack, grid: GridSpec, eps: float) -> MatStack:
    rate = laplacian(values, grid) - potential_grad(values) / eps**2
    if not grid.periodic:
        rate[boundary_mask(grid)] = 0.0
    return rate


def _check_finite(values: MatStack, step_index: int) -> None:
    finite = np.isfinite(values)
    if not np.all(finite):
        max_norm = float(np.max(np.abs(values[finite]))) if np.any(finite) else float("nan")
        raise BlowUpError(step_index, max_norm)


def step(
    f: Field,
    ts: TimeStepper,
    eps: float,
    bc: MatStack | None = None,
    *,
    dt: float | None = None,
    step_index: int = 1,
) -> Field:
    """Advance `f` by one explicit step.

    Args:
        f: Current field.
        ts: Stepping controls.
        eps: Interface width.
        bc: Field values whose boundary nodes are imposed on Dirichlet grids. When omitted
            the current boundary values are kept.
        dt: Step size, defaults to `ts.dt(f.grid, eps)`.
        step_index: Step counter reported on blow-up.

    Raises:
        BlowUpError: If the new field has non-finite entries.
    """
    grid = f.grid
    dt = ts.dt(grid, eps) if dt is None else dt
    k1 = _rate(f.values, grid, eps)
    if ts.scheme == "heun":
        predictor = f.values + dt * k1
        k2 = _rate(predictor, grid, eps)
        values = f.values + 0.5 * dt * (k1 + k2)
    else:
        values = f.values + dt * k1
    if bc is not None and not grid.periodic:
        mask = boundary_mask(grid)
        values[mask] = np.asarray(bc)[mask]
    _check_finite(values, step_index)
    return f.with_values(values, f.t + dt)


def gl_energy(f: Field, eps: float) -> float:
    """Discrete energy `sum_edges 1/2 |dA/h|^2 h^d + eps^-2 sum_nodes F(A) h^d`.

    Its gradient with respect to the interior node values is the negative of the
    discrete right-hand side, times the cell volume.
    """
    grid = f.grid
    dirichlet = 0.0
    for axis in range(grid.dim):
        diff = edge_differences(f.values, grid, axis) / grid.h
        dirichlet += 0.5 * float(np.sum(diff * diff))
    potential = float(np.sum(np.asarray(potential_f(f.values))))
    return (dirichlet + potential / eps**2) * grid.cell_volume


def max_singular_value(f: Field | MatStack) -> float:
    values = f.values if isinstance(f, Field) else np.asarray(f)
    return float(np.max(np.linalg.norm(values, ord=2, axis=(-2, -1))))


@dataclass(frozen=True)
class Trajectory:
    """Snapshots of a run.

    Attributes:
        snapshots: Fields at the scheduled times, starting with `t = 0`.
        successors: For every snapshot, the field one regular time step later. Used for
            time derivatives; never fed back into the integration.
        step_log: One row per logged step, see `STEP_LOG_SCHEMA`.
        eps: Interface width of the run.
        dt: Regular time step of the run.
    """

    snapshots: list[Field]
    successors: list[Field]
    step_log: pl.DataFrame
    eps: float
    dt: float
    times: list[float] = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "times", [s.t for s in self.snapshots])

    def time_derivatives(self) -> list[MatStack]:
        """Forward differences between every snapshot and its successor."""
        return [
            (after.values - before.values) / (after.t - before.t)
            for before, after in zip(self.snapshots, self.successors, strict=True)
        ]


def _schedule(snapshot_times: npt.ArrayLike, t_final: float) -> list[float]:
    times = {0.0, *(float(t) for t in np.atleast_1d(snapshot_times))}
    return sorted(t for t in times if 0.0 <= t <= t_final)


def run_simulation(cfg: RunConfig, initial: Field | None = None) -> Trajectory:
    """Integrate from the initial field to `cfg.t_final`, storing scheduled snapshots.

    Args:
        cfg: Run description.
        initial: Initial field; built from the configured scenario when omitted.

    Raises:
        BlowUpError: If the integration produces non-finite values.
        ExtinctionError: If the reference sphere does not survive up to `t_final`.
    """
    if initial is None:
        from mvac.initdata import build_well_prepared

        initial = build_well_prepared(cfg)
    grid, ts, eps = initial.grid, cfg.stepper, cfg.eps
    grid.check_resolution(eps)
    radius_at(cfg.interface, cfg.t_final)
    dt = ts.dt(grid, eps)
    bc = None if grid.periodic else initial.values

    msg = (
        f"integrating {grid.dim}D n={initial.n} eps={eps:g} on {grid.cells} cells "
        f"to t={cfg.t_final:g} with dt={dt:.4g} ({ts.scheme})"
    )
    logger.info(msg)

    rows: list[tuple[int, float, float, float, float]] = []

    def record(f: Field, count: int, taken: float) -> None:
        rows.append((count, f.t, taken, max_singular_value(f), gl_energy(f, eps)))

    current = initial
    count = 0
    record(current, count, 0.0)
    snapshots: list[Field] = []
    successors: list[Field] = []
    for target in _schedule(cfg.snapshot_times, cfg.t_final):
        while target - current.t > 1e-9 * dt:
            remaining = target - current.t
            taken = remaining if remaining < dt * (1.0 + 1e-9) else dt
            count += 1
            current = step(current, ts, eps, bc, dt=taken, step_index=count)
            if count % cfg.log_every == 0:
                record(current, count, taken)
        current = replace(current, t=target)
        snapshots.append(current)
        successors.append(step(current, ts, eps, bc, dt=dt, step_index=count + 1))
        msg = f"snapshot t={target:g} after {count} steps"
        logger.debug(msg)

    step_log = pl.DataFrame(rows, schema=STEP_LOG_SCHEMA, orient="row")
    return Trajectory(snapshots, successors, step_log, eps, dt)
