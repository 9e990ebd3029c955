"""Invariant suites run by `mvac selftest`.

Each suite draws its samples from a seeded generator, evaluates the worst violation of one
identity or inequality, and compares it with a tolerance.
"""

from __future__ import annotations

import io
import logging
import math
from dataclasses import asdict, dataclass
from typing import TYPE_CHECKING

import numpy as np
import polars as pl
from scipy.optimize import minimize_scalar

from mvac.config import parse_config
from mvac.diagnostics import (
    coercivity_check,
    energy_reports,
    modulated_energy,
    orthogonality_defect,
)
from mvac.initdata import base_reflection, build_well_prepared
from mvac.matgeo import (
    SURFACE_TENSION,
    QuasiDistParams,
    commutator,
    dist_to_component,
    frob_norm,
    potential_f,
    quasi_distance_grad,
    quasi_potential,
)
from mvac.profile1d import (
    OrbitSpec,
    equipartition_deviation,
    minimal_orbit,
    ode_residual,
    orbit_energy,
    sample_orbit,
    surface_tension,
)
from mvac.solver import Field, GridSpec, TimeStepper, run_simulation, step
from mvac.stencils import cell_gradient

if TYPE_CHECKING:
    from collections.abc import Callable

    from mvac.config import RunConfig
    from mvac.typing import FloatArray, MatStack

__all__ = [
    "SELFTEST_SCHEMA",
    "SUITES",
    "SuiteResult",
    "run_selftest",
    "standing_wave_drift",
]

logger = logging.getLogger(__name__)

SELFTEST_SCHEMA = {
    "suite": pl.String,
    "samples": pl.Int64,
    "worst": pl.Float64,
    "tolerance": pl.Float64,
    "passed": pl.Boolean,
}

SAMPLE_COUNT = 10_000
ORACLE_SAMPLES = 1_000
ORACLE_ANGLES = 2048
SWEEP_EPS = (0.08, 0.04, 0.02)
SPREAD_TOL = 3.0

WELL_PREPARED_TUBE = 1.025
"""Tube width `delta_gamma` of the well-prepared suite in units of `sqrt(eps)`."""
WELL_PREPARED_LAYER = 0.49
"""Gluing half-width `delta` in units of `delta_gamma`."""
WELL_PREPARED_HORIZON = 1e-5


@dataclass(frozen=True)
class SuiteResult:
    """Outcome of one suite; `worst` is compared with `tolerance` by `<=`."""

    suite: str
    samples: int
    worst: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(self.worst <= self.tolerance)

    def as_row(self) -> dict[str, object]:
        return {**asdict(self), "passed": self.passed}


def _random_matrices(rng: np.random.Generator, count: int, scale: float = 2.0) -> list[MatStack]:
    half = count // 2
    return [
        rng.uniform(-scale, scale, size=(half, 2, 2)),
        rng.uniform(-scale, scale, size=(count - half, 3, 3)),
    ]


def commutator_law(rng: np.random.Generator, count: int = SAMPLE_COUNT) -> SuiteResult:
    p = QuasiDistParams(0.04)
    worst = 0.0
    for a in _random_matrices(rng, count):
        defect = np.asarray(frob_norm(commutator(quasi_distance_grad(a, p), a)))
        worst = max(worst, float(np.max(defect / (1.0 + np.asarray(frob_norm(a)) ** 2))))
    return SuiteResult("commutator_law", count, worst, 1e-8)


def _profile_lower_bound(a: MatStack) -> FloatArray:
    """`1/4 (2 - rho)^2 rho^2` at the distance `rho` to the orthogonal group."""
    rho = np.minimum(
        np.asarray(dist_to_component(a, 1)), np.asarray(dist_to_component(a, -1))
    )
    return 0.25 * (2.0 - rho) ** 2 * rho**2


def quasi_potential_bound(rng: np.random.Generator, count: int = SAMPLE_COUNT) -> SuiteResult:
    """Worst violation of `1/4 (2 - rho)^2 rho^2 <= F` and of `F~ <= F`."""
    worst = -math.inf
    for a in _random_matrices(rng, count):
        f = np.asarray(potential_f(a))
        excess = np.maximum(np.asarray(quasi_potential(a)) - f, _profile_lower_bound(a) - f)
        worst = max(worst, float(np.max(excess)))
    return SuiteResult("quasi_potential_bound", count, worst, 1e-10)


def differential_inequality(rng: np.random.Generator, count: int = SAMPLE_COUNT) -> SuiteResult:
    worst = -math.inf
    for eps in SWEEP_EPS:
        p = QuasiDistParams(eps)
        for a in _random_matrices(rng, count, scale=3.0):
            a = a * np.minimum(1.0, 3.0 / np.asarray(frob_norm(a)))[..., None, None]
            slope = np.asarray(frob_norm(quasi_distance_grad(a, p)))
            bound = np.sqrt(2.0 * np.asarray(potential_f(a)) + eps**4)
            worst = max(worst, float(np.max(slope - bound)))
    return SuiteResult("differential_inequality", count * len(SWEEP_EPS), worst, 1e-9)


def _brute_force_distance(a: MatStack, sign: int) -> float:
    def distance(angle: float) -> float:
        c, s = math.cos(angle), math.sin(angle)
        q = np.array([[c, -s], [s, c]]) if sign > 0 else np.array([[c, s], [s, -c]])
        return float(np.linalg.norm(a - q))

    angles = np.linspace(0.0, 2.0 * math.pi, ORACLE_ANGLES, endpoint=False)
    start = angles[int(np.argmin([distance(x) for x in angles]))]
    spacing = angles[1]
    result = minimize_scalar(
        distance,
        bounds=(start - spacing, start + spacing),
        method="bounded",
        options={"xatol": 1e-12},
    )
    return float(result.fun)


def distance_oracle(rng: np.random.Generator, count: int = ORACLE_SAMPLES) -> SuiteResult:
    a = rng.uniform(-2.0, 2.0, size=(count, 2, 2))
    worst = 0.0
    for sign in (1, -1):
        closed = np.asarray(dist_to_component(a, sign))
        brute = np.array([_brute_force_distance(m, sign) for m in a])
        worst = max(worst, float(np.max(np.abs(closed - brute))))
    return SuiteResult("distance_oracle", 2 * count, worst, 1e-6)


def _orbit_spec() -> OrbitSpec:
    return OrbitSpec.from_reflection(base_reflection(2), [1.0, 0.0])


def orbit_energies(rng: np.random.Generator) -> list[SuiteResult]:
    del rng
    spec = _orbit_spec()
    z = np.linspace(-20.0, 20.0, 40_001)
    energy = orbit_energy(sample_orbit(spec, z))
    coarse = ode_residual(spec, np.linspace(-20.0, 20.0, 8_001))
    fine = ode_residual(spec, np.linspace(-20.0, 20.0, 16_001))
    return [
        SuiteResult("surface_tension", 1, abs(surface_tension() - SURFACE_TENSION), 1e-9),
        SuiteResult("orbit_energy", z.size, abs(energy - SURFACE_TENSION), 1e-6),
        SuiteResult("equipartition", z.size, equipartition_deviation(spec, z), 1e-10),
        SuiteResult("ode_residual_order", 2, abs(coarse / fine - 4.0), 0.5),
    ]


def standing_wave_drift(eps: float, cells: int, t_final: float) -> float:
    """L2 distance travelled by the exact 1D standing wave under the discrete flow."""
    grid = GridSpec(dim=1, cells=cells, side_length=2.0)
    x = grid.coordinates()[..., 0]
    initial = Field(grid, 0.0, minimal_orbit(_orbit_spec(), x / eps))
    ts = TimeStepper()
    dt = ts.dt(grid, eps)
    current = initial
    count = 0
    while t_final - current.t > 1e-12:
        count += 1
        current = step(
            current, ts, eps, initial.values, dt=min(dt, t_final - current.t), step_index=count
        )
    diff = current.values - initial.values
    return math.sqrt(float(np.sum(diff * diff)) * grid.cell_volume)


def standing_wave(rng: np.random.Generator) -> SuiteResult:
    del rng
    ratio = standing_wave_drift(0.05, 128, 0.1) / standing_wave_drift(0.05, 256, 0.1)
    return SuiteResult("standing_wave_order", 2, abs(ratio - 4.0), 1.0)


def _well_prepared_config(kind: str, eps: float) -> str:
    # delta_gamma ~ sqrt(eps) keeps the cutoff share of E/eps independent of eps
    tube = WELL_PREPARED_TUBE * math.sqrt(eps)
    return f"""
eps = {eps!r}
t_final = {WELL_PREPARED_HORIZON!r}
snapshot_count = 1
[interface]
r0 = 0.3
delta_gamma = {tube!r}
[scenario]
kind = {kind}
delta = {WELL_PREPARED_LAYER * tube!r}
"""


def well_prepared(rng: np.random.Generator) -> list[SuiteResult]:
    """Checks of the initial data over the whole sweep, for both scenarios.

    The `E/eps` spread is the ratio of the largest to the smallest value within one
    scenario.
    """
    del rng
    potential, coercivity, orthogonality, positivity = 0.0, -math.inf, 0.0, -math.inf
    ratios: dict[str, list[float]] = {"constant": [], "rotating_axis": []}
    count = 0
    for kind, values in ratios.items():
        for eps in SWEEP_EPS:
            cfg = parse_config(_well_prepared_config(kind, eps))
            f = build_well_prepared(cfg)
            p = cfg.quasi_params
            count += f.values[..., 0, 0].size
            gap = np.asarray(potential_f(f.values)) - np.asarray(quasi_potential(f.values))
            potential = max(potential, float(np.max(np.abs(gap))))
            energy = modulated_energy(f, cfg.interface, p)
            coerc = coercivity_check(f, cfg.interface, p)
            scale = 1.0 + energy.potential
            positivity = max(positivity, -energy.modulated_energy / scale)
            coercivity = max(coercivity, (coerc.lhs2 - 2.0 * coerc.rhs) / scale)
            gradient = cell_gradient(f.values, f.grid)
            grad_scale = 1.0 + float(np.max(np.einsum("i...jk,i...jk->...", gradient, gradient)))
            orthogonality = max(orthogonality, orthogonality_defect(f, p) / grad_scale)
            values.append(energy.modulated_energy / eps)
        msg = f"well-prepared E/eps of the {kind} scenario over eps={SWEEP_EPS}: {values}"
        logger.info(msg)
    return [
        SuiteResult("well_prepared_potential", count, potential, 1e-10),
        SuiteResult("well_prepared_nonnegative", count, positivity, 1e-3),
        SuiteResult("well_prepared_coercivity", count, coercivity, 1e-3),
        SuiteResult("well_prepared_orthogonality", count, orthogonality, 1e-10),
        *(
            SuiteResult(f"well_prepared_spread_{kind}", len(values), _spread(values), SPREAD_TOL)
            for kind, values in ratios.items()
        ),
    ]


def _spread(values: list[float]) -> float:
    return max(values) / min(values) if min(values) > 0 else math.inf


DETERMINISM_RUN = """
dim = 1
eps = 0.1
t_final = 0.005
snapshot_count = 2
[solver]
cells = 64
[interface]
r0 = 0.4
"""


def _run_csv(cfg: RunConfig) -> tuple[bytes, int]:
    """CSV bytes of the diagnostics and step log of one run, and their row count."""
    traj = run_simulation(cfg)
    reports = energy_reports(traj, cfg)
    out = io.StringIO()
    reports.mvac.write_csv(out)
    traj.step_log.mvac.write_csv(out)
    return out.getvalue().encode(), reports.height + traj.step_log.height


def determinism(rng: np.random.Generator) -> SuiteResult:
    """Two runs of one config must write byte-identical CSV files."""
    del rng
    first, rows = _run_csv(parse_config(DETERMINISM_RUN))
    second, _ = _run_csv(parse_config(DETERMINISM_RUN))
    return SuiteResult("determinism", rows, 0.0 if first == second else 1.0, 0.0)


SUITES: dict[str, Callable[[np.random.Generator], SuiteResult | list[SuiteResult]]] = {
    "commutator_law": commutator_law,
    "quasi_potential_bound": quasi_potential_bound,
    "differential_inequality": differential_inequality,
    "distance_oracle": distance_oracle,
    "orbit": orbit_energies,
    "standing_wave": standing_wave,
    "well_prepared": well_prepared,
    "determinism": determinism,
}
"""Suites by name; a suite returns one result or several."""


def run_selftest(names: list[str] | None = None, seed: int = 0) -> pl.DataFrame:
    """Run the named suites, all by default, and tabulate their results.

    Raises:
        ValueError: If a suite name is unknown.
    """
    names = list(SUITES) if names is None else names
    unknown = sorted(set(names) - set(SUITES))
    if unknown:
        msg = f"unknown selftest suites {unknown}, expected some of {list(SUITES)}"
        raise ValueError(msg)
    rows = []
    for name in names:
        outcome = SUITES[name](np.random.default_rng(seed))
        for result in outcome if isinstance(outcome, list) else [outcome]:
            level = logging.INFO if result.passed else logging.WARNING
            msg = f"{result.suite}: worst {result.worst:.3g} (tolerance {result.tolerance:.3g})"
            logger.log(level, msg)
            rows.append(result.as_row())
    return pl.DataFrame(rows, schema=SELFTEST_SCHEMA)
