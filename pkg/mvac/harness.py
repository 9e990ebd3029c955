"""Experiment orchestration behind the `mvac` subcommands.

Every command returns a process exit code; tables go either to files under the
configured output directory or to a text stream, always through `df.mvac.write_csv`.
"""

from __future__ import annotations

import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np
import polars as pl

import mvac.reports  # noqa: F401
from mvac.diagnostics import energy_reports
from mvac.exceptions import ConfigError
from mvac.fieldio import write_field_dump
from mvac.interface import geometric_residuals
from mvac.profile1d import (
    ORBIT_HALF_WIDTH,
    OrbitSpec,
    equipartition_deviation,
    line_modulated_energy,
    ode_residual,
    orbit_energy,
    sample_orbit,
    surface_tension,
)
from mvac.selftest import run_selftest
from mvac.solver import run_simulation

if TYPE_CHECKING:
    from collections.abc import Sequence
    from typing import IO

    from mvac.config import RunConfig
    from mvac.solver import Trajectory

__all__ = [
    "SELFTEST_FAILED",
    "SWEEP_COLUMNS",
    "cmd_orbit",
    "cmd_selftest",
    "cmd_simulate",
    "cmd_sweep",
    "cmd_verify_geometry",
    "simulate",
    "sweep_summary",
    "worker_count",
]

logger = logging.getLogger(__name__)

SELFTEST_FAILED = 3
THREADS_ENV = "MVAC_THREADS"
ORBIT_SPACING = 1e-3

SWEEP_COLUMNS = [
    "eps",
    "sup_E_over_eps",
    "final_hausdorff",
    "final_minpair_defect",
    "weak_res_max",
]


def worker_count() -> int:
    """Sweep worker processes allowed by `MVAC_THREADS`, 1 when unset.

    Raises:
        ConfigError: If the variable is not a positive integer.
    """
    raw = os.environ.get(THREADS_ENV, "").strip()
    if not raw:
        return 1
    try:
        count = int(raw)
    except ValueError:
        count = 0
    if count < 1:
        msg = f"{THREADS_ENV} must be a positive integer, got {raw!r}"
        raise ConfigError(msg, field=THREADS_ENV)
    return count


def simulate(cfg: RunConfig) -> tuple[Trajectory, pl.DataFrame]:
    """Run one trajectory and compute its per-snapshot diagnostics."""
    traj = run_simulation(cfg)
    return traj, energy_reports(traj, cfg)


def _write_run(cfg: RunConfig, traj: Trajectory, reports: pl.DataFrame) -> Path:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    reports.mvac.write_csv(out / "diagnostics.csv")
    traj.step_log.mvac.write_csv(out / "steps.csv")
    reports.mvac.write_plot_script(
        out / "diagnostics.vl.json",
        "t",
        ["E_mod", "dirichlet", "potential", "coupling"],
        title=f"modulated energy, eps={cfg.eps:g}",
    )
    if cfg.dump_fields:
        fields = out / "fields"
        fields.mkdir(exist_ok=True)
        for index, snapshot in enumerate(traj.snapshots):
            write_field_dump(snapshot, fields / f"snapshot_{index:04d}.mvf")
    msg = f"wrote {reports.height} diagnostic rows to {out}"
    logger.info(msg)
    return out


def cmd_simulate(cfg: RunConfig) -> int:
    """Run `cfg`, writing diagnostics, the step log, a plot script and optional dumps."""
    traj, reports = simulate(cfg)
    _write_run(cfg, traj, reports)
    return 0


def sweep_summary(eps: float, reports: pl.DataFrame) -> dict[str, float]:
    """Condense the diagnostics of one sweep member into a row of `SWEEP_COLUMNS`.

    Examples:
        >>> reports = pl.DataFrame({
        ...     "E_mod": [0.02, 0.03],
        ...     "hausdorff": [0.01, 0.02],
        ...     "minpair_defect": [0.0, 0.001],
        ...     "weak_res_1": [0.0, -0.5],
        ...     "weak_res_2": [0.0, 0.25],
        ... })
        >>> mv.sweep_summary(0.1, reports)["weak_res_max"]
        0.5
    """
    final = reports.row(-1, named=True)
    weak = [abs(v) for k, v in final.items() if k.startswith("weak_res_")]
    return {
        "eps": eps,
        "sup_E_over_eps": float(reports["E_mod"].max()) / eps,
        "final_hausdorff": final["hausdorff"],
        "final_minpair_defect": final["minpair_defect"],
        "weak_res_max": float(np.nanmax(weak)) if weak else float("nan"),
    }


def _sweep_member(cfg: RunConfig) -> dict[str, float]:
    traj, reports = simulate(cfg)
    _write_run(cfg, traj, reports)
    return sweep_summary(cfg.eps, reports)


def cmd_sweep(cfg: RunConfig, eps_list: Sequence[float]) -> int:
    """Repeat `cfg` for every width in `eps_list` and summarize the runs.

    Each member writes its own outputs to `out_dir/eps_<eps>`; the summary goes to
    `out_dir/sweep.csv` with a plot script next to it.

    Raises:
        ConfigError: If `eps_list` is empty or a member configuration is invalid.
    """
    if not eps_list:
        msg = "the sweep needs at least one eps"
        raise ConfigError(msg, field="eps")
    out = Path(cfg.out_dir)
    members = [cfg.with_eps(eps).with_out_dir(out / f"eps_{eps:g}") for eps in eps_list]
    workers = min(worker_count(), len(members))
    msg = f"sweeping eps={list(eps_list)} with {workers} worker(s)"
    logger.info(msg)
    if workers == 1:
        rows = [_sweep_member(member) for member in members]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_member, members))
    summary = pl.DataFrame(rows, schema=dict.fromkeys(SWEEP_COLUMNS, pl.Float64))
    out.mkdir(parents=True, exist_ok=True)
    summary.mvac.write_csv(out / "sweep.csv")
    summary.mvac.write_plot_script(
        out / "sweep.vl.json", "eps", SWEEP_COLUMNS[1:], title="eps sweep"
    )
    return 0


def cmd_orbit(cfg: RunConfig, out: IO[str] | None = None) -> int:
    """Print the energetics of the connecting orbit between the configured base maps."""
    spec = OrbitSpec.from_reflection(cfg.scenario.a_minus_base, cfg.scenario.axis)
    count = round(2.0 * ORBIT_HALF_WIDTH / ORBIT_SPACING) + 1
    z = np.linspace(-ORBIT_HALF_WIDTH, ORBIT_HALF_WIDTH, count)
    coarse = np.linspace(-ORBIT_HALF_WIDTH, ORBIT_HALF_WIDTH, (count - 1) // 8 + 1)
    fine = np.linspace(-ORBIT_HALF_WIDTH, ORBIT_HALF_WIDTH, (count - 1) // 4 + 1)
    residual = ode_residual(spec, fine)
    row = {
        "orbit_energy": orbit_energy(sample_orbit(spec, z)),
        "surface_tension": surface_tension(),
        "ode_residual": residual,
        "ode_residual_ratio": ode_residual(spec, coarse) / residual,
        "equipartition_deviation": equipartition_deviation(spec, z),
        "line_modulated_energy": line_modulated_energy(
            sample_orbit(spec, cfg.eps * z, width=cfg.eps), cfg.eps
        ),
    }
    pl.DataFrame([row]).mvac.write_csv(sys.stdout if out is None else out)
    return 0


def cmd_verify_geometry(cfg: RunConfig, out: IO[str] | None = None) -> int:
    """Print the extended-field residuals of the reference interface at the snapshot times."""
    rows = [geometric_residuals(cfg.interface, t, cfg.grid).as_row() for t in cfg.snapshot_times]
    pl.DataFrame(rows).mvac.write_csv(sys.stdout if out is None else out)
    return 0


def cmd_selftest(out: IO[str] | None = None, names: list[str] | None = None) -> int:
    """Run the invariant suites and print their table; nonzero when any suite fails."""
    table = run_selftest(names)
    table.mvac.write_csv(sys.stdout if out is None else out)
    failed = table.filter(~pl.col("passed"))["suite"].to_list()
    if failed:
        msg = f"selftest failures: {failed}"
        logger.error(msg)
        return SELFTEST_FAILED
    return 0
