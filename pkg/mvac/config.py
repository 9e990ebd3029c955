"""Run configuration: INI files with `[run]`, `[solver]`, `[interface]`, `[scenario]`,
`[diagnostics]` and `[output]` sections.

Keys written before the first section header belong to `[run]`; there, a dotted key such
as `solver.cells = 64` addresses another section.
"""

from __future__ import annotations

import configparser
import math
from contextlib import contextmanager
from dataclasses import dataclass, replace
from pathlib import Path
from typing import TYPE_CHECKING, Any

import numpy as np

from mvac.exceptions import ConfigError
from mvac.initdata import ScenarioSpec, base_reflection
from mvac.interface import SphereInterface, radius_at
from mvac.kinds import (
    PolarsBoundary,
    PolarsInterfaceKind,
    PolarsScenarioKind,
    PolarsScheme,
    parse_kind,
)
from mvac.matgeo import QuasiDistParams
from mvac.solver import GridSpec, TimeStepper

if TYPE_CHECKING:
    from collections.abc import Callable, Iterator, Mapping

    import polars as pl

__all__ = [
    "DEFAULTS",
    "RunConfig",
    "auto_cells",
    "load_config",
    "parse_config",
]

DEFAULTS: dict[str, dict[str, str]] = {
    "run": {
        "n": "2",
        "dim": "2",
        "eps": "0.04",
        "k": "5",
        "t_final": "0.02",
        "snapshot_count": "5",
        "snapshot_times": "",
        "seed": "0",
    },
    "solver": {
        "cells": "0",
        "side_length": "2.0",
        "boundary": "dirichlet",
        "scheme": "euler",
        "dt_safety": "0.2",
        "log_every": "1",
    },
    "interface": {
        "kind": "sphere",
        "center": "",
        "r0": "0.3",
        "delta_gamma": "0.1",
    },
    "scenario": {
        "kind": "constant",
        "winding": "1",
        "delta": "0.04",
        "axis": "",
        "base_angle": "0.0",
        "noise": "0.0",
    },
    "diagnostics": {
        "probe_delta": "0",
        "probe_count": "64",
    },
    "output": {
        "out_dir": "mvac-out",
        "dump_fields": "false",
    },
}
"""Every accepted key with its default, as written in a config file."""

DEFAULT_OUT_DIR = Path("mvac-out")

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def auto_cells(eps: float) -> int:
    """Default resolution `max(128, round(8 / eps))` cells per side.

    Examples:
        >>> mv.auto_cells(0.04), mv.auto_cells(0.08)
        (200, 128)
    """
    return max(128, round(8.0 / eps))


@contextmanager
def _field(name: str) -> Iterator[None]:
    """Report `ValueError`s raised in the block as invalid values of `name`."""
    try:
        yield
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc), field=name) from exc


@dataclass(frozen=True)
class RunConfig:
    """Validated description of one run.

    Attributes:
        n: Matrix dimension.
        dim: Spatial dimension.
        eps: Interface width.
        k: Smoothing exponent of the quasi-distance.
        grid: Spatial grid.
        t_final: Final time.
        snapshot_times: Times at which snapshots are stored, `0` always included.
        interface: Reference interface.
        scenario: Initial data description.
        stepper: Time stepping controls.
        probe_delta: Normal offset of the minimal-pair probes, `0` for automatic.
        probe_count: Number of interface points probed.
        seed: Seed of every random draw of the run.
        log_every: Step log stride.
        out_dir: Output directory.
        dump_fields: Write binary field dumps of the snapshots.
        auto_resolution: `grid.cells` follows `eps` when deriving sweep members.
    """

    n: int
    dim: int
    eps: float
    k: int
    grid: GridSpec
    t_final: float
    snapshot_times: tuple[float, ...]
    interface: SphereInterface
    scenario: ScenarioSpec
    stepper: TimeStepper
    probe_delta: float = 0.0
    probe_count: int = 64
    seed: int = 0
    log_every: int = 1
    out_dir: Path = DEFAULT_OUT_DIR
    dump_fields: bool = False
    auto_resolution: bool = False

    @property
    def quasi_params(self) -> QuasiDistParams:
        return QuasiDistParams(self.eps, self.k)

    @property
    def effective_probe_delta(self) -> float:
        """Configured probe offset, or `min(3 eps, R(t_final)/2)` when automatic."""
        if self.probe_delta > 0:
            return self.probe_delta
        return min(3.0 * self.eps, 0.5 * radius_at(self.interface, self.t_final))

    def with_eps(self, eps: float) -> RunConfig:
        """Same run at another interface width, re-deriving an automatic resolution.

        Raises:
            ConfigError: If the derived run is invalid.
        """
        with _field("run.eps"):
            if not eps > 0:
                msg = f"eps must be positive, got {eps}"
                raise ValueError(msg)
        grid = self.grid
        if self.auto_resolution:
            grid = replace(grid, cells=auto_cells(eps))
        cfg = replace(self, eps=eps, grid=grid)
        cfg.validate()
        return cfg

    def with_out_dir(self, out_dir: Path | str) -> RunConfig:
        return replace(self, out_dir=Path(out_dir))

    def validate(self) -> None:
        """Check the invariants tying the sections together.

        Raises:
            ConfigError: Naming the offending `section.key`.
        """
        with _field("run.eps"):
            if not self.eps > 0:
                msg = f"eps must be positive, got {self.eps}"
                raise ValueError(msg)
            _ = self.quasi_params
        with _field("run.t_final"):
            if self.t_final < 0:
                msg = f"t_final must be non-negative, got {self.t_final}"
                raise ValueError(msg)
        with _field("run.snapshot_times"):
            bad = [t for t in self.snapshot_times if not 0 <= t <= self.t_final]
            if bad:
                msg = f"snapshot times {bad} lie outside [0, {self.t_final}]"
                raise ValueError(msg)
        with _field("run.n"):
            if self.scenario.n != self.n:
                msg = f"scenario maps are {self.scenario.n}x{self.scenario.n}, expected {self.n}"
                raise ValueError(msg)
        with _field("solver.cells"):
            self.grid.check_resolution(self.eps)
        with _field("interface.r0"):
            self.interface.check_horizon(self.t_final, self.grid.side_length)
        with _field("scenario.delta"):
            self.scenario.check_interface(self.interface)
        with _field("diagnostics.probe_delta"):
            if self.probe_delta < 0:
                msg = f"probe_delta must be non-negative, got {self.probe_delta}"
                raise ValueError(msg)
            probe = self.effective_probe_delta
            reach = radius_at(self.interface, self.t_final)
            if not 2.0 * self.grid.h < probe < reach:
                msg = (
                    f"probe offset {probe:g} must lie in (2h, R(t_final)) = "
                    f"({2.0 * self.grid.h:g}, {reach:g}): probes must clear the discrete layer "
                    "and the inner probe must stay inside the sphere"
                )
                raise ValueError(msg)
        with _field("diagnostics.probe_count"):
            if self.probe_count < 1:
                msg = f"probe_count must be positive, got {self.probe_count}"
                raise ValueError(msg)
        with _field("solver.log_every"):
            if self.log_every < 1:
                msg = f"log_every must be positive, got {self.log_every}"
                raise ValueError(msg)


def _floats(value: str) -> tuple[float, ...]:
    return tuple(float(v) for v in value.split(",") if v.strip())


def _boolean(value: str) -> bool:
    lowered = value.strip().lower()
    if lowered in _TRUE:
        return True
    if lowered in _FALSE:
        return False
    msg = f"expected a boolean, got {value!r}"
    raise ValueError(msg)


def _kind(kind: pl.Enum, name: str) -> Callable[[str], str]:
    return lambda value: parse_kind(value, kind, name)


def _build(section: str, factory: Callable[[], Any]) -> Any:
    """Construct a section object, attributing a failure to the key its message starts with."""
    try:
        return factory()
    except ValueError as exc:
        key = str(exc).split(" ", 1)[0]
        name = f"{section}.{key}" if key in DEFAULTS[section] else section
        raise ConfigError(str(exc), field=name) from exc


def _sections(text: str, source: str) -> dict[str, dict[str, str]]:
    first = next(
        (s for s in (line.strip() for line in text.splitlines()) if s and not s.startswith("#")),
        "",
    )
    prefix = "" if first.startswith("[") else "[run]\n"
    shift = prefix.count("\n")

    parser = configparser.ConfigParser(
        comment_prefixes=("#",),
        inline_comment_prefixes=("#",),
        interpolation=None,
        default_section="__defaults__",
    )
    try:
        parser.read_string(prefix + text, source=source)
    except configparser.ParsingError as exc:
        lineno, line = exc.errors[0]
        msg = f"cannot parse {line.strip()!r}"
        raise ConfigError(msg, line=lineno - shift) from exc
    except (configparser.DuplicateOptionError, configparser.DuplicateSectionError) as exc:
        line = exc.lineno - shift if exc.lineno is not None else None
        raise ConfigError(exc.message, line=line) from exc
    except configparser.Error as exc:
        raise ConfigError(exc.message) from exc

    values = {section: dict(keys) for section, keys in DEFAULTS.items()}
    for section in parser.sections():
        if section not in DEFAULTS:
            msg = f"unknown section [{section}]"
            raise ConfigError(msg, field=section)
        for key, value in parser.items(section):
            target, name = section, key
            if section == "run" and "." in key:
                target, name = key.split(".", 1)
            if target not in DEFAULTS or name not in DEFAULTS[target]:
                msg = "unknown key"
                raise ConfigError(msg, field=f"{target}.{name}")
            values[target][name] = value.strip()
    return values


def _snapshot_times(run: Mapping[str, str], t_final: float) -> tuple[float, ...]:
    if run["snapshot_times"]:
        return tuple(sorted({0.0, *_floats(run["snapshot_times"])}))
    count = int(run["snapshot_count"])
    if count < 1:
        msg = f"snapshot_count must be positive, got {count}"
        raise ValueError(msg)
    return tuple(sorted({float(t) for t in np.linspace(0.0, t_final, count + 1)}))


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    """Build a validated `RunConfig` from INI text, filling in defaults.

    Raises:
        ConfigError: With the line number of a syntax error, or the `section.key` of an
            invalid value.

    Examples:
        >>> cfg = mv.parse_config("eps = 0.04")
        >>> cfg.grid.cells, cfg.snapshot_times[-1], cfg.scenario.kind
        (200, 0.02, 'constant')
    """
    v = _sections(text, source)

    def read(section: str, key: str, convert: Callable[[str], Any]) -> Any:
        with _field(f"{section}.{key}"):
            return convert(v[section][key])

    n = read("run", "n", int)
    dim = read("run", "dim", int)
    eps = read("run", "eps", float)
    t_final = read("run", "t_final", float)
    with _field("run.n"):
        if n < 2:
            msg = f"n must be at least 2, got {n}"
            raise ValueError(msg)
    with _field("run.dim"):
        if dim not in (1, 2):
            msg = f"dim must be 1 or 2, got {dim}"
            raise ValueError(msg)
    with _field("run.eps"):
        if not eps > 0:
            msg = f"eps must be positive, got {eps}"
            raise ValueError(msg)
    with _field("run.snapshot_times"):
        snapshot_times = _snapshot_times(v["run"], t_final)

    cells = read("solver", "cells", int)
    side_length = read("solver", "side_length", float)
    boundary = read("solver", "boundary", _kind(PolarsBoundary, "boundary"))
    scheme = read("solver", "scheme", _kind(PolarsScheme, "scheme"))
    dt_safety = read("solver", "dt_safety", float)
    grid = _build(
        "solver",
        lambda: GridSpec(
            dim=dim,
            cells=cells if cells > 0 else auto_cells(eps),
            side_length=side_length,
            boundary=boundary,
        ),
    )
    stepper = _build("solver", lambda: TimeStepper(dt_safety=dt_safety, scheme=scheme))

    kind = read("interface", "kind", _kind(PolarsInterfaceKind, "interface"))
    center = read("interface", "center", _floats) or (0.0,) * dim
    r0 = read("interface", "r0", float)
    delta_gamma = read("interface", "delta_gamma", float)
    interface = _build(
        "interface",
        lambda: SphereInterface(
            dim=dim, center=center, r0=r0, delta_gamma=delta_gamma, flat=kind == "flat"
        ),
    )

    scenario_kind = read("scenario", "kind", _kind(PolarsScenarioKind, "scenario"))
    axis = read("scenario", "axis", _floats) or (1.0,) + (0.0,) * (n - 1)
    angle = read("scenario", "base_angle", float)
    winding = read("scenario", "winding", int)
    delta = read("scenario", "delta", float)
    noise = read("scenario", "noise", float)
    with _field("scenario.axis"):
        norm = math.hypot(*axis)
        if norm == 0:
            msg = "axis must be nonzero"
            raise ValueError(msg)
    scenario = _build(
        "scenario",
        lambda: ScenarioSpec(
            kind=scenario_kind,
            a_minus_base=base_reflection(n, angle),
            axis=np.asarray(axis) / norm,
            winding=winding,
            delta=delta,
            noise=noise,
        ),
    )

    cfg = RunConfig(
        n=n,
        dim=dim,
        eps=eps,
        k=read("run", "k", int),
        grid=grid,
        t_final=t_final,
        snapshot_times=snapshot_times,
        interface=interface,
        scenario=scenario,
        stepper=stepper,
        probe_delta=read("diagnostics", "probe_delta", float),
        probe_count=read("diagnostics", "probe_count", int),
        seed=read("run", "seed", int),
        log_every=read("solver", "log_every", int),
        out_dir=Path(v["output"]["out_dir"]),
        dump_fields=read("output", "dump_fields", _boolean),
        auto_resolution=cells <= 0,
    )
    cfg.validate()
    return cfg


def load_config(path: Path | str) -> RunConfig:
    """Read and validate a configuration file.

    Raises:
        ConfigError: If the file cannot be read, parsed or validated.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        msg = f"cannot read {path}: {exc.strerror}"
        raise ConfigError(msg) from exc
    return parse_config(text, source=str(path))
