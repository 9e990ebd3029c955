from __future__ import annotations

from typing import Literal, TypeAlias, get_args

import polars as pl

__all__ = [
    "Boundary",
    "InterfaceKind",
    "PolarsBoundary",
    "PolarsInterfaceKind",
    "PolarsScenarioKind",
    "PolarsScheme",
    "ScenarioKind",
    "Scheme",
    "parse_kind",
]

Boundary: TypeAlias = Literal["dirichlet", "periodic"]
Scheme: TypeAlias = Literal["euler", "heun"]
ScenarioKind: TypeAlias = Literal["constant", "rotating_axis"]
InterfaceKind: TypeAlias = Literal["sphere", "flat"]

PolarsBoundary = pl.Enum(get_args(Boundary))
PolarsScheme = pl.Enum(get_args(Scheme))
PolarsScenarioKind = pl.Enum(get_args(ScenarioKind))
PolarsInterfaceKind = pl.Enum(get_args(InterfaceKind))


def parse_kind(value: str, kind: pl.Enum, name: str) -> str:
    """Normalize `value` and check it against the categories of `kind`.

    Examples:
        >>> from mvac.kinds import PolarsScheme, parse_kind
        >>> parse_kind(" Heun ", PolarsScheme, "scheme")
        'heun'
        >>> parse_kind("rk4", PolarsScheme, "scheme")
        Traceback (most recent call last):
        ...
        ValueError: invalid scheme 'rk4', expected one of ['euler', 'heun']
    """
    normalized = value.strip().lower().replace("-", "_")
    categories = kind.categories.to_list()
    if normalized not in categories:
        msg = f"invalid {name} {value!r}, expected one of {categories}"
        raise ValueError(msg)
    return normalized
