from __future__ import annotations

import pytest

import mvac as mv

TINY_1D = """\
dim = 1
eps = 0.1
t_final = 0.005
snapshot_count = 2
solver.cells = 64
"""

TINY_2D = """\
eps = 0.125
t_final = 0.002
snapshot_count = 2
solver.cells = 32
"""


@pytest.fixture
def tiny_1d() -> mv.RunConfig:
    return mv.parse_config(TINY_1D)


@pytest.fixture
def tiny_2d() -> mv.RunConfig:
    return mv.parse_config(TINY_2D)
