"""Binary snapshot dumps of matrix fields.

Layout, all little-endian: a 16-byte magic (`MVACFLD1` padded with NUL bytes), `u32 dim`,
`u32 n`, one `u32` node count per spatial axis, `f64 t`, `f64 h`, then the node values as
`f64` in node-major, row-major order.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np

from mvac.solver import Field, GridSpec

if TYPE_CHECKING:
    from mvac.kinds import Boundary

__all__ = [
    "FIELD_MAGIC",
    "read_field_dump",
    "write_field_dump",
]

FIELD_MAGIC = b"MVACFLD1".ljust(16, b"\0")

_U32 = np.dtype("<u4")
_F64 = np.dtype("<f8")


def write_field_dump(f: Field, path: Path | str) -> Path:
    """Write `f` to `path` and return the path."""
    path = Path(path)
    grid = f.grid
    header = np.array([grid.dim, f.n, *grid.shape], dtype=_U32).tobytes()
    stamps = np.array([f.t, grid.h], dtype=_F64).tobytes()
    path.write_bytes(FIELD_MAGIC + header + stamps + f.values.astype(_F64).tobytes())
    return path


def read_field_dump(
    path: Path | str, boundary: Boundary = "dirichlet", side_length: float | None = None
) -> Field:
    """Read a dump written by `write_field_dump`.

    The dump does not record the boundary condition, so it is given by the caller; the side
    length defaults to the one implied by the stored spacing.

    Raises:
        ValueError: If the file is not a field dump or its size does not match the header.
    """
    raw = Path(path).read_bytes()
    if raw[:16] != FIELD_MAGIC:
        msg = f"{path} is not a field dump (bad magic {raw[:8]!r})"
        raise ValueError(msg)
    offset = 16
    dim, n = (int(v) for v in np.frombuffer(raw, dtype=_U32, count=2, offset=offset))
    offset += 2 * _U32.itemsize
    if dim not in (1, 2):
        msg = f"{path}: unsupported spatial dimension {dim}"
        raise ValueError(msg)
    shape = tuple(int(v) for v in np.frombuffer(raw, dtype=_U32, count=dim, offset=offset))
    offset += dim * _U32.itemsize
    t, h = (float(v) for v in np.frombuffer(raw, dtype=_F64, count=2, offset=offset))
    offset += 2 * _F64.itemsize

    count = math.prod(shape) * n * n
    if len(raw) - offset != count * _F64.itemsize:
        held = len(raw) - offset
        msg = f"{path}: expected {count} values after the header, file holds {held} bytes"
        raise ValueError(msg)
    values = np.frombuffer(raw, dtype=_F64, count=count, offset=offset).reshape(*shape, n, n)

    cells = shape[0] if boundary == "periodic" else shape[0] - 1
    grid = GridSpec(
        dim=dim,
        cells=cells,
        side_length=cells * h if side_length is None else side_length,
        boundary=boundary,
    )
    return Field(grid, t, values.astype(np.float64))
