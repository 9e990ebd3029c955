"""Finite-difference stencils on node-centered uniform grids.

The first `grid.dim` axes of an array are spatial; trailing axes (matrix entries, vector
components) are carried along untouched.
"""

from __future__ import annotations

from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:
    import numpy.typing as npt

    from mvac.solver import GridSpec
    from mvac.typing import FloatArray, PointArray

__all__ = [
    "boundary_mask",
    "cell_average",
    "cell_centers",
    "cell_gradient",
    "central_gradient",
    "edge_differences",
    "laplacian",
]


def boundary_mask(grid: GridSpec) -> npt.NDArray[np.bool_]:
    """Nodes carrying Dirichlet data; all False on periodic grids."""
    mask = np.zeros(grid.shape, dtype=bool)
    if grid.periodic:
        return mask
    for axis in range(grid.dim):
        index = [slice(None)] * grid.dim
        index[axis] = 0
        mask[tuple(index)] = True
        index[axis] = -1
        mask[tuple(index)] = True
    return mask


def laplacian(values: npt.ArrayLike, grid: GridSpec) -> FloatArray:
    """3-point (1D) or 5-point (2D) Laplacian; zero on Dirichlet boundary nodes."""
    v = np.asarray(values, dtype=np.float64)
    h2 = grid.h**2
    if grid.periodic:
        out = np.zeros_like(v)
        for axis in range(grid.dim):
            out += np.roll(v, 1, axis=axis) + np.roll(v, -1, axis=axis) - 2.0 * v
        return out / h2
    out = np.zeros_like(v)
    for axis in range(grid.dim):
        index = [slice(None)] * v.ndim
        index[axis] = slice(1, -1)
        out[tuple(index)] += np.diff(v, n=2, axis=axis)
    out[boundary_mask(grid)] = 0.0
    return out / h2


def edge_differences(values: npt.ArrayLike, grid: GridSpec, axis: int) -> FloatArray:
    """Differences between neighboring nodes along `axis`, one per grid edge."""
    v = np.asarray(values, dtype=np.float64)
    if grid.periodic:
        return np.roll(v, -1, axis=axis) - v
    return np.diff(v, axis=axis)


def _pair(v: FloatArray, axis: int, periodic: bool) -> tuple[FloatArray, FloatArray]:
    if periodic:
        return v, np.roll(v, -1, axis=axis)
    lower = [slice(None)] * v.ndim
    upper = [slice(None)] * v.ndim
    lower[axis] = slice(None, -1)
    upper[axis] = slice(1, None)
    return v[tuple(lower)], v[tuple(upper)]


def cell_average(values: npt.ArrayLike, grid: GridSpec) -> FloatArray:
    """Mean of the corner values of every cell."""
    out = np.asarray(values, dtype=np.float64)
    for axis in range(grid.dim):
        lower, upper = _pair(out, axis, grid.periodic)
        out = 0.5 * (lower + upper)
    return out


def cell_gradient(values: npt.ArrayLike, grid: GridSpec) -> FloatArray:
    """Gradient at cell centers, stacked along a new leading axis of length `dim`.

    Component `i` is the mean over the cell edges parallel to axis `i` of the edge
    difference quotients, which is a central difference at the cell center.
    """
    v = np.asarray(values, dtype=np.float64)
    components = []
    for i in range(grid.dim):
        out = v
        for axis in range(grid.dim):
            lower, upper = _pair(out, axis, grid.periodic)
            out = (upper - lower) / grid.h if axis == i else 0.5 * (lower + upper)
        components.append(out)
    return np.stack(components)


def cell_centers(grid: GridSpec) -> PointArray:
    """Coordinates of the cell centers, shape `(cells,) * dim + (dim,)`."""
    axis = -0.5 * grid.side_length + (np.arange(grid.cells) + 0.5) * grid.h
    mesh = np.meshgrid(*([axis] * grid.dim), indexing="ij")
    return np.stack(mesh, axis=-1)


def central_gradient(
    values: npt.ArrayLike, grid: GridSpec
) -> tuple[FloatArray, npt.NDArray[np.bool_]]:
    """Central-difference gradient at the nodes and the mask of nodes where it is valid.

    The gradient is stacked along a new leading axis of length `dim`; on Dirichlet grids
    the boundary nodes are set to zero and excluded from the mask.
    """
    v = np.asarray(values, dtype=np.float64)
    components = [
        (np.roll(v, -1, axis=axis) - np.roll(v, 1, axis=axis)) / (2.0 * grid.h)
        for axis in range(grid.dim)
    ]
    grad = np.stack(components)
    valid = ~boundary_mask(grid)
    grad[:, ~valid] = 0.0
    return grad, valid
