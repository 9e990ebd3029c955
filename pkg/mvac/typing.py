from __future__ import annotations

from typing import Literal, TypeAlias

import numpy as np
import numpy.typing as npt

__all__ = [
    "FloatArray",
    "IntoSign",
    "Mat",
    "MatStack",
    "PointArray",
    "Sign",
]

FloatArray: TypeAlias = npt.NDArray[np.float64]
"""Array of real scalars, typically one value per grid node or per sample."""

Mat: TypeAlias = npt.NDArray[np.float64]
"""Dense `n x n` real matrix."""

MatStack: TypeAlias = npt.NDArray[np.float64]
"""Stack of matrices with shape `(..., n, n)`; every matrix operation broadcasts over it."""

PointArray: TypeAlias = npt.NDArray[np.float64]
"""Points in physical space with shape `(..., dim)`."""

Sign: TypeAlias = Literal[-1, 1]
"""Orthogonal component selector: `+1` for O(n)+, `-1` for O(n)-."""

IntoSign: TypeAlias = Literal[-1, 0, 1]
"""Component selector where `0` means unconstrained."""
