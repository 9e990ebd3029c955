"""Small dense matrix geometry around the orthogonal group.

Every function accepts either one `n x n` matrix or a stack of matrices with shape
`(..., n, n)`; scalar-valued functions then return a `float` or an array with the stack
shape respectively.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, overload

import numpy as np
from scipy.integrate import quad

from mvac.exceptions import DegenerateProjectionError, SvdConvergenceError

if TYPE_CHECKING:
    import numpy.typing as npt

    from mvac.typing import FloatArray, IntoSign, MatStack, Sign

__all__ = [
    "SMOOTHING_ERROR_CONSTANT",
    "SURFACE_TENSION",
    "QuasiDistParams",
    "SvdResult",
    "commutator",
    "dist_to_component",
    "frob_inner",
    "frob_norm",
    "nearest_orthogonal",
    "nearest_orthogonal_flags",
    "potential_f",
    "potential_grad",
    "project_pi",
    "quasi_distance",
    "quasi_distance_grad",
    "quasi_distance_grad_flags",
    "quasi_distance_smoothed",
    "quasi_potential",
    "quasi_potential_antiderivative",
    "quasi_potential_profile",
    "regularized_potential",
    "svd",
]

SQRT2 = math.sqrt(2.0)

SURFACE_TENSION = 2.0 * SQRT2 / 3.0
"""Energy of a minimal connecting orbit, `2 * int_0^1 sqrt(2 f(rho)) d rho`."""

SINGULAR_TOL = 1e-14
DEGENERACY_TOL = 1e-10
PROJECTION_TOL = 1e-12
ZERO_DIRECTION_TOL = 1e-12


def _bump(y: npt.ArrayLike) -> FloatArray:
    y = np.asarray(y, dtype=np.float64)
    out = np.zeros_like(y)
    inside = np.abs(y) < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - y[inside] ** 2))
    return out


_THETA_MASS = quad(lambda y: float(_bump(y)), -1.0, 1.0)[0]
_THETA_FIRST_MOMENT = quad(lambda y: abs(y) * float(_bump(y)), -1.0, 1.0)[0] / _THETA_MASS

SMOOTHING_ERROR_CONSTANT = (1.0 + _THETA_FIRST_MOMENT) / SQRT2
"""Constant `c` in `|d_smoothed - d| <= c * w` for smoothing width `w`."""

_nodes, _gauss_weights = np.polynomial.legendre.leggauss(64)
_THETA_NODES: FloatArray = _nodes
_THETA_WEIGHTS: FloatArray = _gauss_weights * _bump(_nodes) / _THETA_MASS
_THETA_WEIGHTS /= _THETA_WEIGHTS.sum()


def _as_matrix(a: npt.ArrayLike) -> MatStack:
    arr = np.asarray(a, dtype=np.float64)
    if arr.ndim < 2 or arr.shape[-1] != arr.shape[-2]:
        msg = f"expected a square matrix or a stack of square matrices, got shape {arr.shape}"
        raise ValueError(msg)
    return arr


def _transpose(a: MatStack) -> MatStack:
    return np.swapaxes(a, -1, -2)


@overload
def _squeeze(x: float) -> float: ...


@overload
def _squeeze(x: FloatArray) -> float | FloatArray: ...


def _squeeze(x: float | FloatArray) -> float | FloatArray:
    if np.ndim(x) == 0:
        return float(x)
    return x


def frob_inner(a: npt.ArrayLike, b: npt.ArrayLike) -> float | FloatArray:
    """Frobenius inner product `a : b`."""
    return _squeeze(np.einsum("...ij,...ij->...", _as_matrix(a), _as_matrix(b)))


def frob_norm(a: npt.ArrayLike) -> float | FloatArray:
    """Frobenius norm.

    Examples:
        >>> mv.frob_norm(np.array([[3.0, 4.0], [0.0, 0.0]]))
        5.0
        >>> mv.frob_norm(np.zeros((3, 3)))
        0.0
    """
    a = _as_matrix(a)
    return _squeeze(np.sqrt(np.einsum("...ij,...ij->...", a, a)))


def commutator(a: npt.ArrayLike, b: npt.ArrayLike) -> MatStack:
    """Return the antisymmetric matrix `a b^T - b a^T`.

    Examples:
        >>> mv.commutator(np.array([[0.0, 1.0], [0.0, 0.0]]), np.eye(2)).tolist()
        [[0.0, 1.0], [-1.0, 0.0]]
    """
    a, b = _as_matrix(a), _as_matrix(b)
    if a.shape[-2:] != b.shape[-2:]:
        msg = f"matrix dimensions differ: {a.shape[-2:]} and {b.shape[-2:]}"
        raise ValueError(msg)
    return a @ _transpose(b) - b @ _transpose(a)


def potential_f(a: npt.ArrayLike) -> float | FloatArray:
    """Potential `F(A) = 1/4 |A A^T - I|^2`, vanishing exactly on the orthogonal group.

    Examples:
        >>> mv.potential_f(np.diag([0.5, 1.0]))
        0.140625
        >>> mv.potential_f(np.zeros((2, 2)))
        0.5
    """
    a = _as_matrix(a)
    gram = a @ _transpose(a) - np.eye(a.shape[-1])
    return _squeeze(0.25 * np.einsum("...ij,...ij->...", gram, gram))


def potential_grad(a: npt.ArrayLike) -> MatStack:
    """Gradient `DF(A) = A A^T A - A`.

    Examples:
        >>> mv.potential_grad(np.diag([0.5, 1.0])).tolist()
        [[-0.375, 0.0], [0.0, 0.0]]
    """
    a = _as_matrix(a)
    return a @ _transpose(a) @ a - a


def regularized_potential(a: npt.ArrayLike, eps: float, k: int = 5) -> float | FloatArray:
    """Potential lifted by the floor `eps**(k-1)`."""
    return _squeeze(np.asarray(potential_f(a)) + eps ** (k - 1))


@dataclass(frozen=True)
class SvdResult:
    """Singular value decomposition `A = u @ diag(sigma) @ v.T` with descending `sigma`.

    Attributes:
        u: Left singular frames.
        sigma: Singular values, descending and non-negative.
        v: Right singular frames.
        det_sign: Sign of `det(A)`, `0` when `A` is numerically singular.
        frame_sign: Sign of `det(u @ v.T)`; equals `det_sign` whenever the latter is nonzero.
    """

    u: MatStack
    sigma: FloatArray
    v: MatStack
    det_sign: npt.NDArray[np.int8]
    frame_sign: npt.NDArray[np.int8]

    @property
    def n(self) -> int:
        return self.sigma.shape[-1]

    def reconstruct(self) -> MatStack:
        return (self.u * self.sigma[..., None, :]) @ _transpose(self.v)


def svd(a: npt.ArrayLike) -> SvdResult:
    """Singular value decomposition with determinant bookkeeping.

    Examples:
        >>> r = mv.svd(np.diag([2.0, -1.0]))
        >>> r.sigma.tolist(), int(r.det_sign)
        ([2.0, 1.0], -1)
    """
    a = _as_matrix(a)
    if not np.all(np.isfinite(a)):
        msg = "svd input contains non-finite entries"
        raise ValueError(msg)
    try:
        u, sigma, vh = np.linalg.svd(a)
    except np.linalg.LinAlgError as exc:
        msg = "singular value decomposition did not converge"
        raise SvdConvergenceError(msg) from exc
    frame_sign = np.where(np.linalg.det(u) * np.linalg.det(vh) < 0, -1, 1).astype(np.int8)
    singular = sigma[..., -1] <= SINGULAR_TOL * (1.0 + sigma[..., 0])
    det_sign = np.where(singular, 0, frame_sign).astype(np.int8)
    return SvdResult(u=u, sigma=sigma, v=_transpose(vh), det_sign=det_sign, frame_sign=frame_sign)


@dataclass(frozen=True)
class _Branches:
    rho_plus: FloatArray
    rho_minus: FloatArray
    flip_plus: npt.NDArray[np.bool_]
    flip_minus: npt.NDArray[np.bool_]


def _branches(r: SvdResult) -> _Branches:
    dev = r.sigma - 1.0
    head = np.sum(dev[..., :-1] ** 2, axis=-1)
    keep = head + dev[..., -1] ** 2
    flipped = head + (r.sigma[..., -1] + 1.0) ** 2
    flip_plus = r.det_sign < 0
    flip_minus = r.det_sign > 0
    return _Branches(
        rho_plus=np.sqrt(np.where(flip_plus, flipped, keep)),
        rho_minus=np.sqrt(np.where(flip_minus, flipped, keep)),
        flip_plus=flip_plus,
        flip_minus=flip_minus,
    )


def _check_sign(sign: int, *, allow_zero: bool = False) -> None:
    allowed = (-1, 0, 1) if allow_zero else (-1, 1)
    if sign not in allowed:
        msg = f"component sign must be one of {allowed}, got {sign!r}"
        raise ValueError(msg)


def dist_to_component(a: npt.ArrayLike, sign: Sign) -> float | FloatArray:
    """Frobenius distance from `a` to the orthogonal component with determinant `sign`.

    Examples:
        >>> mv.dist_to_component(np.eye(2), 1), mv.dist_to_component(np.eye(2), -1)
        (0.0, 2.0)
    """
    _check_sign(sign)
    b = _branches(svd(a))
    return _squeeze(b.rho_plus if sign == 1 else b.rho_minus)


def _nearest_orthogonal(
    r: SvdResult, sign: IntoSign
) -> tuple[MatStack, npt.NDArray[np.bool_]]:
    if sign == 0:
        flip = np.zeros(r.det_sign.shape, dtype=bool)
    else:
        flip = r.frame_sign != sign
    gap = r.sigma[..., -2] - r.sigma[..., -1]
    degenerate = flip & (
        ((r.det_sign != 0) & (r.sigma[..., -1] <= PROJECTION_TOL)) | (gap <= PROJECTION_TOL)
    )
    scale = np.ones_like(r.sigma)
    scale[..., -1] = np.where(flip, -1.0, 1.0)
    return (r.u * scale[..., None, :]) @ _transpose(r.v), degenerate


def nearest_orthogonal(a: npt.ArrayLike, sign: IntoSign = 0) -> MatStack:
    """Nearest orthogonal matrix, optionally restricted to one component.

    Raises:
        DegenerateProjectionError: If the constrained projection is not unique.

    Examples:
        >>> (np.round(mv.nearest_orthogonal(np.diag([0.5, 1.0]), -1), 12) + 0.0).tolist()
        [[-1.0, 0.0], [0.0, 1.0]]
    """
    _check_sign(sign, allow_zero=True)
    q, degenerate = _nearest_orthogonal(svd(a), sign)
    if np.any(degenerate):
        msg = f"projection onto the component with sign {sign} is not unique"
        raise DegenerateProjectionError(msg)
    return q


def nearest_orthogonal_flags(
    a: npt.ArrayLike, sign: IntoSign = 0
) -> tuple[MatStack, npt.NDArray[np.bool_]]:
    """Nearest orthogonal matrix and the mask of non-unique projections, without raising."""
    _check_sign(sign, allow_zero=True)
    return _nearest_orthogonal(svd(a), sign)


def quasi_potential_profile(rho: npt.ArrayLike) -> float | FloatArray:
    """Scalar profile `1/4 rho^2 (2 - rho)^2` on `[0, 1]`, constant `1/4` beyond.

    Examples:
        >>> mv.quasi_potential_profile(0.5)
        0.140625
    """
    rho = np.asarray(rho, dtype=np.float64)
    if np.any(rho < 0):
        msg = "quasi potential profile is defined for non-negative arguments only"
        raise ValueError(msg)
    return _squeeze(np.where(rho <= 1.0, 0.25 * rho**2 * (2.0 - rho) ** 2, 0.25))


def quasi_potential_antiderivative(rho: npt.ArrayLike) -> float | FloatArray:
    """Antiderivative `q(rho) = (rho^2 - rho^3/3)/sqrt(2)` of `sqrt(2 f)`, frozen past 1."""
    r = np.minimum(np.abs(np.asarray(rho, dtype=np.float64)), 1.0)
    return _squeeze((r**2 - r**3 / 3.0) / SQRT2)


def _antiderivative_slope(x: FloatArray) -> FloatArray:
    return np.where(np.abs(x) < 1.0, (2.0 * x - x * np.abs(x)) / SQRT2, 0.0)


def quasi_potential(a: npt.ArrayLike) -> float | FloatArray:
    """Profile potential evaluated at the distance to the nearest orthogonal component."""
    b = _branches(svd(a))
    return quasi_potential_profile(np.minimum(b.rho_plus, b.rho_minus))


def quasi_distance(a: npt.ArrayLike) -> float | FloatArray:
    """Weighted distance coordinate running from 0 on O(n)- to the surface tension on O(n)+.

    Examples:
        >>> round(mv.quasi_distance(np.eye(3)), 6)
        0.942809
        >>> round(mv.quasi_distance(np.zeros((2, 2))), 6)
        0.471405
    """
    b = _branches(svd(a))
    q_minus = np.asarray(quasi_potential_antiderivative(b.rho_minus))
    q_plus = np.asarray(quasi_potential_antiderivative(b.rho_plus))
    value = np.where(
        b.rho_minus <= 1.0,
        q_minus,
        np.where(b.rho_plus <= 1.0, SURFACE_TENSION - q_plus, 0.5 * SURFACE_TENSION),
    )
    return _squeeze(value)


@dataclass(frozen=True)
class QuasiDistParams:
    """Smoothing parameters of the quasi-distance.

    Attributes:
        eps: Interface width driving the smoothing.
        k: Exponent, the smoothing width is `eps**k`.
    """

    eps: float
    k: int = 5

    def __post_init__(self) -> None:
        if not self.eps > 0:
            msg = f"eps must be positive, got {self.eps}"
            raise ValueError(msg)
        if self.k < 1:
            msg = f"k must be a positive integer, got {self.k}"
            raise ValueError(msg)
        if not 0 < self.smoothing_width < 0.1:
            msg = f"smoothing width eps**k={self.smoothing_width:g} must lie in (0, 0.1)"
            raise ValueError(msg)

    @property
    def smoothing_width(self) -> float:
        return self.eps**self.k

    @property
    def potential_floor(self) -> float:
        """The lift `eps**(k-1)` added to `F`."""
        return self.eps ** (self.k - 1)


def _smoothed_antiderivative(rho: FloatArray, width: float) -> FloatArray:
    shifted = np.asarray(rho)[..., None] - width * _THETA_NODES
    return np.asarray(quasi_potential_antiderivative(shifted)) @ _THETA_WEIGHTS


def _smoothed_slope(rho: FloatArray, width: float) -> FloatArray:
    shifted = np.asarray(rho)[..., None] - width * _THETA_NODES
    return _antiderivative_slope(shifted) @ _THETA_WEIGHTS


def quasi_distance_smoothed(a: npt.ArrayLike, p: QuasiDistParams) -> float | FloatArray:
    """Quasi-distance with its radial profile mollified over the width `eps**k`.

    The branch is chosen from the distances to both components; beyond `1 + eps**k` from
    both, the value is exactly half the surface tension.
    """
    w = p.smoothing_width
    b = _branches(svd(a))
    use_minus = b.rho_minus < 1.0 + w
    use_plus = ~use_minus & (b.rho_plus < 1.0 + w)
    value = np.where(
        use_minus,
        _smoothed_antiderivative(b.rho_minus, w),
        np.where(
            use_plus,
            SURFACE_TENSION - _smoothed_antiderivative(b.rho_plus, w),
            0.5 * SURFACE_TENSION,
        ),
    )
    return _squeeze(value)


def quasi_distance_grad_flags(
    a: npt.ArrayLike, p: QuasiDistParams
) -> tuple[MatStack, npt.NDArray[np.bool_]]:
    """Gradient of the smoothed quasi-distance and the mask of degenerate evaluations.

    The gradient is `q_w'(rho) * sum_i c_i u_i v_i^T` on the active branch. Where the
    smallest singular value vanishes, or where the flipped direction is not unique, the
    gradient falls back to zero and the mask is set.
    """
    a = _as_matrix(a)
    w = p.smoothing_width
    r = svd(a)
    b = _branches(r)
    use_minus = b.rho_minus < 1.0 + w
    use_plus = ~use_minus & (b.rho_plus < 1.0 + w)
    rho = np.where(use_minus, b.rho_minus, b.rho_plus)
    flip = np.where(use_minus, b.flip_minus, b.flip_plus)
    slope = np.where(
        use_minus,
        _smoothed_slope(b.rho_minus, w),
        np.where(use_plus, -_smoothed_slope(b.rho_plus, w), 0.0),
    )

    active = (use_minus | use_plus) & (rho > SINGULAR_TOL)
    smallest = r.sigma[..., -1]
    gap = r.sigma[..., -2] - smallest
    degenerate = active & ((smallest <= DEGENERACY_TOL) | (flip & (gap <= DEGENERACY_TOL)))

    coeff = r.sigma - 1.0
    coeff[..., -1] = np.where(flip, smallest + 1.0, smallest - 1.0)
    scale = np.where(active & ~degenerate, slope / np.where(active, rho, 1.0), 0.0)
    grad = np.einsum("...ij,...j,...kj->...ik", r.u, coeff * scale[..., None], r.v)
    return grad, degenerate


def quasi_distance_grad(a: npt.ArrayLike, p: QuasiDistParams) -> MatStack:
    """Gradient of `quasi_distance_smoothed`; zero on the middle branch and where degenerate."""
    return quasi_distance_grad_flags(a, p)[0]


def _project(direction: MatStack, g: MatStack) -> MatStack:
    norm2 = np.einsum("...ij,...ij->...", direction, direction)
    usable = np.sqrt(norm2) > ZERO_DIRECTION_TOL
    coef = np.where(
        usable, np.einsum("...ij,...ij->...", g, direction) / np.where(usable, norm2, 1.0), 0.0
    )
    return coef[..., None, None] * direction


def project_pi(a: npt.ArrayLike, g: npt.ArrayLike, p: QuasiDistParams) -> MatStack:
    """Project `g` onto the span of the quasi-distance gradient at `a`.

    Returns the zero matrix where the gradient norm is at most `1e-12`.
    """
    return _project(quasi_distance_grad(a, p), _as_matrix(g))
