"""Bernstein-polynomial feature vectors on 1D intervals and 2D rectangles.

Features are evaluated on the reference coordinate ``t = x / L`` in ``[0, 1]``
and mapped back to physical derivatives with the chain-rule factor
``(1 / L) ** d``.  Two-dimensional features are tensor products flattened in
row-major (x-major) order: ``k = i * (n_y + 1) + j`` with ``i`` the x-index.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import numpy.typing as npt

from .errors import DomainError

MAX_DERIVATIVE_ORDER = 4

ArrayF = npt.NDArray[np.float64]


@dataclass(frozen=True)
class BasisSpec:
    """Frozen Bernstein feature family on ``[0, L]`` or ``[0, L] x [0, H]``.

    Parameters
    ----------
    degree : tuple of int
        Polynomial degree per dimension, ``(n,)`` or ``(n_x, n_y)``.
    lengths : tuple of float
        Physical domain lengths per dimension, ``(L,)`` or ``(L, H)``.
    """

    degree: tuple[int, ...]
    lengths: tuple[float, ...]

    def __post_init__(self) -> None:
        degree = tuple(int(d) for d in np.atleast_1d(self.degree))
        lengths = tuple(float(v) for v in np.atleast_1d(self.lengths))
        object.__setattr__(self, "degree", degree)
        object.__setattr__(self, "lengths", lengths)
        if len(degree) not in (1, 2):
            raise ValueError(f"dimension must be 1 or 2, got {len(degree)}")
        if len(lengths) != len(degree):
            raise ValueError("degree and lengths must have the same dimension")
        if any(d < 0 for d in degree):
            raise ValueError(f"degrees must be non-negative, got {degree}")
        if any(not np.isfinite(v) or v <= 0.0 for v in lengths):
            raise ValueError(f"domain lengths must be strictly positive, got {lengths}")

    @classmethod
    def line(cls, degree: int, length: float) -> "BasisSpec":
        return cls((degree,), (length,))

    @classmethod
    def rectangle(cls, degree_x: int, degree_y: int, length: float, height: float) -> "BasisSpec":
        return cls((degree_x, degree_y), (length, height))

    @property
    def dimension(self) -> int:
        return len(self.degree)

    @property
    def size(self) -> int:
        """Number of basis functions N_phi."""
        return int(np.prod([d + 1 for d in self.degree]))

    def flat_index(self, i: int, j: int = 0) -> int:
        if self.dimension == 1:
            return i
        return i * (self.degree[1] + 1) + j

    def unflat_index(self, k: int) -> tuple[int, ...]:
        if self.dimension == 1:
            return (k,)
        return divmod(k, self.degree[1] + 1)


def _check_reference(t: ArrayF) -> None:
    if t.size and (np.any(~np.isfinite(t)) or t.min() < 0.0 or t.max() > 1.0):
        raise DomainError("reference coordinate outside [0, 1]")


def _bernstein_table(n: int, t: ArrayF) -> ArrayF:
    # Degree-raising recurrence B_{k,j} = (1-t) B_{k,j-1} + t B_{k-1,j-1}.
    out = np.zeros((t.size, n + 1))
    out[:, 0] = 1.0
    s = 1.0 - t
    for j in range(1, n + 1):
        out[:, 1 : j + 1] = s[:, None] * out[:, 1 : j + 1] + t[:, None] * out[:, :j]
        out[:, 0] *= s
    return out


def bernstein_eval(n: int, t: float | npt.ArrayLike) -> ArrayF:
    """Evaluate all degree-``n`` Bernstein polynomials at ``t``.

    Returns a length ``n + 1`` vector for scalar ``t`` and an ``(m, n + 1)``
    table for an array of ``m`` coordinates.
    """
    if n < 0:
        raise DomainError(f"degree must be non-negative, got {n}")
    tt = np.asarray(t, dtype=float)
    flat = np.atleast_1d(tt).ravel()
    _check_reference(flat)
    table = _bernstein_table(n, flat)
    return table[0] if tt.ndim == 0 else table


def bernstein_derivative(n: int, t: float | npt.ArrayLike, d: int) -> ArrayF:
    """``d``-th derivative in ``t`` of the degree-``n`` Bernstein polynomials.

    Uses ``B'_{k,n} = n (B_{k-1,n-1} - B_{k,n-1})`` applied ``d`` times to the
    degree ``n - d`` table.  Orders above ``n`` give zeros.
    """
    if d < 0:
        raise DomainError(f"derivative order must be non-negative, got {d}")
    if n < 0:
        raise DomainError(f"degree must be non-negative, got {n}")
    tt = np.asarray(t, dtype=float)
    flat = np.atleast_1d(tt).ravel()
    _check_reference(flat)
    if d > n:
        table = np.zeros((flat.size, n + 1))
    else:
        table = _bernstein_table(n - d, flat)
        for m in range(n - d + 1, n + 1):
            raised = np.zeros((flat.size, m + 1))
            raised[:, 1:] += table
            raised[:, :-1] -= table
            table = m * raised
    return table[0] if tt.ndim == 0 else table


def _axis_table(spec: BasisSpec, axis: int, x: ArrayF, order: int) -> ArrayF:
    length = spec.lengths[axis]
    if x.size and (np.any(~np.isfinite(x)) or x.min() < 0.0 or x.max() > length):
        raise DomainError(f"point outside domain [0, {length}] along axis {axis}")
    return bernstein_derivative(spec.degree[axis], x / length, order) / length**order


def _check_orders(spec: BasisSpec, orders: Sequence[int]) -> tuple[int, ...]:
    orders = tuple(int(o) for o in np.atleast_1d(orders))
    if len(orders) != spec.dimension:
        raise ValueError(f"expected {spec.dimension} derivative orders, got {orders}")
    if any(o < 0 or o > MAX_DERIVATIVE_ORDER for o in orders):
        raise DomainError(f"derivative orders must lie in 0..{MAX_DERIVATIVE_ORDER}, got {orders}")
    return orders


def feature_matrix(spec: BasisSpec, points: npt.ArrayLike, orders: Sequence[int]) -> ArrayF:
    """Feature rows for many points at once, shape ``(m, N_phi)``.

    ``points`` is ``(m,)`` or ``(m, 1)`` in 1D and ``(m, 2)`` in 2D.
    """
    orders = _check_orders(spec, orders)
    pts = np.asarray(points, dtype=float).reshape(-1, spec.dimension)
    if spec.dimension == 1:
        return _axis_table(spec, 0, pts[:, 0], orders[0])
    fx = _axis_table(spec, 0, pts[:, 0], orders[0])
    fy = _axis_table(spec, 1, pts[:, 1], orders[1])
    return np.einsum("pi,pj->pij", fx, fy).reshape(pts.shape[0], spec.size)


def eval_features(spec: BasisSpec, point: float | Sequence[float], orders: int | Sequence[int] = 0) -> ArrayF:
    """Feature vector (or derivative thereof) at one physical point."""
    if np.ndim(orders) == 0 and spec.dimension == 1:
        orders = (int(orders),)  # type: ignore[arg-type]
    elif np.ndim(orders) == 0:
        orders = (int(orders),) * spec.dimension  # type: ignore[arg-type]
    pt = np.asarray(point, dtype=float).reshape(-1)
    if pt.size != spec.dimension:
        raise ValueError(f"point must have {spec.dimension} coordinate(s), got {pt.size}")
    return feature_matrix(spec, pt[None, :], orders)[0]  # type: ignore[arg-type]


def evaluate(spec: BasisSpec, coefficients: npt.ArrayLike, points: npt.ArrayLike,
             orders: Sequence[int] | None = None) -> ArrayF:
    """Evaluate the expansion ``phi(x)^T beta`` at ``points``."""
    if orders is None:
        orders = (0,) * spec.dimension
    return feature_matrix(spec, points, orders) @ np.asarray(coefficients, dtype=float)


def bernstein_coefficients_1d(n: int, monomial: Sequence[float]) -> ArrayF:
    """Bernstein coefficients on ``[0, 1]`` of ``sum_j a_j t^j`` (degree <= n).

    Uses ``t^j = sum_{k>=j} C(k, j) / C(n, j) B_{k,n}(t)``.
    """
    from math import comb

    a = np.asarray(monomial, dtype=float)
    if a.size > n + 1:
        raise ValueError("monomial degree exceeds basis degree")
    out = np.zeros(n + 1)
    for j, aj in enumerate(a):
        if aj == 0.0:
            continue
        for k in range(j, n + 1):
            out[k] += aj * comb(k, j) / comb(n, j)
    return out
