"""Quadratic-form design matrices, boundary matrix and the reduced system.

The design matrices are sums of outer products over interior collocation
points and are accumulated chunk by chunk, so memory stays ``O(N_phi**2)``
however many points are used.  The sum is an associative reduction; partial
results from separate point subsets merge with ``+``.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import numpy.typing as npt
import scipy.linalg as sla

from .basis import BasisSpec, feature_matrix
from .errors import AssemblyError, ConfigurationError, NotSPDError, TrivialAdmissibleSpaceError
from .problem import BoundaryConstraint, CavityProblem, Problem, check_compatible, operator_matrix

logger = logging.getLogger(__name__)

ArrayF = npt.NDArray[np.float64]

DEFAULT_CHUNK = 4096

# extended-precision sums are cheap for the small 1D bases but not for 2D tensor bases
EXTENDED = np.longdouble


@dataclass(frozen=True)
class DesignMatrices:
    """``A = sum Lphi Lphi^T``, ``S = sum Lphi phi^T``, ``G = sum phi phi^T``.

    ``factor`` optionally holds the triangular factor ``R`` of the stacked
    point rows ``[Lphi^T, phi^T]``, so that ``[[A, S], [S^T, G]] = R^T R``.
    Quadratic forms evaluated through ``R`` avoid the cancellation of
    ``A - lam P + lam**2 G`` near an eigenpair.
    """

    A: ArrayF
    S: ArrayF
    G: ArrayF
    n_points: int = 0
    factor: ArrayF | None = field(default=None, compare=False, repr=False)
    P: ArrayF = field(init=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "P", self.S + self.S.T)

    @classmethod
    def zeros(cls, size: int) -> "DesignMatrices":
        z = np.zeros((size, size))
        return cls(z, z.copy(), z.copy(), 0)

    @property
    def size(self) -> int:
        return self.G.shape[0]

    def __add__(self, other: "DesignMatrices") -> "DesignMatrices":
        factor = None
        if self.factor is not None and other.factor is not None:
            factor = _stack_factor(self.factor, other.factor)
        return DesignMatrices(self.A + other.A, self.S + other.S, self.G + other.G,
                              self.n_points + other.n_points, factor)


def _stack_factor(*blocks: ArrayF) -> ArrayF:
    return sla.qr(np.vstack(blocks), mode="r", check_finite=False)[0]


def design_from_rows(phi: npt.ArrayLike, lphi: npt.ArrayLike) -> DesignMatrices:
    """Design matrices from precomputed rows ``phi(x_i)`` and ``L phi(x_i)``."""
    phi = np.atleast_2d(np.asarray(phi, dtype=float))
    lphi = np.atleast_2d(np.asarray(lphi, dtype=float))
    return DesignMatrices(lphi.T @ lphi, lphi.T @ phi, phi.T @ phi, phi.shape[0],
                          _stack_factor(np.hstack([lphi, phi])))


def _accumulate(spec: BasisSpec, problem: Problem, points: ArrayF,
                dtype: type, factor: bool = False) -> tuple[np.ndarray, ...]:
    phi = feature_matrix(spec, points, (0,) * spec.dimension)
    lphi = operator_matrix(problem, spec, points)
    bad = ~(np.isfinite(phi).all(axis=1) & np.isfinite(lphi).all(axis=1))
    if bad.any():
        raise AssemblyError(f"non-finite feature values at point {points[np.argmax(bad)].tolist()}")
    R = _stack_factor(np.hstack([lphi, phi])) if factor else None
    phi, lphi = phi.astype(dtype), lphi.astype(dtype)
    return lphi.T @ lphi, lphi.T @ phi, phi.T @ phi, R


def assemble_design(spec: BasisSpec, problem: Problem, points: npt.ArrayLike,
                    chunk_size: int = DEFAULT_CHUNK, workers: int = 1,
                    extended: bool | None = None, factor: bool | None = None) -> DesignMatrices:
    """Accumulate the design matrices over interior ``points``.

    ``chunk_size=1`` is the literal point-by-point sum.  With ``workers > 1``
    chunks are summed on a thread pool and merged by matrix addition.

    ``extended`` accumulates in ``np.longdouble`` and rounds once at the end
    (default: on for 1D bases).  The low beam eigenvalues sit eight decades
    below the largest, so double-precision summation noise in the sums moves
    them at the 1e-9 level.  Where ``longdouble`` is plain double this is a
    no-op.  ``factor`` also keeps the triangular factor of the stacked rows
    (see ``DesignMatrices``); both default to on for 1D bases.
    """
    check_compatible(problem, spec)
    pts = np.asarray(points, dtype=float).reshape(-1, spec.dimension)
    if pts.shape[0] == 0:
        raise ConfigurationError("interior point set is empty")
    if extended is None:
        extended = spec.dimension == 1
    if factor is None:
        factor = spec.dimension == 1
    dtype = EXTENDED if extended else np.float64
    chunk_size = max(1, int(chunk_size))
    chunks = [pts[i : i + chunk_size] for i in range(0, pts.shape[0], chunk_size)]
    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda c: _accumulate(spec, problem, c, dtype, factor), chunks))
    else:
        parts = (_accumulate(spec, problem, c, dtype, factor) for c in chunks)
    A = np.zeros((spec.size, spec.size), dtype=dtype)
    S, G = A.copy(), A.copy()
    blocks = []
    for a, s, g, r in parts:
        A += a
        S += s
        G += g
        if r is not None:
            # fold as we go so at most two blocks are held at once
            blocks = [_stack_factor(*blocks, r)]
    R = blocks[0] if blocks else None
    return DesignMatrices(A.astype(float), S.astype(float), G.astype(float), pts.shape[0], R)


def assemble_design_tensor(spec: BasisSpec, problem: CavityProblem,
                           x_points: npt.ArrayLike, y_points: npt.ArrayLike) -> DesignMatrices:
    """Design matrices for the Laplacian on a full tensor grid ``x_points x y_points``.

    Every sum over the grid factors into 1D sums combined with Kronecker
    products, which avoids touching the ``N_x * N_y`` points individually.
    """
    check_compatible(problem, spec)
    if not isinstance(problem, CavityProblem):
        raise ConfigurationError("tensor assembly is only defined for the 2D Laplacian")
    xs = np.asarray(x_points, dtype=float).ravel()
    ys = np.asarray(y_points, dtype=float).ravel()
    bx = BasisSpec.line(spec.degree[0], spec.lengths[0])
    by = BasisSpec.line(spec.degree[1], spec.lengths[1])
    x0, x2 = feature_matrix(bx, xs, (0,)), feature_matrix(bx, xs, (2,))
    y0, y2 = feature_matrix(by, ys, (0,)), feature_matrix(by, ys, (2,))
    gx, gy = x0.T @ x0, y0.T @ y0
    x20, y20 = x2.T @ x0, y2.T @ y0
    x22, y22 = x2.T @ x2, y2.T @ y2
    G = np.kron(gx, gy)
    S = -(np.kron(x20, gy) + np.kron(gx, y20))
    A = np.kron(x22, gy) + np.kron(x20, y20.T) + np.kron(x20.T, y20) + np.kron(gx, y22)
    return DesignMatrices(A, S, G, xs.size * ys.size)


@dataclass(frozen=True)
class BoundaryMatrix:
    rows: ArrayF
    values: ArrayF

    @property
    def n_rows(self) -> int:
        return self.rows.shape[0]


def assemble_boundary(spec: BasisSpec, constraints: Sequence[BoundaryConstraint],
                      homogeneous: bool = True) -> BoundaryMatrix:
    """Stack constraint rows ``B phi(x_j)``; a zero row is rejected."""
    if len(constraints) == 0:
        raise ConfigurationError("no boundary constraints")
    rows = np.vstack([c.row(spec) for c in constraints])
    values = np.array([c.value for c in constraints], dtype=float)
    if homogeneous and np.any(values != 0.0):
        raise ConfigurationError("eigenproblem constraints must be homogeneous")
    zero = ~np.any(rows != 0.0, axis=1)
    if zero.any():
        c = constraints[int(np.argmax(zero))]
        raise AssemblyError(f"degenerate constraint at {c.point} with orders {c.orders}")
    return BoundaryMatrix(rows, values)


@dataclass(frozen=True)
class AdmissibleMap:
    """Orthonormal basis ``T`` of the null space of the boundary matrix."""

    T: ArrayF
    rank: int
    n_constraints: int
    singular_values: ArrayF

    @property
    def dim(self) -> int:
        return self.T.shape[1]


def nullspace_map(B: BoundaryMatrix | npt.ArrayLike, rank_tol: float = 1e-10) -> AdmissibleMap:
    """Null-space basis of ``B`` from its SVD.

    The rank counts singular values above ``rank_tol * sigma_max``.
    """
    rows = B.rows if isinstance(B, BoundaryMatrix) else np.atleast_2d(np.asarray(B, dtype=float))
    _, sv, vt = np.linalg.svd(rows, full_matrices=True)
    smax = sv[0] if sv.size else 0.0
    rank = int(np.sum(sv > rank_tol * smax)) if smax > 0 else 0
    n_phi = rows.shape[1]
    if rank >= n_phi:
        raise TrivialAdmissibleSpaceError(
            f"boundary matrix has full rank {rank}; no admissible coefficients remain")
    if rank < rows.shape[0]:
        logger.warning("boundary matrix is rank deficient: rank %d from %d constraints",
                       rank, rows.shape[0])
    return AdmissibleMap(vt[rank:].T.copy(), rank, rows.shape[0], sv)


@dataclass(frozen=True)
class ReducedSystem:
    """Design matrices restricted to the admissible coordinates ``beta = T y``.

    ``S_raw = T^T S T`` as projected.  ``S_red`` is its symmetric part (half of
    ``T^T P T``).  ``asymmetry`` is ``||S_raw - S_raw^T||_F / ||S_raw||_F``.
    """

    S_raw: ArrayF
    S_red: ArrayF
    G_red: ArrayF
    asymmetry: float
    ridge_shift: float = 0.0
    cholesky: ArrayF | None = field(default=None, repr=False)

    @property
    def dim(self) -> int:
        return self.G_red.shape[0]

    @property
    def residual_operator(self) -> ArrayF:
        """``T^T S^T T``: row ``a`` is ``sum_i v_a(x_i) (L u)(x_i)`` acting on ``y``."""
        return self.S_raw.T


def reduce(dm: DesignMatrices, amap: AdmissibleMap, ridge: float | None = None) -> ReducedSystem:
    """Project the design matrices onto the admissible space.

    ``ridge`` (opt in) adds ``ridge * trace(G_red) / r`` to the diagonal of
    ``G_red``; the applied shift is stored on the result and logged.
    """
    T = amap.T
    if T.shape[0] != dm.size:
        raise ConfigurationError(f"map has {T.shape[0]} rows, design matrices are {dm.size}")
    s_raw = T.T @ dm.S @ T
    norm = np.linalg.norm(s_raw)
    asym = float(np.linalg.norm(s_raw - s_raw.T) / norm) if norm > 0 else 0.0
    s_red = 0.5 * (s_raw + s_raw.T)
    g_red = T.T @ dm.G @ T
    g_red = 0.5 * (g_red + g_red.T)
    shift = 0.0
    if ridge:
        shift = float(ridge * np.trace(g_red) / g_red.shape[0])
        g_red = g_red + shift * np.eye(g_red.shape[0])
        logger.warning("ridge shift %.3e applied to reduced Gram matrix", shift)
    try:
        chol = sla.cholesky(g_red, lower=True)
    except np.linalg.LinAlgError:
        raise NotSPDError("reduced Gram matrix is not positive definite",
                          float(np.linalg.eigvalsh(g_red)[0])) from None
    return ReducedSystem(s_raw, s_red, g_red, asym, shift, chol)
