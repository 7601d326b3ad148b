"""Differential eigenproblems: operators, boundary constraints, collocation."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np
import numpy.typing as npt

from .basis import BasisSpec, feature_matrix
from .errors import ConfigurationError, NumericalError

ArrayF = npt.NDArray[np.float64]


class SpuriousEigenvalueError(NumericalError):
    """Eigenvalue is negative beyond rounding and has no physical frequency."""


class BoundaryCondition(str, enum.Enum):
    SIMPLY_SUPPORTED = "simply_supported"
    FIXED_FIXED = "fixed_fixed"
    FIXED_FREE = "fixed_free"


# (end, derivative order) pairs; end 0 is x = 0, end 1 is x = L.
_BEAM_ROWS = {
    BoundaryCondition.SIMPLY_SUPPORTED: [(0, 0), (0, 2), (1, 0), (1, 2)],
    BoundaryCondition.FIXED_FIXED: [(0, 0), (0, 1), (1, 0), (1, 1)],
    BoundaryCondition.FIXED_FREE: [(0, 0), (0, 1), (1, 2), (1, 3)],
}


@dataclass(frozen=True)
class BeamProblem:
    """Uniform Euler-Bernoulli beam posed as ``w'''' = lam * w`` on ``[0, L]``.

    ``lam = rho * A * omega**2 / (E * I)``, so material constants only enter
    through :func:`eigen_to_frequency`.
    """

    E: float
    I: float
    rho: float
    area: float
    L: float
    bc: BoundaryCondition = BoundaryCondition.SIMPLY_SUPPORTED

    operator_order = 4
    dimension = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "bc", BoundaryCondition(self.bc))
        for name in ("E", "I", "rho", "area", "L"):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0:
                raise ConfigurationError(f"{name} must be strictly positive, got {value}")

    @property
    def lengths(self) -> tuple[float]:
        return (self.L,)

    @property
    def flexural_rigidity(self) -> float:
        return self.E * self.I

    @property
    def mass_per_length(self) -> float:
        return self.rho * self.area


@dataclass(frozen=True)
class CavityProblem:
    """Rigid-walled rectangular cavity, ``-lap(P) = lam * P`` with ``lam = k**2``."""

    L: float = 5.0
    H: float = 3.0
    c: float = 340.0

    operator_order = 2
    dimension = 2

    def __post_init__(self) -> None:
        for name in ("L", "H", "c"):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0:
                raise ConfigurationError(f"{name} must be strictly positive, got {value}")

    @property
    def lengths(self) -> tuple[float, float]:
        return (self.L, self.H)


Problem = Union[BeamProblem, CavityProblem]


@dataclass(frozen=True)
class BoundaryConstraint:
    point: tuple[float, ...]
    orders: tuple[int, ...]
    value: float = 0.0

    def row(self, spec: BasisSpec) -> ArrayF:
        return feature_matrix(spec, np.asarray(self.point)[None, :], self.orders)[0]


@dataclass
class CollocationSet:
    interior: ArrayF
    boundary: list[BoundaryConstraint] = field(default_factory=list)

    @property
    def n_interior(self) -> int:
        return int(self.interior.shape[0])

    @property
    def n_boundary(self) -> int:
        return len(self.boundary)


def check_compatible(problem: Problem, spec: BasisSpec) -> None:
    """Raise :class:`ConfigurationError` if ``spec`` cannot carry ``problem``."""
    if spec.dimension != problem.dimension:
        raise ConfigurationError(
            f"{type(problem).__name__} needs a {problem.dimension}D basis, got {spec.dimension}D")
    if not np.allclose(spec.lengths, problem.lengths, rtol=1e-14, atol=0.0):
        raise ConfigurationError(f"basis domain {spec.lengths} does not match problem {problem.lengths}")
    if min(spec.degree) < problem.operator_order:
        raise ConfigurationError(
            f"basis degree {spec.degree} is below the operator order {problem.operator_order}")


def operator_matrix(problem: Problem, spec: BasisSpec, points: npt.ArrayLike) -> ArrayF:
    """Rows ``L phi(x_i)`` for every point, shape ``(m, N_phi)``."""
    check_compatible(problem, spec)
    if isinstance(problem, BeamProblem):
        return feature_matrix(spec, points, (4,))
    return -(feature_matrix(spec, points, (2, 0)) + feature_matrix(spec, points, (0, 2)))


def operator_row(problem: Problem, spec: BasisSpec, point: float | Sequence[float]) -> ArrayF:
    pt = np.asarray(point, dtype=float).reshape(1, -1)
    return operator_matrix(problem, spec, pt)[0]


def open_grid(length: float, count: int) -> ArrayF:
    """``count`` equispaced points strictly inside ``(0, length)``."""
    return length * np.arange(1, count + 1) / (count + 1)


def _edge_points(length: float, count: int, include_ends: bool) -> ArrayF:
    if include_ends:
        return np.linspace(0.0, length, count)
    return open_grid(length, count)


def boundary_constraints(problem: Problem, spec: BasisSpec | None = None,
                         points_per_edge: int = 40) -> list[BoundaryConstraint]:
    """Homogeneous constraint list for ``problem``.

    Beams get the four end conditions of their support type.  The cavity gets
    zero normal derivative at ``points_per_edge`` equispaced points per wall;
    corners belong to the walls ``x = 0`` and ``x = L`` only.
    """
    if spec is not None:
        check_compatible(problem, spec)
    if isinstance(problem, BeamProblem):
        return [BoundaryConstraint((float(end * problem.L),), (order,))
                for end, order in _BEAM_ROWS[problem.bc]]
    if points_per_edge < 1:
        raise ConfigurationError("points_per_edge must be positive")
    out: list[BoundaryConstraint] = []
    ys = _edge_points(problem.H, points_per_edge, include_ends=points_per_edge > 1)
    xs = _edge_points(problem.L, points_per_edge, include_ends=False)
    for xw in (0.0, problem.L):
        out.extend(BoundaryConstraint((xw, float(y)), (1, 0)) for y in ys)
    for yw in (0.0, problem.H):
        out.extend(BoundaryConstraint((float(x), yw), (0, 1)) for x in xs)
    return out


def generate_interior(problem: Problem, counts: int | Sequence[int],
                      spec: BasisSpec | None = None) -> ArrayF:
    """Equispaced interior points (boundary excluded), shape ``(N_x, dim)``."""
    counts_t = tuple(int(c) for c in np.atleast_1d(counts))
    if len(counts_t) == 1 and problem.dimension == 2:
        counts_t = counts_t * 2
    if len(counts_t) != problem.dimension:
        raise ConfigurationError(f"expected {problem.dimension} grid counts, got {counts_t}")
    if any(c < 1 for c in counts_t):
        raise ConfigurationError(f"grid counts must be positive, got {counts_t}")
    total = int(np.prod(counts_t))
    if spec is not None and total < spec.size:
        raise ConfigurationError(
            f"{total} interior points cannot determine {spec.size} coefficients")
    axes = [open_grid(length, c) for length, c in zip(problem.lengths, counts_t)]
    if problem.dimension == 1:
        return axes[0][:, None]
    gx, gy = np.meshgrid(axes[0], axes[1], indexing="ij")
    return np.column_stack([gx.ravel(), gy.ravel()])


def collocation(problem: Problem, spec: BasisSpec, counts: int | Sequence[int],
                points_per_edge: int = 40) -> CollocationSet:
    return CollocationSet(generate_interior(problem, counts, spec),
                          boundary_constraints(problem, spec, points_per_edge))


def eigen_to_frequency(problem: Problem, lam: float | npt.ArrayLike,
                       lam_max: float | None = None) -> float | ArrayF:
    """Angular frequency in rad/s for spatial eigenvalue(s) ``lam``.

    Negatives within ``1e-8 * lam_max`` are treated as zero; anything more
    negative raises :class:`SpuriousEigenvalueError`.
    """
    arr = np.asarray(lam, dtype=float)
    scale = float(np.max(np.abs(arr))) if lam_max is None else float(lam_max)
    if np.any(arr < -1e-8 * scale):
        raise SpuriousEigenvalueError(f"negative eigenvalue {arr.min():.6e} has no frequency")
    arr = np.clip(arr, 0.0, None)
    if isinstance(problem, BeamProblem):
        omega = np.sqrt(arr * problem.flexural_rigidity / problem.mass_per_length)
    else:
        omega = problem.c * np.sqrt(arr)
    return float(omega) if omega.ndim == 0 else omega
