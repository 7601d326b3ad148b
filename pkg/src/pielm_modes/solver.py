"""Generalized eigensolve, mode selection, reconstruction, and the forced solve."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
import numpy.typing as npt
import scipy.linalg as sla

from .assembly import AdmissibleMap, DesignMatrices, ReducedSystem
from .basis import BasisSpec, feature_matrix
from .errors import ConfigurationError, DegenerateModeError, InsufficientModesError, NotSPDError
from .problem import Problem, eigen_to_frequency

logger = logging.getLogger(__name__)

ArrayF = npt.NDArray[np.float64]

Orientation = Literal["residual", "symmetric"]


@dataclass(frozen=True)
class GEPResult:
    """All ``r`` eigenpairs of the reduced pencil, sorted by eigenvalue.

    ``imag`` holds the magnitude of each eigenvalue's imaginary part; it is
    identically zero for the symmetric orientation.
    """

    eigenvalues: ArrayF
    vectors: ArrayF
    imag: ArrayF
    orientation: str

    def __len__(self) -> int:
        return self.eigenvalues.size


def _cholesky(sys: ReducedSystem) -> ArrayF:
    if sys.cholesky is not None:
        return sys.cholesky
    try:
        return sla.cholesky(sys.G_red, lower=True)
    except np.linalg.LinAlgError:
        raise NotSPDError("reduced Gram matrix is not positive definite",
                          float(np.linalg.eigvalsh(sys.G_red)[0])) from None


def solve_gep(sys: ReducedSystem, orientation: Orientation = "residual") -> GEPResult:
    """Solve the reduced pencil through the Cholesky factor ``G_red = L L^T``.

    ``orientation="symmetric"`` diagonalizes ``L^-1 S_red L^-T`` with a
    symmetric eigensolver.  ``"residual"`` (default) uses the unsymmetrized
    projected operator ``T^T S^T T`` instead, whose eigenvalues coincide with
    those of ``T^T S T`` but whose eigenvectors are the Galerkin modes; the
    quadrature-induced skew part then cannot perturb the low spectrum.
    """
    chol = _cholesky(sys)
    if orientation == "symmetric":
        mat = sys.S_red
    elif orientation == "residual":
        mat = sys.residual_operator
    else:
        raise ValueError(f"unknown orientation {orientation!r}")
    half = sla.solve_triangular(chol, mat, lower=True)
    C = sla.solve_triangular(chol, half.T, lower=True).T
    if orientation == "symmetric":
        vals, vecs = np.linalg.eigh(0.5 * (C + C.T))
        imag = np.zeros_like(vals)
    else:
        cvals, cvecs = np.linalg.eig(C)
        # rotate each vector so its largest entry is real before dropping the imaginary part
        pivot = cvecs[np.argmax(np.abs(cvecs), axis=0), np.arange(cvecs.shape[1])]
        cvecs = cvecs * (np.abs(pivot) / pivot)[None, :]
        vals, vecs, imag = cvals.real.copy(), cvecs.real.copy(), np.abs(cvals.imag)
    y = sla.solve_triangular(chol, vecs, lower=True, trans="T")
    order = np.argsort(vals, kind="stable")
    return GEPResult(vals[order], y[:, order], imag[order], orientation)


@dataclass
class ModeSet:
    """Retained physical eigenpairs in ascending order."""

    eigenvalues: ArrayF
    reduced_vectors: ArrayF
    coefficients: ArrayF
    frequencies: ArrayF
    n_retained: int
    n_filtered: int
    samples: list[ArrayF] = field(default_factory=list)

    def __len__(self) -> int:
        return self.eigenvalues.size


def select_modes(pairs: GEPResult, problem: Problem, K: int, amap: AdmissibleMap,
                 zero_tol: float = 1e-8, imag_tol: float = 1e-6) -> ModeSet:
    """Keep the ``K`` lowest physical modes.

    Eigenvalues at or below ``zero_tol * lam_max`` are dropped (the constant
    Neumann mode and rounding-level negatives), as are complex eigenvalues
    whose imaginary part exceeds ``imag_tol * |lam|``.
    """
    if K < 1:
        raise ValueError("K must be at least 1")
    lam = pairs.eigenvalues
    lam_max = float(np.max(np.abs(lam))) if lam.size else 0.0
    keep = (lam > zero_tol * lam_max) & (pairs.imag <= imag_tol * np.abs(lam))
    idx = np.flatnonzero(keep)
    idx = idx[np.argsort(lam[idx], kind="stable")]
    if idx.size < K:
        raise InsufficientModesError(
            f"only {idx.size} physical modes retained, {K} requested; increase the basis degree")
    chosen = idx[:K]
    y = pairs.vectors[:, chosen]
    return ModeSet(
        eigenvalues=lam[chosen].copy(),
        reduced_vectors=y,
        coefficients=amap.T @ y,
        frequencies=np.asarray(eigen_to_frequency(problem, lam[chosen], lam_max), dtype=float),
        n_retained=int(idx.size),
        n_filtered=int(lam.size - idx.size),
    )


def refine_modes(sys: ReducedSystem, modes: ModeSet, amap: AdmissibleMap, problem: Problem,
                 spectrum: npt.ArrayLike | None = None, orientation: Orientation = "residual",
                 iters: int = 2, cluster_rtol: float = 1e-6) -> ModeSet:
    """Polish retained pairs by two-sided inverse iteration.

    The dense eigensolver resolves eigenvalues to about ``eps * lam_max``,
    which is coarse for the lowest modes when the spectrum spans many decades.
    A few inverse-iteration steps shifted at each computed ``lam`` and a
    two-sided Rayleigh quotient restore relative accuracy.  Eigenvalues within
    ``cluster_rtol`` of a neighbour in ``spectrum`` keep their vectors, since
    inverse iteration cannot separate a degenerate subspace.
    """
    M = sys.residual_operator if orientation == "residual" else sys.S_red
    G = sys.G_red
    others = np.sort(np.asarray(modes.eigenvalues if spectrum is None else spectrum, dtype=float))
    lam = modes.eigenvalues.copy()
    Y = modes.reduced_vectors.copy()
    for k in range(len(modes)):
        lk, y0 = lam[k], Y[:, k]
        near = np.abs(others - lk) <= cluster_rtol * abs(lk)
        clustered = np.count_nonzero(near) > 1
        x, y = y0.copy(), y0.copy()
        try:
            for _ in range(iters):
                shifted = M - lk * G
                y = np.linalg.solve(shifted, G @ y)
                x = np.linalg.solve(shifted.T, G @ x)
                y, x = y / np.linalg.norm(y), x / np.linalg.norm(x)
                lk = float(x @ M @ y) / float(x @ G @ y)
        except np.linalg.LinAlgError:
            continue
        if not np.isfinite(lk) or abs(lk - lam[k]) > cluster_rtol * abs(lam[k]):
            logger.warning("refinement of mode %d drifted; keeping the unrefined pair", k + 1)
            continue
        lam[k] = lk
        if not clustered:
            sign = 1.0 if float(y @ y0) >= 0 else -1.0
            Y[:, k] = sign * np.linalg.norm(y0) * y
    order = np.argsort(lam, kind="stable")
    lam, Y = lam[order], Y[:, order]
    return ModeSet(
        eigenvalues=lam,
        reduced_vectors=Y,
        coefficients=amap.T @ Y,
        frequencies=np.asarray(eigen_to_frequency(problem, lam), dtype=float),
        n_retained=modes.n_retained,
        n_filtered=modes.n_filtered,
    )


def normalize_samples(values: npt.ArrayLike) -> ArrayF:
    """Scale to ``max|u| = 1`` with the largest-magnitude entry positive."""
    v = np.asarray(values, dtype=float)
    k = int(np.argmax(np.abs(v)))
    peak = v.flat[k]
    if peak == 0.0 or not np.isfinite(peak):
        raise DegenerateModeError("mode vanishes on the reporting grid")
    return v / peak


def reconstruct_and_normalize(y: npt.ArrayLike, spec: BasisSpec, amap: AdmissibleMap,
                              grid: npt.ArrayLike) -> ArrayF:
    """Evaluate ``phi(x)^T T y`` on ``grid`` and normalize."""
    beta = amap.T @ np.asarray(y, dtype=float)
    values = feature_matrix(spec, grid, (0,) * spec.dimension) @ beta
    return normalize_samples(values)


def align_sign(samples: npt.ArrayLike, reference: npt.ArrayLike) -> ArrayF:
    """Flip ``samples`` to agree in sign with ``reference`` (discrete inner product)."""
    s = np.asarray(samples, dtype=float)
    return -s if float(np.dot(s.ravel(), np.asarray(reference, dtype=float).ravel())) < 0 else s


def sample_modes(modes: ModeSet, spec: BasisSpec, amap: AdmissibleMap,
                 grid: npt.ArrayLike) -> list[ArrayF]:
    modes.samples = [reconstruct_and_normalize(modes.reduced_vectors[:, k], spec, amap, grid)
                     for k in range(len(modes))]
    return modes.samples


def pielm_solve(spec: BasisSpec, psi: npt.ArrayLike, b_bc: npt.ArrayLike, f: npt.ArrayLike,
                g: npt.ArrayLike, ridge: float = 0.0) -> ArrayF:
    """Least-squares PIELM coefficients.

    The minimizer of ``||Psi beta - f||^2 + ||B beta - g||^2 + ridge ||beta||^2``,
    i.e. the solution of ``(Psi^T Psi + B^T B + ridge I) beta = Psi^T f + B^T g``.
    It is computed from the stacked rows by an SVD-based least-squares solve
    rather than by forming the normal matrix, whose condition number is the
    square of the stacked one.  When the normal matrix is singular and
    ``ridge`` is zero the minimum-norm (pseudo-inverse) solution is returned
    and a warning with the condition estimate is logged.
    """
    psi = np.atleast_2d(np.asarray(psi, dtype=float))
    bmat = np.atleast_2d(np.asarray(b_bc, dtype=float))
    if psi.shape[1] != spec.size or bmat.shape[1] != spec.size:
        raise ConfigurationError(f"row length must equal N_phi = {spec.size}")
    if psi.shape[0] + bmat.shape[0] < spec.size:
        raise ConfigurationError("stacked system is underdetermined")
    rows = [psi, bmat]
    rhs = [np.asarray(f, dtype=float).ravel(), np.asarray(g, dtype=float).ravel()]
    if ridge > 0:
        rows.append(np.sqrt(ridge) * np.eye(spec.size))
        rhs.append(np.zeros(spec.size))
    beta, _, rank, sv = sla.lstsq(np.vstack(rows), np.concatenate(rhs))
    if rank < spec.size:
        cond = (sv[0] / sv[-1]) ** 2 if sv[-1] > 0 else np.inf
        logger.warning("normal matrix is singular to working precision (cond %.3e); "
                       "using pseudo-inverse", cond)
    return beta


def quadratic_loss(dm: DesignMatrices, beta: npt.ArrayLike, lam: float) -> float:
    """``0.5 * beta^T (A - lam P + lam**2 G) beta``.

    With a stored row factor this is evaluated as ``0.5 ||R_1 beta - lam R_2 beta||^2``,
    which is nonnegative and stays accurate near a converged eigenpair.
    """
    b = np.asarray(beta, dtype=float)
    if dm.factor is not None:
        n = dm.size
        r = dm.factor[:, :n] @ b - lam * (dm.factor[:, n:] @ b)
        return 0.5 * float(r @ r)
    return 0.5 * float(b @ (dm.A @ b) - lam * (b @ (dm.P @ b)) + lam**2 * (b @ (dm.G @ b)))


def pair_residuals(sys: ReducedSystem, modes: ModeSet, matrix: ArrayF | None = None) -> ArrayF:
    """``||M y - lam G y|| / ((||M||_F + lam ||G||_F) ||y||)`` for each mode.

    ``matrix`` defaults to the residual-orientation operator; pass
    ``sys.S_red`` to check the symmetric stationarity condition instead.
    """
    M = sys.residual_operator if matrix is None else matrix
    nM, nG = np.linalg.norm(M), np.linalg.norm(sys.G_red)
    out = []
    for k in range(len(modes)):
        y, lam = modes.reduced_vectors[:, k], modes.eigenvalues[k]
        r = np.linalg.norm(M @ y - lam * (sys.G_red @ y))
        out.append(r / ((nM + abs(lam) * nG) * np.linalg.norm(y)))
    return np.array(out)
