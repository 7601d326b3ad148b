"""Closed-form benchmark solutions for beams and the rectangular cavity."""

from __future__ import annotations

import math

import numpy as np
import numpy.typing as npt
from scipy.optimize import bisect

from .problem import BeamProblem, BoundaryCondition

ArrayF = npt.NDArray[np.float64]

# Dimensionless wavenumbers as published (first five per support type).
TABULATED_WAVENUMBERS = {
    BoundaryCondition.FIXED_FIXED: (4.73, 7.8532, 10.9956, 14.1372, 17.2787),
    BoundaryCondition.FIXED_FREE: (1.8751, 4.6941, 7.8548, 10.9955, 14.1372),
}

MODE_GRID_POINTS = 2001


def characteristic(bc: BoundaryCondition | str, beta: float) -> float:
    """Characteristic function scaled by ``1 / cosh(beta)`` so it stays O(1).

    Fixed-fixed: ``cos b cosh b = 1``; fixed-free: ``cos b cosh b = -1``;
    simply supported: ``sin b = 0``.
    """
    bc = BoundaryCondition(bc)
    if bc is BoundaryCondition.SIMPLY_SUPPORTED:
        return math.sin(beta)
    sign = -1.0 if bc is BoundaryCondition.FIXED_FIXED else 1.0
    return math.cos(beta) + sign / math.cosh(beta)


def _initial_guess(bc: BoundaryCondition, n: int) -> float:
    table = TABULATED_WAVENUMBERS[bc]
    if n <= len(table):
        return table[n - 1]
    if bc is BoundaryCondition.FIXED_FIXED:
        return (2 * n + 1) * math.pi / 2
    return (2 * n - 1) * math.pi / 2


def beam_wavenumbers(bc: BoundaryCondition | str, K: int, refine: bool = True) -> ArrayF:
    """First ``K`` dimensionless wavenumbers ``beta_n``.

    Clamped cases start from the tabulated values and are refined by
    bisection on :func:`characteristic` within ``+-0.5``.  Without refinement
    only the five tabulated values are available.
    """
    bc = BoundaryCondition(bc)
    if K < 1:
        raise ValueError("K must be at least 1")
    if bc is BoundaryCondition.SIMPLY_SUPPORTED:
        return math.pi * np.arange(1, K + 1, dtype=float)
    table = TABULATED_WAVENUMBERS[bc]
    if not refine:
        if K > len(table):
            raise ValueError(f"only {len(table)} tabulated wavenumbers; enable refinement")
        return np.array(table[:K], dtype=float)
    out = []
    for n in range(1, K + 1):
        guess = _initial_guess(bc, n)
        out.append(bisect(lambda b: characteristic(bc, b), guess - 0.5, guess + 0.5,
                          xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200))
    return np.array(out)


def beam_exact_frequencies(problem: BeamProblem, K: int, refine: bool = True) -> ArrayF:
    """``(beta_n / L)**2 * sqrt(EI / (rho A))`` in rad/s."""
    beta = beam_wavenumbers(problem.bc, K, refine)
    return (beta / problem.L) ** 2 * math.sqrt(problem.flexural_rigidity / problem.mass_per_length)


def _raw_mode(bc: BoundaryCondition, beta: float, x: ArrayF, L: float) -> ArrayF:
    z = beta * x / L
    if bc is BoundaryCondition.SIMPLY_SUPPORTED:
        return np.sin(z)
    # (cos z - cosh z) - s (sin z - sinh z) rewritten as
    # cos z - s sin z - exp(-z) - (1 - s) sinh z, with 1 - s in closed form,
    # so the cosh/sinh cancellation never happens in floating point
    sb, cb, eb = math.sin(beta), math.cos(beta), math.exp(-beta)
    if bc is BoundaryCondition.FIXED_FIXED:
        den = sb - math.sinh(beta)
        s = (cb - math.cosh(beta)) / den
        one_minus_s = (sb - cb + eb) / den
    else:
        den = sb + math.sinh(beta)
        s = (cb + math.cosh(beta)) / den
        one_minus_s = (sb - cb - eb) / den
    return np.cos(z) - s * np.sin(z) - np.exp(-z) - one_minus_s * np.sinh(z)


def beam_exact_mode(bc: BoundaryCondition | str, n: int, x: npt.ArrayLike, L: float,
                    normalize: bool = True) -> ArrayF:
    """Analytical ``n``-th mode shape at ``x``.

    With ``normalize`` the shape is divided by its maximum magnitude over a
    2001-point grid on ``[0, L]``.
    """
    bc = BoundaryCondition(bc)
    beta = float(beam_wavenumbers(bc, n)[-1])
    xs = np.asarray(x, dtype=float)
    values = _raw_mode(bc, beta, xs, L)
    if normalize:
        scale = np.max(np.abs(_raw_mode(bc, beta, np.linspace(0.0, L, MODE_GRID_POINTS), L)))
        values = values / scale
    return values


def cavity_exact_spectrum(L: float, H: float, c: float, K: int) -> list[tuple[float, tuple[int, int]]]:
    """Lowest ``K`` rigid-wall frequencies ``c * k_mn`` with their ``(m, n)`` labels.

    The constant mode ``(0, 0)`` is excluded.  Ties are ordered by ``(m, n)``.
    """
    if K < 1:
        raise ValueError("K must be at least 1")
    M = 4
    previous = None
    while True:
        entries = []
        for m in range(M + 1):
            for n in range(M + 1):
                if m == 0 and n == 0:
                    continue
                k = math.hypot(m * math.pi / L, n * math.pi / H)
                entries.append((c * k, (m, n)))
        entries.sort()
        current = entries[:K]
        if len(current) == K and current == previous:
            return current
        previous = current
        M *= 2


def cavity_exact_mode(m: int, n: int, x: npt.ArrayLike, y: npt.ArrayLike, L: float, H: float) -> ArrayF:
    return np.cos(m * np.pi * np.asarray(x) / L) * np.cos(n * np.pi * np.asarray(y) / H)


def frequency_errors(predicted: npt.ArrayLike, exact: npt.ArrayLike) -> tuple[ArrayF, ArrayF]:
    """Absolute ``|w_pred - w_exact|`` and relative ``abs / w_exact`` per mode."""
    p = np.asarray(predicted, dtype=float)
    e = np.asarray(exact, dtype=float)
    if p.shape != e.shape:
        raise ValueError(f"length mismatch: {p.shape} vs {e.shape}")
    abs_err = np.abs(p - e)
    return abs_err, abs_err / np.abs(e)
