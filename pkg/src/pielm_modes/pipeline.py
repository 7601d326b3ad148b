"""End-to-end runs: config -> assembly -> reduction -> eigensolve -> report."""

from __future__ import annotations

import csv
import json
import logging
import time
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Mapping

import numpy as np
from scipy.linalg import subspace_angles

from . import analytic
from .assembly import (assemble_boundary, assemble_design, assemble_design_tensor,
                       nullspace_map, reduce)
from .basis import BasisSpec
from .errors import ConfigurationError, NotSPDError
from .problem import (BeamProblem, BoundaryCondition, CavityProblem, Problem,
                      boundary_constraints, generate_interior, open_grid)
from .solver import (align_sign, normalize_samples, pair_residuals, refine_modes, sample_modes,
                     select_modes, solve_gep)

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
CSV_COLUMNS = ("mode_index", "omega_predicted", "omega_exact", "abs_error", "rel_error")
BENCH_CASES = ("beam_ss", "beam_ff", "beam_cf", "cavity")

# Acceptance bounds used by `bench`: (frequency rel. error, mode-shape max error).
BENCH_BOUNDS = {
    "beam_ss": (1e-8, 1e-5),
    "beam_ff": (1e-8, 1e-5),
    "beam_cf": (1e-7, 1e-5),
    "cavity": (1e-6, 1e-4),
}

# Desk-scale defaults applied when a config omits the field.
PROBLEM_DEFAULTS: dict[str, dict[str, Any]] = {
    "beam": {"L": 0.12, "degree": 23, "nx": 2000, "grid": 2001},
    "cavity": {"L": 5.0, "degree": 13, "nx": 60, "grid": 41},
}

# Ties in the exact spectrum closer than this are treated as degenerate.
DEGENERACY_RTOL = 1e-9


class ConfigError(ConfigurationError):
    """Invalid run configuration; ``problems`` lists ``field: message`` entries."""

    def __init__(self, problems: list[str]):
        super().__init__("invalid configuration: " + "; ".join(problems))
        self.problems = problems


@dataclass
class RunConfig:
    problem: str
    name: str = ""
    # beam
    bc: str = "simply_supported"
    E: float = 210e9
    I: float = 2e-12
    rho: float = 7800.0
    area: float = 6e-6
    L: float = 0.12
    # cavity
    H: float = 3.0
    c: float = 340.0
    boundary_points: int = 40
    # discretization
    degree: int = 23
    degree_y: int | None = None
    nx: int = 2000
    ny: int | None = None
    modes: int = 5
    grid: int = 2001
    zero_tol: float = 1e-8
    ridge: float | None = None
    orientation: str = "residual"
    refine: int = 2
    tensor_assembly: bool = False
    workers: int = 1
    seed: int | None = None  # reserved; Bernstein features are deterministic
    output_dir: str | None = None
    schema_version: int = SCHEMA_VERSION

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "RunConfig":
        problems: list[str] = []
        known = set(cls.__dataclass_fields__)
        for key in data:
            if key not in known:
                problems.append(f"{key}: unknown field")
        if "problem" not in data:
            problems.append("problem: required")
        if data.get("schema_version", SCHEMA_VERSION) != SCHEMA_VERSION:
            problems.append(f"schema_version: expected {SCHEMA_VERSION}")
        if problems:
            raise ConfigError(problems)
        merged = {**PROBLEM_DEFAULTS.get(data["problem"], {}), **data}
        cfg = cls(**merged)
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path: str | Path) -> "RunConfig":
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError([f"<file>: {exc}"]) from None
        if not isinstance(data, dict):
            raise ConfigError(["<root>: expected a JSON object"])
        cfg = cls.from_dict(data)
        if not cfg.name:
            cfg.name = Path(path).stem
        return cfg

    def validate(self) -> None:
        p: list[str] = []
        if self.problem not in ("beam", "cavity"):
            p.append(f"problem: must be 'beam' or 'cavity', got {self.problem!r}")
        order = 4 if self.problem == "beam" else 2
        if self.problem == "beam":
            try:
                BoundaryCondition(self.bc)
            except ValueError:
                p.append(f"bc: must be one of {[b.value for b in BoundaryCondition]}")
            for key in ("E", "I", "rho", "area", "L"):
                if not _positive(getattr(self, key)):
                    p.append(f"{key}: must be a positive number")
        else:
            for key in ("L", "H", "c"):
                if not _positive(getattr(self, key)):
                    p.append(f"{key}: must be a positive number")
            if not _posint(self.boundary_points):
                p.append("boundary_points: must be a positive integer")
        for key in ("degree", "degree_y"):
            value = getattr(self, key)
            if value is None:
                continue
            if not _posint(value):
                p.append(f"{key}: must be a positive integer")
            elif value < order:
                p.append(f"{key}: degree {value} is below the operator order {order}")
        for key in ("nx", "ny", "modes", "grid", "workers"):
            value = getattr(self, key)
            if value is not None and not _posint(value):
                p.append(f"{key}: must be a positive integer")
        if not isinstance(self.refine, int) or isinstance(self.refine, bool) or self.refine < 0:
            p.append("refine: must be a non-negative integer")
        if self.orientation not in ("residual", "symmetric"):
            p.append("orientation: must be 'residual' or 'symmetric'")
        if self.ridge is not None and not (_positive(self.ridge)):
            p.append("ridge: must be a positive number or null")
        if not p and self.problem == "cavity" and self.grid < 2:
            p.append("grid: need at least 2 points per axis")
        if not p:
            spec = self.basis()
            total = self.nx * (self.ny or self.nx) if self.problem == "cavity" else self.nx
            if total < spec.size:
                p.append(f"nx: {total} interior points cannot determine {spec.size} coefficients")
        if p:
            raise ConfigError(p)

    def build_problem(self) -> Problem:
        if self.problem == "beam":
            return BeamProblem(self.E, self.I, self.rho, self.area, self.L, BoundaryCondition(self.bc))
        return CavityProblem(self.L, self.H, self.c)

    def basis(self) -> BasisSpec:
        if self.problem == "beam":
            return BasisSpec.line(self.degree, self.L)
        return BasisSpec.rectangle(self.degree, self.degree_y or self.degree, self.L, self.H)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


def _positive(v: Any) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool) and np.isfinite(v) and v > 0


def _posint(v: Any) -> bool:
    return isinstance(v, int) and not isinstance(v, bool) and v > 0


def bundled_config(name: str) -> RunConfig:
    """Load one of the packaged benchmark configs (``beam_ss``, ``cavity``, ...)."""
    stem = name[:-5] if name.endswith(".json") else name
    ref = resources.files("pielm_modes") / "configs" / f"{stem}.json"
    if not ref.is_file():
        raise ConfigError([f"<file>: no config {name!r} on disk or bundled"])
    cfg = RunConfig.from_dict(json.loads(ref.read_text()))
    cfg.name = cfg.name or stem
    return cfg


def resolve_config(path_or_name: str) -> RunConfig:
    path = Path(path_or_name)
    if path.is_file():
        return RunConfig.load(path)
    return bundled_config(path.name)


@dataclass
class ModeRow:
    mode_index: int
    omega_predicted: float
    omega_exact: float
    abs_error: float
    rel_error: float
    eigenvalue: float
    label: str
    shape_error: float | None
    residual: float
    stationarity: float


@dataclass
class RunReport:
    name: str
    config: dict[str, Any]
    modes: list[ModeRow]
    asymmetry: float
    n_basis: int
    n_reduced: int
    boundary_rank: int
    n_retained: int
    n_filtered: int
    ridge_shift: float
    subspace_angles: dict[str, float] = field(default_factory=dict)
    timings: dict[str, float] = field(default_factory=dict)
    grid: list[list[float]] = field(default_factory=list, repr=False)
    samples: list[list[float]] = field(default_factory=list, repr=False)

    @property
    def frequencies(self) -> np.ndarray:
        return np.array([m.omega_predicted for m in self.modes])

    @property
    def max_rel_error(self) -> float:
        return max(m.rel_error for m in self.modes)

    @property
    def max_shape_error(self) -> float:
        errs = [m.shape_error for m in self.modes if m.shape_error is not None]
        return max(errs) if errs else 0.0

    def to_dict(self) -> dict[str, Any]:
        out = asdict(self)
        out.pop("grid")
        out.pop("samples")
        return out


def reporting_grid(problem: Problem, resolution: int) -> np.ndarray:
    """Closed equispaced grid including the boundary, shape ``(m, dim)``."""
    if isinstance(problem, BeamProblem):
        return np.linspace(0.0, problem.L, resolution)[:, None]
    gx, gy = np.meshgrid(np.linspace(0.0, problem.L, resolution),
                         np.linspace(0.0, problem.H, resolution), indexing="ij")
    return np.column_stack([gx.ravel(), gy.ravel()])


def _exact(problem: Problem, K: int) -> tuple[np.ndarray, list[str], list[Any]]:
    if isinstance(problem, BeamProblem):
        omega = analytic.beam_exact_frequencies(problem, K)
        return omega, [str(n) for n in range(1, K + 1)], list(range(1, K + 1))
    spectrum = analytic.cavity_exact_spectrum(problem.L, problem.H, problem.c, K)
    return (np.array([w for w, _ in spectrum]), [f"({m},{n})" for _, (m, n) in spectrum],
            [mn for _, mn in spectrum])


def _oracle_samples(problem: Problem, key: Any, grid: np.ndarray) -> np.ndarray:
    if isinstance(problem, BeamProblem):
        raw = analytic.beam_exact_mode(problem.bc, key, grid[:, 0], problem.L, normalize=False)
    else:
        raw = analytic.cavity_exact_mode(key[0], key[1], grid[:, 0], grid[:, 1], problem.L, problem.H)
    return raw / np.max(np.abs(raw))


def _degenerate_groups(omega: np.ndarray) -> list[list[int]]:
    groups: list[list[int]] = [[0]]
    for k in range(1, omega.size):
        if abs(omega[k] - omega[groups[-1][-1]]) <= DEGENERACY_RTOL * omega[k]:
            groups[-1].append(k)
        else:
            groups.append([k])
    return groups


def run(config: RunConfig) -> RunReport:
    """Execute one eigen-analysis and compare against the analytic oracle."""
    config.validate()
    problem = config.build_problem()
    spec = config.basis()
    K = config.modes
    timings: dict[str, float] = {}

    t0 = time.perf_counter()
    if isinstance(problem, BeamProblem):
        interior = generate_interior(problem, config.nx, spec)
        dm = assemble_design(spec, problem, interior, workers=config.workers)
    else:
        counts = (config.nx, config.ny or config.nx)
        if config.tensor_assembly:
            dm = assemble_design_tensor(spec, problem, open_grid(problem.L, counts[0]),
                                        open_grid(problem.H, counts[1]))
        else:
            interior = generate_interior(problem, counts, spec)
            dm = assemble_design(spec, problem, interior, workers=config.workers)
    timings["assembly"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    constraints = boundary_constraints(problem, spec, config.boundary_points)
    amap = nullspace_map(assemble_boundary(spec, constraints))
    try:
        system = reduce(dm, amap, ridge=config.ridge)
    except NotSPDError:
        logger.error("reduced Gram matrix not SPD; rerun with a ridge value to shift it")
        raise
    timings["projection"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    pairs = solve_gep(system, config.orientation)  # type: ignore[arg-type]
    modes = select_modes(pairs, problem, K, amap, zero_tol=config.zero_tol)
    if config.refine:
        modes = refine_modes(system, modes, amap, problem, pairs.eigenvalues,
                             config.orientation, iters=config.refine)  # type: ignore[arg-type]
    timings["eigensolve"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    grid = reporting_grid(problem, config.grid)
    samples = sample_modes(modes, spec, amap, grid)
    timings["reconstruction"] = time.perf_counter() - t0

    omega_exact, labels, keys = _exact(problem, K)
    abs_err, rel_err = analytic.frequency_errors(modes.frequencies, omega_exact)
    residuals = pair_residuals(system, modes)
    stationarity = pair_residuals(system, modes, system.S_red)

    shape_err: list[float | None] = [None] * K
    angles: dict[str, float] = {}
    aligned = [s.copy() for s in samples]
    for group in _degenerate_groups(omega_exact):
        oracles = [_oracle_samples(problem, keys[k], grid) for k in group]
        if len(group) == 1:
            k = group[0]
            aligned[k] = align_sign(samples[k], oracles[0])
            shape_err[k] = float(np.max(np.abs(aligned[k] - oracles[0])))
        else:
            ang = subspace_angles(np.column_stack([samples[k] for k in group]), np.column_stack(oracles))
            angles["+".join(labels[k] for k in group)] = float(np.max(ang))

    rows = [ModeRow(k + 1, float(modes.frequencies[k]), float(omega_exact[k]), float(abs_err[k]),
                    float(rel_err[k]), float(modes.eigenvalues[k]), labels[k], shape_err[k],
                    float(residuals[k]), float(stationarity[k])) for k in range(K)]
    return RunReport(
        name=config.name or config.problem,
        config=config.to_dict(),
        modes=rows,
        asymmetry=system.asymmetry,
        n_basis=spec.size,
        n_reduced=amap.dim,
        boundary_rank=amap.rank,
        n_retained=modes.n_retained,
        n_filtered=modes.n_filtered,
        ridge_shift=system.ridge_shift,
        subspace_angles=angles,
        timings=timings,
        grid=grid.tolist(),
        samples=[normalize_samples(s).tolist() for s in aligned],
    )


def _fmt(value: float) -> str:
    return repr(float(value))


def write_report(report: RunReport, out_dir: str | Path, modes_out: bool = False) -> Path:
    """Write ``report.json``, ``frequencies.csv`` and optionally ``mode_<k>.csv``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")
    with open(out / "frequencies.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for m in report.modes:
            writer.writerow([m.mode_index, _fmt(m.omega_predicted), _fmt(m.omega_exact),
                             _fmt(m.abs_error), _fmt(m.rel_error)])
    if modes_out:
        write_mode_samples(report, out)
    return out


def write_mode_samples(report: RunReport, out_dir: str | Path) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    dim = len(report.grid[0]) if report.grid else 1
    header = ["x", "value"] if dim == 1 else ["x", "y", "value"]
    paths = []
    for k, values in enumerate(report.samples, start=1):
        path = out / f"mode_{k}.csv"
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for point, v in zip(report.grid, values):
                writer.writerow([*map(_fmt, point), _fmt(v)])
        paths.append(path)
    return paths


def check_bounds(report: RunReport, case: str) -> list[str]:
    """Acceptance violations for a bench case (empty when it passes)."""
    freq_tol, shape_tol = BENCH_BOUNDS[case]
    issues = []
    if report.max_rel_error > freq_tol:
        issues.append(f"{case}: max relative frequency error {report.max_rel_error:.3e} > {freq_tol:.0e}")
    if report.max_shape_error > shape_tol:
        issues.append(f"{case}: max mode-shape error {report.max_shape_error:.3e} > {shape_tol:.0e}")
    return issues


def bench_all(out_dir: str | Path | None = None, modes_out: bool = False) -> tuple[list[RunReport], list[str]]:
    """Run the four bundled benchmarks; returns reports and acceptance violations."""
    reports, issues = [], []
    for case in BENCH_CASES:
        report = run(bundled_config(case))
        reports.append(report)
        issues.extend(check_bounds(report, case))
        if out_dir is not None:
            write_report(report, Path(out_dir) / case, modes_out)
    return reports, issues
