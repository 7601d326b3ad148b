"""Command-line front end.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 acceptance violation (``bench`` only).
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from pathlib import Path
from typing import Sequence

from .errors import ConfigurationError, DomainError, NumericalError, PielmError
from .pipeline import RunConfig, RunReport, bench_all, resolve_config, run, write_mode_samples, write_report

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_ACCEPTANCE = 0, 2, 3, 4


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pielm-modes", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, overrides: bool) -> None:
        p.add_argument("--out", type=Path, default=None, help="output directory")
        p.add_argument("--modes-out", action="store_true", help="write mode_<k>.csv sample files")
        if overrides:
            p.add_argument("--k", type=int, default=None, help="number of modes")
            p.add_argument("--degree", type=int, default=None, help="basis degree (all axes)")
            p.add_argument("--nx", type=int, default=None, help="interior points (per axis in 2D)")

    p_run = sub.add_parser("run", help="run one config (path or bundled name)")
    p_run.add_argument("config")
    common(p_run, True)
    p_modes = sub.add_parser("modes", help="run one config and write mode samples")
    p_modes.add_argument("config")
    common(p_modes, True)
    p_bench = sub.add_parser("bench", help="run the four bundled benchmarks")
    common(p_bench, False)
    return parser


def _apply_overrides(cfg: RunConfig, args: argparse.Namespace) -> RunConfig:
    changes = {}
    if args.k is not None:
        changes["modes"] = args.k
    if args.degree is not None:
        changes["degree"] = args.degree
        if cfg.degree_y is not None:
            changes["degree_y"] = args.degree
    if args.nx is not None:
        changes["nx"] = args.nx
        if cfg.ny is not None:
            changes["ny"] = args.nx
    cfg = dataclasses.replace(cfg, **changes)
    cfg.validate()
    return cfg


def _print_report(report: RunReport, file=None) -> None:
    file = file or sys.stdout
    print(f"# {report.name}: N_phi={report.n_basis} r={report.n_reduced} "
          f"retained={report.n_retained} filtered={report.n_filtered} "
          f"asymmetry={report.asymmetry:.3e}", file=file)
    print(f"{'mode':>4} {'label':>6} {'omega_pred':>16} {'omega_exact':>16} {'rel_error':>10} {'shape_err':>10}",
          file=file)
    for m in report.modes:
        shape = "-" if m.shape_error is None else f"{m.shape_error:.2e}"
        print(f"{m.mode_index:>4} {m.label:>6} {m.omega_predicted:16.8e} {m.omega_exact:16.8e} "
              f"{m.rel_error:10.2e} {shape:>10}", file=file)


def _category(exc: Exception) -> tuple[str, int]:
    if isinstance(exc, (ConfigurationError, DomainError)):
        return "config", EXIT_CONFIG
    if isinstance(exc, NumericalError):
        return "numerical", EXIT_NUMERICAL
    return "error", EXIT_NUMERICAL


def main(argv: Sequence[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    level = logging.ERROR - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "bench":
            reports, issues = bench_all(args.out or Path("bench_out"), args.modes_out)
            for report in reports:
                _print_report(report)
            rows = sum(len(r.modes) for r in reports)
            total = sum(sum(r.timings.values()) for r in reports)
            print(f"# {len(reports)} reports, {rows} frequency rows, {total:.3f} s")
            for issue in issues:
                print(f"acceptance violation: {issue}", file=sys.stderr)
            return EXIT_ACCEPTANCE if issues else EXIT_OK
        cfg = _apply_overrides(resolve_config(args.config), args)
        report = run(cfg)
        out = args.out or Path(cfg.output_dir or f"{cfg.name or cfg.problem}_out")
        write_report(report, out, modes_out=args.modes_out)
        if args.command == "modes":
            for path in write_mode_samples(report, out):
                print(path)
        _print_report(report)
        return EXIT_OK
    except PielmError as exc:
        category, code = _category(exc)
        print(f"error[{category}]: {exc}", file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
