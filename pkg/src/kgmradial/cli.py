"""Command-line entry point.

Exit codes: 0 success; 1 bad input or runtime error; 2 parameters fail the
admissibility check; 3 solver did not converge; 4 verification failures.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from .config import ConfigError, load_config, parse_config
from .errors import AdmissibilityError, DomainError
from .io import dumps_json, write_csv, write_json
from .params import alpha0, check_admissible

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INADMISSIBLE = 2
EXIT_UNCONVERGED = 3
EXIT_VERIFY_FAILED = 4

S_MIN = 1e-4


class _Parser(argparse.ArgumentParser):
    # usage errors share the generic error status; argparse's own 2 means "inadmissible" here
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", type=Path, help="TOML configuration file")
    common.add_argument("--out", type=Path, default=None, help="output directory (default: current directory)")
    common.add_argument("--format", choices=("json", "csv"), default=None, help="output format")
    common.add_argument("--R", type=float, help="domain radius")
    common.add_argument("--N", type=int, help="number of sine modes")
    common.add_argument("--tol", type=float, help="gradient-norm tolerance")
    common.add_argument("--max-iters", type=int, dest="max_iters", help="deformation step limit")
    common.add_argument("--seed-amplitude", type=float, dest="seed_amplitude")
    common.add_argument("--seed-width", type=float, dest="seed_width")

    parser = _Parser(prog="kgmradial", description="Radial Klein-Gordon-Maxwell toolkit")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("admissible", parents=[common], help="check the existence hypotheses")
    sub.add_parser("threshold-table", parents=[common], help="tabulate alpha0(s, Omega)")
    sub.add_parser("solve", parents=[common], help="mountain-pass solve")
    sub.add_parser("spectrum", parents=[common], help="eigenpairs and coercivity constants")
    sub.add_parser("verify", parents=[common], help="run the property suite")
    return parser


def _load(args):
    cfg = load_config(args.config) if args.config else parse_config(None)
    for key in ("R", "N"):
        val = getattr(args, key)
        if val is not None:
            cfg.grid[key] = val
    for key in ("tol", "max_iters", "seed_amplitude", "seed_width"):
        val = getattr(args, key)
        if val is not None:
            cfg.solver[key] = val
    return cfg


def _outdir(args) -> Path:
    out = args.out if args.out is not None else Path(".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_admissible(args, cfg) -> int:
    report = check_admissible(cfg.params())
    text = dumps_json(report.to_dict())
    sys.stdout.write(text)
    if args.out is not None:
        (_outdir(args) / "report.json").write_text(text)
    return EXIT_OK if report.admissible else EXIT_INADMISSIBLE


def threshold_rows(omegas, n_points):
    """Rows ``(s, Omega, alpha0, second difference)``; endpoint differences are NaN."""
    s = np.linspace(S_MIN, 1.0 - S_MIN, n_points)
    h = s[1] - s[0]
    rows = []
    for w in omegas:
        a = alpha0(s, w)
        d2 = np.full(n_points, np.nan)
        d2[1:-1] = (a[:-2] - 2.0 * a[1:-1] + a[2:]) / (h * h)
        rows.extend(zip(s, [w] * n_points, a, d2))
    return rows


def cmd_threshold_table(args, cfg) -> int:
    omegas, n = cfg.table_spec()
    rows = threshold_rows(omegas, n)
    out = _outdir(args)
    header = ("s", "omega_gap", "alpha0", "second_difference")
    if args.format == "json":
        write_json([dict(zip(header, r)) for r in rows], out / "threshold.json")
    else:
        write_csv(out / "threshold.csv", header, rows)
    return EXIT_OK


def cmd_solve(args, cfg) -> int:
    from .mountain_pass import mountain_pass_solve

    params, grid, options = cfg.params(), cfg.radial_grid(), cfg.solve_options()
    start = time.perf_counter()
    try:
        res = mountain_pass_solve(params, grid, options)
    except AdmissibilityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        if exc.report is not None:
            sys.stdout.write(dumps_json(exc.report.to_dict()))
        return EXIT_INADMISSIBLE
    elapsed = time.perf_counter() - start
    out = _outdir(args)
    write_json(res.to_dict(), out / "report.json")
    # wall time varies run to run, so it is kept out of report.json
    (out / "timing.json").write_text(json.dumps({"solve_seconds": elapsed}) + "\n")
    res.u.to_csv(out / "u.csv", header=("r", "u"))
    res.phi.to_csv(out / "phi.csv", header=("r", "phi"))
    return EXIT_OK if res.converged else EXIT_UNCONVERGED


def cmd_spectrum(args, cfg) -> int:
    from .spectrum import eigen_decomposition

    params, grid, K = cfg.params(), cfg.radial_grid(), cfg.spectrum_K()
    res = eigen_decomposition(params, K, grid)
    out = _outdir(args)
    write_json(res.to_dict(), out / "spectrum.json")
    if args.format == "csv":
        header = ["r"] + [f"e{i + 1}" for i in range(res.K)]
        cols = [f.values for f in res.eigenfields]
        write_csv(out / "eigenfields.csv", header, zip(grid.r, *cols))
    return EXIT_OK


def cmd_verify(args, cfg) -> int:
    from .verify import run_suite

    summary = run_suite(cfg.params(), cfg.radial_grid(), cfg.solve_options())
    write_json(summary, _outdir(args) / "verify.json")
    for name in summary["failures"]:
        print(f"FAIL {name}", file=sys.stderr)
    return EXIT_OK if summary["passed"] else EXIT_VERIFY_FAILED


COMMANDS = {
    "admissible": cmd_admissible,
    "threshold-table": cmd_threshold_table,
    "solve": cmd_solve,
    "spectrum": cmd_spectrum,
    "verify": cmd_verify,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _load(args)
        return COMMANDS[args.command](args, cfg)
    except (ConfigError, DomainError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except RuntimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
