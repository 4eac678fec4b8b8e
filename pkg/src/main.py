"""
main.py
Command-line front end of the noncommuting hydrogenlike-atom solver.

Run:
    python src/main.py solve --n 1 --l 0 --alphaZ 7.29735e-3
    python src/main.py sweep --n 1 --l 0 --min 0.01 --max 0.5 --steps 50 --output results/energy_10.csv
    python src/main.py critical --n 2 --l 0

Standard output (or --output) carries only the JSON / CSV payload; logs and
sweep reports go to standard error.

Exit codes
----------
    0  success
    1  usage or validation error
    2  no bound state
    3  oracle disagreement
"""

import argparse
import json
import logging
import os
import sys
from functools import partial

# Allow imports from the same src/ directory
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import numpy as np

from config import resolve
from coulomb_model import (
    Coupling,
    QuantumNumbers,
    critical_coupling,
    defect_minimum,
    rhs_curve,
)
from errors import (
    DegenerateEpsilon,
    GridTooSmall,
    IterationDiverged,
    ModelError,
    NoBoundState,
)
from output import FORMATS, write_object, write_table
from radial_oracle import solve_coulomb_oracle
from spectrum import (
    DEFAULT_CANDIDATES,
    MassPair,
    angular_coefficients,
    commutator_table,
    energy_model,
    level_splitting,
    solve_level,
)
from sweep import (
    GROUND_STATE_COLUMNS,
    LEVEL_COLUMNS,
    SweepRunner,
    coupling_grid,
    epsilon_columns,
    epsilon_row,
    ground_state_row,
    level_row,
)

logger = logging.getLogger("main")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NO_BOUND_STATE = 2
EXIT_ORACLE_MISMATCH = 3

ORACLE_ENERGY_TOL = 1e-8       # relative
ORACLE_EPSILON_TOL = 1e-7      # absolute


class _Parser(argparse.ArgumentParser):
    """argparse with the usage-error exit code of this tool."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# ----------------------------------------------------------------------------------
# Argument helpers
# ----------------------------------------------------------------------------------

def _parse_state(token: str) -> QuantumNumbers:
    """'2:1' or '21' -> QuantumNumbers(2, 1)."""
    token = token.strip()
    try:
        if ":" in token:
            n, l = token.split(":", 1)
        elif len(token) == 2 and token.isdigit():
            n, l = token[0], token[1]
        else:
            raise ValueError(token)
        return QuantumNumbers(int(n), int(l))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"invalid state {token!r}: use n:l, e.g. 2:1") from exc


def _parse_states(text: str) -> tuple[QuantumNumbers, ...]:
    states = tuple(_parse_state(t) for t in text.split(",") if t.strip())
    if not states:
        raise argparse.ArgumentTypeError("at least one state is required")
    return states


def _common_options() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--output", default=None, help="output file (default: standard output)")
    common.add_argument("--format", choices=FORMATS, default=None,
                        help="csv or json (default: csv for tables, json for single results)")
    common.add_argument("--quad-tol", type=float, default=None, help="relative quadrature tolerance")
    common.add_argument("--root-tol", type=float, default=None, help="eta root bracket width")
    common.add_argument("--crit-tol", type=float, default=None, help="critical coupling bisection width")
    common.add_argument("--threads", type=int, default=None, help="worker processes for sweeps")
    common.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    return common


def _add_state(p, with_coupling: bool = True) -> None:
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--l", type=int, required=True)
    if with_coupling:
        p.add_argument("--alphaZ", type=float, required=True)


def _add_range(p, lo: float, hi: float, steps: int) -> None:
    p.add_argument("--min", dest="lo", type=float, default=lo, help=f"smallest alphaZ (default {lo})")
    p.add_argument("--max", dest="hi", type=float, default=hi, help=f"largest alphaZ (default {hi})")
    p.add_argument("--steps", type=int, default=steps, help=f"grid points (default {steps})")


def build_parser() -> argparse.ArgumentParser:
    common = _common_options()
    parser = _Parser(prog="ncqm", description="Hydrogenlike atom with noncommuting two-particle operators")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", parents=[common], help="epsilon and energies of one state")
    _add_state(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("sweep", parents=[common], help="energies of one state over alphaZ")
    _add_state(p, with_coupling=False)
    _add_range(p, 0.01, 0.5, 50)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("rhs-curve", parents=[common], help="g(eta) on a uniform eta grid")
    _add_state(p)
    p.add_argument("--eta-min", type=float, default=0.01)
    p.add_argument("--eta-max", type=float, default=1.0)
    p.add_argument("--points", type=int, default=200)
    p.set_defaults(func=cmd_rhs_curve)

    p = sub.add_parser("epsilon-sweep", parents=[common], help="epsilon of several states over alphaZ")
    p.add_argument("--states", type=_parse_states, default=DEFAULT_CANDIDATES,
                   help="comma separated n:l list (default 1:0,2:0,2:1)")
    _add_range(p, 0.01, 1.4, 140)
    p.set_defaults(func=cmd_epsilon_sweep)

    p = sub.add_parser("critical", parents=[common], help="critical coupling of one state")
    _add_state(p, with_coupling=False)
    p.set_defaults(func=cmd_critical)

    p = sub.add_parser("ground-state", parents=[common], help="ground state over alphaZ")
    p.add_argument("--candidates", type=_parse_states, default=DEFAULT_CANDIDATES,
                   help="comma separated n:l list (default 1:0,2:0,2:1)")
    _add_range(p, 0.01, 1.5, 150)
    p.set_defaults(func=cmd_ground_state)

    p = sub.add_parser("oracle-check", parents=[common], help="analytic vs numerical self-consistent state")
    _add_state(p)
    p.set_defaults(func=cmd_oracle_check)

    p = sub.add_parser("splitting", parents=[common], help="sublevels l = 0..n-1 of shell n")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--alphaZ", type=float, required=True)
    p.set_defaults(func=cmd_splitting)

    p = sub.add_parser("brackets", parents=[common], help="quantum Poisson brackets and C_kn coefficients")
    p.add_argument("--m1", type=float, default=1.0)
    p.add_argument("--m2", type=float, default=1.0)
    p.add_argument("--epsilon", type=float, default=None, help="use this epsilon instead of solving")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--l", type=int, default=None)
    p.add_argument("--alphaZ", type=float, default=None)
    p.set_defaults(func=cmd_brackets)

    return parser


# ----------------------------------------------------------------------------------
# Output helpers
# ----------------------------------------------------------------------------------

def _emit_object(obj: dict, args) -> None:
    flat = all(not isinstance(v, (dict, list, tuple)) for v in obj.values())
    if args.format == "csv" and flat:
        write_table([obj], list(obj), "csv", args.output)
    else:
        write_object(obj, args.output)


def _emit_table(rows, columns, args) -> None:
    write_table(rows, columns, args.format or "csv", args.output)


def _run_sweep(name: str, args, row_function, columns) -> int:
    runner = SweepRunner(name, coupling_grid(args.lo, args.hi, args.steps), row_function,
                         threads=args.tolerances.threads)
    runner.run()
    _emit_table(runner.table(), columns, args)
    runner.summary()
    if runner.metrics.missing_rows:
        logger.warning("%d of %d rows have no bound state", runner.metrics.missing_rows,
                       runner.metrics.total_rows)
    return EXIT_OK


# ----------------------------------------------------------------------------------
# Subcommands
# ----------------------------------------------------------------------------------

def cmd_solve(args) -> int:
    tol = args.tolerances
    qn, c = QuantumNumbers(args.n, args.l), Coupling(args.alphaZ)
    result = solve_level(qn, c, tol.quadrature, tol.root_tol)
    logger.info("%s at alphaZ=%g: epsilon=%.6e (%s)", qn, c.alphaZ, result.epsilon,
                result.solution.branch.value)
    _emit_object(result.as_dict(), args)
    return EXIT_OK


def cmd_sweep(args) -> int:
    tol = args.tolerances
    qn = QuantumNumbers(args.n, args.l)
    row = partial(level_row, qn=qn, quad=tol.quadrature, tol=tol.root_tol)
    return _run_sweep(f"energy {qn}", args, row, LEVEL_COLUMNS)


def cmd_rhs_curve(args) -> int:
    tol = args.tolerances
    qn, c = QuantumNumbers(args.n, args.l), Coupling(args.alphaZ)
    if not 0.0 < args.eta_min < args.eta_max <= 1.0:
        raise ValueError(f"eta range must satisfy 0 < eta-min < eta-max <= 1, got [{args.eta_min}, {args.eta_max}]")
    if args.points < 2:
        raise ValueError(f"--points must be >= 2, got {args.points}")
    etas = np.linspace(args.eta_min, args.eta_max, args.points)
    values = rhs_curve(etas, qn, c, tol.quadrature)
    dip = defect_minimum(qn, c, tol.quadrature)
    logger.info("%s at alphaZ=%g: min of eta - g(eta) = %.3e at eta=%.6f", qn, c.alphaZ, dip.value, dip.x)
    rows = [{"eta": float(e), "g_eta": float(g)} for e, g in zip(etas, values)]
    _emit_table(rows, ("eta", "g_eta"), args)
    return EXIT_OK


def cmd_epsilon_sweep(args) -> int:
    tol = args.tolerances
    states = tuple(args.states)
    row = partial(epsilon_row, states=states, quad=tol.quadrature, tol=tol.root_tol)
    return _run_sweep("epsilon", args, row, epsilon_columns(states))


def cmd_critical(args) -> int:
    tol = args.tolerances
    qn = QuantumNumbers(args.n, args.l)
    c = critical_coupling(qn, tol.crit_tol, tol.quadrature)
    logger.info("critical coupling of %s: %.7f", qn, c.alphaZ)
    _emit_object({"n": qn.n, "l": qn.l, "alphaZ_c": c.alphaZ}, args)
    return EXIT_OK


def cmd_ground_state(args) -> int:
    tol = args.tolerances
    row = partial(ground_state_row, candidates=tuple(args.candidates), quad=tol.quadrature,
                  tol=tol.root_tol)
    return _run_sweep("ground state", args, row, GROUND_STATE_COLUMNS)


def _oracle_side(solve):
    try:
        return solve()
    except (NoBoundState, IterationDiverged, GridTooSmall) as exc:
        logger.info("no bound state: %s", exc)
        return None


def cmd_oracle_check(args) -> int:
    tol = args.tolerances
    qn, c = QuantumNumbers(args.n, args.l), Coupling(args.alphaZ)
    analytic = _oracle_side(lambda: solve_level(qn, c, tol.quadrature, tol.root_tol))
    numeric = _oracle_side(lambda: solve_coulomb_oracle(qn, c))

    report = {
        "n": qn.n, "l": qn.l, "alphaZ": c.alphaZ,
        "exists_analytic": analytic is not None,
        "exists_numeric": numeric is not None,
        "epsilon_analytic": None, "epsilon_numeric": None,
        "energy_analytic": None, "energy_numeric": None,
        "diff_epsilon": None, "rel_diff_epsilon": None, "rel_diff_energy": None,
        "iterations": None,
    }
    if analytic is not None and numeric is not None:
        e_analytic = energy_model(qn, c, analytic.epsilon)
        e_numeric = numeric.eigenstate.eigenvalue
        diff = abs(numeric.epsilon - analytic.epsilon)
        report.update(
            epsilon_analytic=analytic.epsilon,
            epsilon_numeric=numeric.epsilon,
            energy_analytic=e_analytic,
            energy_numeric=e_numeric,
            diff_epsilon=diff,
            rel_diff_epsilon=diff / analytic.epsilon if analytic.epsilon > 0.0 else None,
            rel_diff_energy=abs(e_numeric - e_analytic) / abs(e_analytic),
            iterations=numeric.iterations,
        )
        agreement = diff < ORACLE_EPSILON_TOL and report["rel_diff_energy"] < ORACLE_ENERGY_TOL
    else:
        agreement = analytic is None and numeric is None
    report["agreement"] = agreement

    _emit_object(report, args)
    if not agreement:
        logger.error("analytic and numerical solutions disagree for %s at alphaZ=%g", qn, c.alphaZ)
        return EXIT_ORACLE_MISMATCH
    return EXIT_OK


def cmd_splitting(args) -> int:
    tol = args.tolerances
    report = level_splitting(args.n, Coupling(args.alphaZ), tol.quadrature, tol.root_tol)
    write_object(report.as_dict(), args.output)
    return EXIT_OK


def cmd_brackets(args) -> int:
    tol = args.tolerances
    masses = MassPair(args.m1, args.m2)
    if args.epsilon is not None:
        epsilon = args.epsilon
    elif None not in (args.n, args.l, args.alphaZ):
        qn, c = QuantumNumbers(args.n, args.l), Coupling(args.alphaZ)
        epsilon = solve_level(qn, c, tol.quadrature, tol.root_tol).epsilon
    else:
        raise ValueError("brackets needs --epsilon or all of --n, --l, --alphaZ")

    try:
        coefficients = angular_coefficients(masses, epsilon).as_dict()
    except DegenerateEpsilon:
        coefficients = None
    write_object({
        "m1": masses.m1,
        "m2": masses.m2,
        "total_mass": masses.total_mass,
        "reduced_mass": masses.reduced_mass,
        "epsilon": epsilon,
        "commutators": commutator_table(masses, epsilon).as_dict(),
        "angular_coefficients": coefficients,
    }, args.output)
    return EXIT_OK


# ----------------------------------------------------------------------------------
# Entry point
# ----------------------------------------------------------------------------------

def configure_logging(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="[%(name)s] %(message)s",
        stream=sys.stderr,
        force=True,
    )


def _state_context(args) -> dict:
    return {k: getattr(args, k) for k in ("n", "l", "alphaZ") if getattr(args, k, None) is not None}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.verbose)

    try:
        args.tolerances = resolve(
            quad_tol=args.quad_tol, root_tol=args.root_tol,
            crit_tol=args.crit_tol, threads=args.threads,
        )
        return args.func(args)
    except NoBoundState as exc:
        error = {"error": "no bound state", "detail": str(exc), **_state_context(args)}
        print(json.dumps(error), file=sys.stderr)
        return EXIT_NO_BOUND_STATE
    except (ValueError, ModelError) as exc:
        print(f"{parser.prog} {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
