"""Command-line front end.

Every command prints one JSON report on standard output and exits with 0
(holds), 1 (fails), 2 (unknown), 64 (usage error) or 65 (data error).
"""
import argparse
import hashlib
import json
import sys
import time
from fractions import Fraction

import numpy as np

from . import linalg as la
from .checks import check_instance_ps_uniqueness, check_right_identifiability
from .errors import CapExceeded, EnumerationBudgetExceeded, ParseError, PreconditionNotMet
from .gaussian import GaussianRational
from .io import format_entry, format_matrix, format_support, parse_family, parse_pair_family, \
    read_matrix, read_support_tuple
from .lifting import FactorPair
from .oracle import NOT_UNIQUE, UNIQUE, oracle_A_injectivity, oracle_kruskal_rank, \
    oracle_right_identifiability
from .supports import ColumnSparse, GlobalSparse, Intersection, RowSparse, \
    SupportMatrix, SupportPair
from .uniform import uniform_emd_fixed_support, uniform_right_classical, \
    uniform_right_identifiability
from .verdict import FactorCounterexample, Status, TupleCounterexample, Verdict

EXIT_USAGE = 64
EXIT_DATA = 65


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ------------------------------------------------------------ reporting

def _lines(M):
    return format_matrix(M).splitlines()


def jsonable(obj):
    """Plain JSON structure for report values."""
    if isinstance(obj, Verdict):
        return {"status": obj.status.value, "provenance": list(obj.provenance),
                "witness": jsonable(obj.witness), "details": jsonable(obj.details)}
    if isinstance(obj, FactorCounterexample):
        return {"type": "factor pair", "original": jsonable(obj.original),
                "alternative": jsonable(obj.alternative)}
    if isinstance(obj, TupleCounterexample):
        return {"type": "rank-one tuple",
                "original": [_lines(M) for M in obj.original],
                "alternative": [_lines(M) for M in obj.alternative]}
    if isinstance(obj, FactorPair):
        return {"X": _lines(obj.X), "Y": _lines(obj.Y)}
    if isinstance(obj, SupportMatrix):
        return format_support(obj).splitlines()
    if isinstance(obj, SupportPair):
        return {"left": jsonable(obj.left), "right": jsonable(obj.right)}
    if isinstance(obj, la.Tolerance):
        return {"mode": obj.mode, "relative_eps": obj.relative_eps}
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _lines(obj) if obj.ndim == 2 else [jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, (complex, GaussianRational, Fraction)):
        return format_entry(obj)
    return obj


def _digest(path):
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def _emit(report, out):
    out.write(json.dumps(jsonable(report), sort_keys=True, indent=2) + "\n")


# -------------------------------------------------------------- helpers

def _tol(args):
    return la.Tolerance(args.tol, args.exact)


def _read(path, args):
    return read_matrix(path, exact=args.exact)


def _classical(family):
    """(kind, params) when the family is one of the Kruskal-rank kinds."""
    if isinstance(family, GlobalSparse):
        return "global", (family.param,)
    if isinstance(family, RowSparse):
        return "row", (family.param,)
    if isinstance(family, ColumnSparse):
        return "col", (family.param,)
    if isinstance(family, Intersection) and family.total is None \
            and family.row_caps is not None and family.col_caps is not None \
            and len(set(family.row_caps)) == 1 and len(set(family.col_caps)) == 1:
        return "rowcol", (family.row_caps[0], family.col_caps[0])
    return None


def _base(args, inputs):
    report = {"command": args.command,
              "inputs": {k: {"path": p, "sha256": _digest(p)} for k, p in inputs.items()},
              "tolerance": _tol(args)}
    if args.command == "check-instance" and args.oracle:
        report["seed"] = args.seed
    return report


# ------------------------------------------------------------- commands

def cmd_check_right(args):
    tol = _tol(args)
    X, Y = _read(args.x, args), _read(args.y, args)
    theta = parse_family(args.family, *Y.shape)
    verdict = check_right_identifiability(FactorPair(X, Y), theta, tol, args.budget)
    report = _base(args, {"x": args.x, "y": args.y})
    report.update(family=theta.label, verdict=verdict)
    return verdict.status.exit_code, report


def cmd_check_instance(args):
    tol = _tol(args)
    X, Y = _read(args.x, args), _read(args.y, args)
    family = parse_pair_family(args.family, X.shape, Y.shape)
    trials = args.trials if args.oracle else 0
    verdict = check_instance_ps_uniqueness(FactorPair(X, Y), family, tol, args.budget,
                                           search_trials=trials, seed=args.seed)
    report = _base(args, {"x": args.x, "y": args.y})
    report.update(family=family.label, verdict=verdict)
    if args.oracle:
        report["trials"] = args.trials
    return verdict.status.exit_code, report


def cmd_uniform(args):
    tol = _tol(args)
    if args.emd:
        supports = read_support_tuple(args.emd)
        ok = uniform_emd_fixed_support(supports)
        oracle = oracle_A_injectivity(supports, tol)
        status = Status.HOLDS if ok else Status.FAILS
        if (oracle.verdict == UNIQUE) != ok:
            status = Status.UNKNOWN
        verdict = Verdict(status, oracle.counterexample, ("disjoint rank-one supports",), tol,
                          {"oracle": oracle.verdict})
        report = _base(args, {"supports": args.emd})
        report.update(verdict=verdict)
        return verdict.status.exit_code, report
    if args.x is None or args.family is None:
        raise UsageError("uniform needs X and a family, or --emd")
    X = _read(args.x, args)
    n = args.n
    theta = parse_family(args.family, n, X.shape[1])
    classical = _classical(theta)
    if classical is not None:
        verdict = uniform_right_classical(X, classical[0], classical[1], n, tol, args.budget)
    else:
        verdict = uniform_right_identifiability(X, theta, tol, args.budget)
    report = _base(args, {"x": args.x})
    report.update(family=theta.label, n=n, verdict=verdict)
    return verdict.status.exit_code, report


def cmd_krank(args):
    tol = _tol(args)
    X = _read(args.x, args)
    value = la.kruskal_rank(X, tol)
    report = _base(args, {"x": args.x})
    report["krank"] = value
    code = 0
    if args.oracle:
        other = oracle_kruskal_rank(X, tol)
        report["oracle_krank"] = other
        code = 0 if other == value else 1
    return code, report


def cmd_oracle(args):
    tol = _tol(args)
    X, Y = _read(args.x, args), _read(args.y, args)
    theta = parse_family(args.family, *Y.shape)
    result = oracle_right_identifiability(FactorPair(X, Y), theta, tol, args.budget)
    report = _base(args, {"x": args.x, "y": args.y})
    report.update(family=theta.label, oracle={
        "verdict": result.verdict, "method": result.method,
        "solutions_examined": result.solutions_examined,
        "counterexample": result.counterexample, "details": result.details})
    code = {UNIQUE: 0, NOT_UNIQUE: 1}.get(result.verdict, 2)
    return code, report


# --------------------------------------------------------------- parser

def _add_common(p):
    p.add_argument("--tol", type=float, default=1e-10, help="relative tolerance (float mode)")
    p.add_argument("--exact", action="store_true", help="exact Gaussian-rational arithmetic")
    p.add_argument("--budget", type=int, default=None, help="enumeration budget")
    p.add_argument("--trials", type=int, default=1000, help="randomized search trials")
    p.add_argument("--seed", type=int, default=0, help="randomized search seed")
    p.add_argument("--timing", action="store_true", help="add wall-clock time to the report")


def build_parser():
    parser = _Parser(prog="sfid", description="Identifiability checks for Z = X Y^T.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("check-right", help="right factor recovery with X fixed")
    p.add_argument("x")
    p.add_argument("y")
    p.add_argument("family", help="family spec for Y, e.g. col:k=2")
    _add_common(p)
    p.set_defaults(func=cmd_check_right)

    p = sub.add_parser("check-instance", help="uniqueness of (X, Y) in a pair family")
    p.add_argument("x")
    p.add_argument("y")
    p.add_argument("family", help="pair family spec <left>::<right>")
    p.add_argument("--oracle", action="store_true", help="run the randomized search too")
    _add_common(p)
    p.set_defaults(func=cmd_check_instance)

    p = sub.add_parser("uniform", help="uniform right identifiability or tuple recovery")
    p.add_argument("x", nargs="?")
    p.add_argument("family", nargs="?", help="family spec for Y")
    p.add_argument("--n", type=int, default=2, help="number of rows of Y")
    p.add_argument("--emd", metavar="SUPPORTS", help="rank-one support tuple file")
    _add_common(p)
    p.set_defaults(func=cmd_uniform)

    p = sub.add_parser("krank", help="Kruskal rank")
    p.add_argument("x")
    p.add_argument("--oracle", action="store_true", help="cross-check by exhaustion")
    _add_common(p)
    p.set_defaults(func=cmd_krank)

    p = sub.add_parser("oracle", help="right identifiability by exhaustive solving")
    p.add_argument("x")
    p.add_argument("y")
    p.add_argument("family")
    _add_common(p)
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None, out=None, err=None):
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        if args.budget is not None and args.budget < 1:
            raise UsageError("--budget must be positive")
        if args.seed < 0:
            raise UsageError("--seed must be nonnegative")
        if not args.tol > 0:
            raise UsageError("--tol must be positive")
        start = time.perf_counter()
        code, report = args.func(args)
        if args.timing:
            report["timing_ms"] = round((time.perf_counter() - start) * 1000, 3)
    except UsageError as exc:
        err.write(f"sfid: usage error: {exc}\n")
        return EXIT_USAGE
    except (ParseError, PreconditionNotMet, CapExceeded, EnumerationBudgetExceeded,
            OSError) as exc:
        err.write(f"sfid: data error: {exc}\n")
        return EXIT_DATA
    _emit(report, out)
    return code


if __name__ == "__main__":
    sys.exit(main())
