"""Command-line entry point ``cyclomon``.

Every subcommand reads an instance file, writes one JSON report to standard
output and returns an exit code: 0 success, 2 solver or iteration-limit
failure, 3 certification failure, 64 usage or parse error.
"""

from __future__ import annotations

import argparse
import csv
import itertools
import json
import sys

import numpy as np

from . import __version__
from .conjugate import (domain_sandwich_check, duality_gap_report, eval_conjugate,
                        pairing_dominance_scan)
from .core import CyclomonError
from .extension import IterationLimit, certify_extension, check_hypotheses, solve_extension
from .fitzpatrick import eval_fitz, fitz_values
from .monotonicity import (NotCyclicallyMonotone, is_cyclically_monotone, is_n_monotone,
                           rockafellar_potential)
from .serialize import (InstanceError, load_instance, make_report, tolerances_from_env,
                        write_report)

EXIT_OK = 0
EXIT_SOLVER = 2
EXIT_CERT = 3
EXIT_USAGE = 64

GRID_BUDGET = 10**6


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _parse_pair(text, d, flag):
    try:
        parts = json.loads("[" + text + "]")
    except ValueError:
        raise UsageError(f"{flag}: expected two JSON arrays such as \"[0.5],[0.5]\"") from None
    if len(parts) != 2 or any(not isinstance(p, list) or len(p) != d for p in parts):
        raise UsageError(f"{flag}: expected two arrays of length {d}")
    return np.array(parts[0], float), np.array(parts[1], float)


def _parse_point(text, d, flag):
    try:
        point = json.loads(text)
    except ValueError:
        raise UsageError(f"{flag}: expected a JSON array") from None
    if isinstance(point, (int, float)) and d == 1:
        point = [point]
    if not isinstance(point, list) or len(point) != d:
        raise UsageError(f"{flag}: expected an array of length {d}")
    return np.array(point, float)


def _order(args, inst):
    if args.n is None:
        return inst.n
    try:
        n = int(args.n)
    except ValueError:
        raise UsageError(f"--n: expected an integer or 'cyclic', got {args.n!r}") from None
    if n < 2:
        raise UsageError("--n must be at least 2")
    return n


def cmd_check(args, inst):
    if args.n == "cyclic":
        return cmd_cyclic(args, inst)
    n = _order(args, inst)
    rep = is_n_monotone(inst.graph, n, method=args.method or "maxplus", tol=inst.tolerances)
    verdict = "monotone" if rep.is_monotone else "not_monotone"
    return make_report("check", inst, verdict, list(rep.worst_cycle), rep.to_dict(),
                       seed=args.seed), EXIT_OK


def cmd_cyclic(args, inst):
    rep = is_cyclically_monotone(inst.graph, inst.tolerances)
    verdict = "cyclically_monotone" if rep.is_monotone else "not_cyclically_monotone"
    return make_report("cyclic", inst, verdict, list(rep.worst_cycle), rep.to_dict(),
                       seed=args.seed), EXIT_OK


def cmd_fitz(args, inst):
    if args.at is None:
        raise UsageError("fitz requires --at \"[x],[x_star]\"")
    n = _order(args, inst)
    x, xs = _parse_pair(args.at, inst.dimension, "--at")
    ev = eval_fitz(inst.graph, n, x, xs, method=args.method or "dp")
    values = {"n": n, "x": x, "x_star": xs, "value": ev.value,
              "pairing": float(x @ xs), "slope_x": ev.slope_x, "slope_xstar": ev.slope_xstar}
    return make_report("fitz", inst, "evaluated", list(ev.argmax_chain), values,
                       seed=args.seed), EXIT_OK


def cmd_conj(args, inst):
    if args.at is None:
        raise UsageError("conj requires --at \"[x_star],[x]\"")
    n = _order(args, inst)
    xs, x = _parse_pair(args.at, inst.dimension, "--at")
    cv = eval_conjugate(inst.graph, n, xs, x, inst.tolerances)
    witness = None
    if cv.finite:
        support = np.flatnonzero(cv.weights > 0)
        witness = {"chains": cv.pieces.chains[support].tolist(), "weights": cv.weights[support]}
    values = {"n": n, "x_star": xs, "x": x, "value": cv.value, "finite": cv.finite,
              "residual": cv.residual}
    return make_report("conj", inst, "finite" if cv.finite else "infinite", witness, values,
                       iterations=cv.pivots, seed=args.seed), EXIT_OK


def cmd_dominance(args, inst):
    n = _order(args, inst)
    scan = pairing_dominance_scan(inst.graph, n, args.samples or 1000, args.seed,
                                  inst.tolerances)
    witness = scan.to_dict()["violations"][:1] or None
    return make_report("dominance", inst, "no_violation_found" if scan.clean else "violated",
                       witness, scan.to_dict(), seed=args.seed), EXIT_OK


def cmd_sandwich(args, inst):
    n = _order(args, inst)
    rep = domain_sandwich_check(inst.graph, n, args.samples or 500, args.seed, inst.tolerances)
    return make_report("sandwich", inst, "holds" if rep.holds else "fails",
                       rep.to_dict()["failures"][:1] or None, rep.to_dict(),
                       seed=args.seed), EXIT_OK


def cmd_potential(args, inst):
    try:
        f = rockafellar_potential(inst.graph, args.base, inst.tolerances)
    except NotCyclicallyMonotone as exc:
        rep = exc.report
        return make_report("potential", inst, "not_cyclically_monotone",
                           list(rep.worst_cycle), rep.to_dict(), seed=args.seed), EXIT_OK
    values = {"base": args.base, "slopes": f.slopes, "intercepts": f.intercepts,
              "form": "f(x) = max_k <slopes[k], x> + intercepts[k]"}
    return make_report("potential", inst, "constructed", None, values, seed=args.seed), EXIT_OK


def cmd_hypotheses(args, inst):
    hyp = check_hypotheses(inst, args.samples or 200, args.seed)
    verdict = "applicable" if hyp.applicable_theorems else "not_applicable"
    return make_report("hypotheses", inst, verdict, list(hyp.applicable_theorems),
                       hyp.to_dict(), seed=args.seed), EXIT_OK


def cmd_extend(args, inst):
    hyp = check_hypotheses(inst, args.samples or 200, args.seed)
    try:
        res = solve_extension(inst, minimize=args.minimize, hypothesis=hyp)
    except IterationLimit as exc:
        res = exc.result
        return make_report("extend", inst, "iteration_limit", {"x": res.x, "x_star": res.x_star},
                           res.to_dict(), res.iterations, res.warnings, args.seed), EXIT_SOLVER
    code = EXIT_OK if res.certified else EXIT_CERT
    return make_report("extend", inst, "certified" if res.certified else "certification_failed",
                       {"x": res.x, "x_star": res.x_star}, res.to_dict(), res.iterations,
                       res.warnings, args.seed), code


def cmd_certify(args, inst):
    if args.x is None:
        raise UsageError("certify requires --x <point>")
    x = _parse_point(args.x, inst.dimension, "--x")
    rep = certify_extension(inst, x)
    values = rep.to_dict()
    values.update(x=x, x_star=inst.w_star - inst.B.matrix @ x)
    code = EXIT_OK if rep.is_monotone else EXIT_CERT
    return make_report("certify", inst, "monotone" if rep.is_monotone else "not_monotone",
                       list(rep.worst_cycle), values, seed=args.seed), code


def cmd_gap(args, inst):
    rep = duality_gap_report(inst, args.samples or 200, args.seed)
    ok = rep.gap <= 1e-6 and rep.pointwise_violations == 0
    return make_report("gap", inst, "closed" if ok else "open", None, rep.to_dict(),
                       rep.iterations, seed=args.seed), EXIT_OK


def _grid_axes(inst, per_axis):
    P, D = inst.graph.points, inst.graph.duals
    axes = []
    for M in (P, D):
        lo, hi = M.min(axis=0), M.max(axis=0)
        pad = 0.5 * np.maximum(hi - lo, 1.0)
        axes.extend(np.linspace(a - p, b + p, per_axis) for a, b, p in zip(lo, hi, pad))
    return axes


def cmd_sample_grid(args, inst):
    if args.grid is None:
        raise UsageError("sample-grid requires --grid <out.csv>")
    n = _order(args, inst)
    d = inst.dimension
    per_axis = args.samples or 11
    total = per_axis ** (2 * d)
    if total > GRID_BUDGET:
        raise UsageError(f"grid of {per_axis}^{2 * d} = {total} points exceeds {GRID_BUDGET}")
    pts = np.array(list(itertools.product(*_grid_axes(inst, per_axis))))
    vals = fitz_values(inst.graph, n, pts[:, :d], pts[:, d:])
    header = [f"x_{i + 1}" for i in range(d)] + [f"xstar_{i + 1}" for i in range(d)] + ["value"]
    with open(args.grid, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row, v in zip(pts, vals):
            writer.writerow([repr(float(t)) for t in row] + [repr(float(v))])
    values = {"n": n, "rows": int(total), "points_per_axis": per_axis, "path": args.grid,
              "columns": header}
    return make_report("sample-grid", inst, "written", None, values, seed=args.seed), EXIT_OK


COMMANDS = {
    "check": cmd_check,
    "cyclic": cmd_cyclic,
    "fitz": cmd_fitz,
    "conj": cmd_conj,
    "dominance": cmd_dominance,
    "sandwich": cmd_sandwich,
    "potential": cmd_potential,
    "hypotheses": cmd_hypotheses,
    "extend": cmd_extend,
    "certify": cmd_certify,
    "gap": cmd_gap,
    "sample-grid": cmd_sample_grid,
}


def build_parser():
    parser = _Parser(prog="cyclomon", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"cyclomon {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--instance", required=True, help="instance JSON file ('-' for stdin)")
        p.add_argument("--n", default=None, help="order n (or 'cyclic' for check)")
        p.add_argument("--at", default=None, help="query point as two JSON arrays")
        p.add_argument("--samples", type=int, default=None)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--grid", default=None, help="CSV output path for sample-grid")
        p.add_argument("--x", default=None, help="candidate point for certify")
        p.add_argument("--base", type=int, default=0, help="base index for potential")
        p.add_argument("--method", default=None, help="bruteforce|maxplus or naive|dp")
        p.add_argument("--minimize", action="store_true",
                       help="extend: minimize phi instead of stopping at the first certified point")
    return parser


def _read_instance(path):
    defaults = tolerances_from_env()
    if path == "-":
        return load_instance(sys.stdin.read(), defaults)
    try:
        with open(path, encoding="utf-8") as fh:
            return load_instance(fh, defaults)
    except OSError as exc:
        raise UsageError(f"--instance: {exc}") from None


def main(argv=None, stdout=None, stderr=None):
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        inst = _read_instance(args.instance)
        report, code = COMMANDS[args.command](args, inst)
    except (UsageError, InstanceError) as exc:
        print(f"cyclomon: error: {exc}", file=stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except CyclomonError as exc:
        print(f"cyclomon: solver error: {exc}", file=stderr)
        return EXIT_SOLVER
    except (ValueError, IndexError) as exc:
        print(f"cyclomon: error: {exc}", file=stderr)
        return EXIT_USAGE
    stdout.write(write_report(report))
    return code


if __name__ == "__main__":
    sys.exit(main())
