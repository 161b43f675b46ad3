"""Command-line entry point.

Exit status: 0 on success, 2 when the system is not observable, 3 on any
parse, validation or usage error (and on numerical failures).
"""

import argparse
import re
import sys
from pathlib import Path

from . import docfile
from .charpoly import MonicPoly, char_poly, poly_from_roots
from .densemat import max_abs
from .errors import NotObservableError, ObscanonError
from .observer import design_observer
from .realizations import (
    build_P,
    dualize,
    is_observable,
    observability_matrix,
    observer_form_matrices,
    to_observability_form,
    to_observer_form,
)
from .sim import estimate_decay_rate, simulate


EXIT_OK = 0
EXIT_NOT_OBSERVABLE = 2
EXIT_INVALID = 3

COMMANDS = ("charpoly", "check-obsv", "obsv-form", "observer-form", "trace",
            "design", "simulate", "dual")

# Flags whose values commonly start with "-" (negative numbers).
_VALUE_FLAGS = ("--poles", "--desired-coeffs", "--x0", "--xhat0")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--system", required=True, help="system document (JSON)")
    common.add_argument("--out", help="write the result document here instead of stdout")
    common.add_argument("--canonical-snap", action="store_true",
                        help="snap structural companion entries to exact 0/1")
    common.add_argument("--tol", type=float, default=0.0,
                        help="rank tolerance for the observability test (0 = automatic)")

    parser = _Parser(prog="obscanon",
                     description="Observability/observer canonical forms and observer design.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    helps = {
        "charpoly": "characteristic polynomial of A",
        "check-obsv": "observability rank test",
        "obsv-form": "observability companion realization",
        "observer-form": "observer companion realization (direct route)",
        "trace": "elementary step chain from observability to observer form",
        "design": "Luenberger gain by pole placement",
        "simulate": "RK4 simulation of plant and observer",
        "dual": "dual system (A^T, C^T, B^T)",
    }
    subs = {name: sub.add_parser(name, parents=[common], help=helps[name])
            for name in COMMANDS}
    g = subs["design"].add_mutually_exclusive_group(required=True)
    g.add_argument("--poles", help="comma-separated poles; complex as a+bi,a-bi or a±bi")
    g.add_argument("--desired-coeffs", help="comma-separated a0,a1,...,a(n-1)")
    s = subs["simulate"]
    s.add_argument("--gain-file", required=True,
                   help="result of `design`, or a document with an \"L\" array")
    s.add_argument("--x0", required=True, help="comma-separated initial state")
    s.add_argument("--xhat0", help="comma-separated initial estimate (default zeros)")
    s.add_argument("--dt", type=float, default=1e-3)
    s.add_argument("--steps", type=int, default=10000)
    s.add_argument("--csv", help="write the trajectory as CSV here")
    return parser


def _join_value_flags(argv):
    out = []
    it = iter(argv)
    for a in it:
        if a in _VALUE_FLAGS:
            nxt = next(it, None)
            out.append(a if nxt is None else f"{a}={nxt}")
        else:
            out.append(a)
    return out


def parse_floats(text, name):
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"{name}: expected comma-separated numbers, got {text!r}") from None


def parse_poles(text):
    """Parse ``-1,-2,-1+2i,-1-2i`` or ``-1±2i`` into a list of complex roots."""
    roots = []
    for tok in (t.strip() for t in text.split(",")):
        if not tok:
            continue
        if "±" in tok or "+-" in tok:
            m = re.fullmatch(r"([^±]+?)\s*(?:±|\+-)\s*([0-9.eE+-]*)[ij]", tok)
            if not m:
                raise UsageError(f"--poles: cannot parse {tok!r}")
            re_part = float(m.group(1))
            im = float(m.group(2) or 1.0)
            roots += [complex(re_part, im), complex(re_part, -im)]
            continue
        try:
            roots.append(complex(tok.replace("i", "j")))
        except ValueError:
            raise UsageError(f"--poles: cannot parse {tok!r}") from None
    return roots


def _load_gain(path, n):
    doc = docfile.loads(Path(path).read_text())
    payload = doc.get("payload", doc) if isinstance(doc, dict) else doc
    if isinstance(payload, dict) and "gain" in payload:
        value = payload["gain"]
    elif isinstance(payload, dict) and "L" in payload:
        value = payload["L"]
    else:
        value = payload
    return docfile.parse_matrix(value, "gain", (n, 1))


def _transform_doc(t):
    return {"provenance": t.provenance, "T": docfile.matrix_doc(t.T),
            "Tinv": docfile.matrix_doc(t.Tinv), "residual": t.residual}


def run(args):
    """Execute a parsed command; returns (exit code, payload)."""
    system = docfile.parse_system(args.system)
    cmd = args.command
    if cmd == "charpoly":
        return EXIT_OK, {"charpoly": docfile.poly_doc(char_poly(system.A))}
    if cmd == "check-obsv":
        rep = is_observable(system, args.tol)
        payload = {"observable": rep.observable, "n": system.n, "rank": rep.rank,
                   "condition": rep.condition,
                   "observability_matrix": docfile.matrix_doc(observability_matrix(system))}
        return (EXIT_OK if rep.observable else EXIT_NOT_OBSERVABLE), payload
    if cmd == "obsv-form":
        out, t = to_observability_form(system, args.tol, snap=args.canonical_snap)
        return EXIT_OK, {"system": docfile.system_doc(out), "transform": _transform_doc(t),
                         "charpoly": docfile.poly_doc(MonicPoly(-out.A[-1, :]))}
    if cmd == "observer-form":
        res = to_observer_form(system, args.tol, snap=args.canonical_snap)
        return EXIT_OK, {
            "system": docfile.system_doc(res.system),
            "transform": _transform_doc(res.transform),
            "P": _transform_doc(build_P(res.charpoly)),
            "charpoly": docfile.poly_doc(res.charpoly),
        }
    if cmd == "trace":
        res = to_observer_form(system, args.tol)
        trace = res.trace
        target, _ = observer_form_matrices(trace.charpoly)
        return EXIT_OK, {
            "charpoly": docfile.poly_doc(trace.charpoly),
            "steps": [{"m": s.m, "A": docfile.matrix_doc(s.A), "P": docfile.matrix_doc(s.P),
                       "C": docfile.matrix_doc(s.C)} for s in trace.steps],
            "final_residual": max_abs(trace.final - target),
            "product_residual": max_abs(trace.product() - build_P(trace.charpoly).T),
        }
    if cmd == "design":
        if args.poles is not None:
            desired = poly_from_roots(parse_poles(args.poles))
        else:
            desired = MonicPoly(parse_floats(args.desired_coeffs, "--desired-coeffs"))
        d = design_observer(system, desired, args.tol)
        return EXIT_OK, {
            "desired": docfile.poly_doc(d.desired),
            "plant": docfile.poly_doc(d.plant),
            "gain": docfile.matrix_doc(d.gain_original),
            "gain_observer": docfile.matrix_doc(d.gain_observer),
            "residual": d.residual,
            "condition": d.condition,
            "warnings": list(d.warnings),
        }
    if cmd == "simulate":
        L = _load_gain(args.gain_file, system.n)
        x0 = parse_floats(args.x0, "--x0")
        xhat0 = parse_floats(args.xhat0, "--xhat0") if args.xhat0 else [0.0] * system.n
        traj = simulate(system, L, x0, xhat0, args.dt, args.steps)
        if args.csv:
            with open(args.csv, "w", newline="") as fh:
                traj.write_csv(fh)
        try:
            rate = estimate_decay_rate(traj)
        except ObscanonError:
            rate = None
        return EXIT_OK, {
            "dt": traj.dt, "steps": args.steps, "final_time": float(traj.times[-1]),
            "initial_error_norm": float(traj.error_norms[0]),
            "final_error_norm": float(traj.error_norms[-1]),
            "decay_rate": rate, "csv": args.csv,
            "final_state": docfile.matrix_doc(traj.states[-1].reshape(-1, 1)),
            "final_estimate": docfile.matrix_doc(traj.estimates[-1].reshape(-1, 1)),
        }
    if cmd == "dual":
        return EXIT_OK, {"system": docfile.system_doc(dualize(system))}
    raise UsageError(f"unknown command {cmd!r}")


def main(argv=None, stdout=None, stderr=None):
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(_join_value_flags(argv))
    except UsageError as exc:
        print(exc, file=stderr)
        return EXIT_INVALID
    except SystemExit as exc:  # --help
        return int(exc.code or 0)

    try:
        code, payload = run(args)
    except NotObservableError as exc:
        code, payload = EXIT_NOT_OBSERVABLE, {"error": str(exc), "rank": exc.rank,
                                              "rank_deficit": exc.rank_deficit}
    except (ObscanonError, UsageError, OSError, ValueError) as exc:
        print(f"obscanon: error: {exc}", file=stderr)
        return EXIT_INVALID

    data = Path(args.system).read_bytes()
    doc = {"command": args.command, "argv": argv,
           "input": {"path": args.system, "digest": docfile.digest(data)},
           "payload": payload}
    text = docfile.dumps(doc)
    if args.out:
        Path(args.out).write_text(text)
    else:
        stdout.write(text)
    if code == EXIT_NOT_OBSERVABLE and "error" in payload:
        print(f"obscanon: {payload['error']}", file=stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
