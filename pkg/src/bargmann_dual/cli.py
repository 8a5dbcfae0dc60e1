"""Command-line front end.

Subcommands: transform, invert, inner, propagate, semiclassical, verify.
Complex numbers are written "a+bi" in flags and {"re": a, "im": b} in JSON.
Tables go to CSV, reports to JSON; ``--output`` files are written atomically.

Exit codes: 0 success, 2 invalid input, 3 numerical-contract failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile

import numpy as np

from . import conjugate as cj
from . import errors as er
from .bargmann import BargmannFunction
from .overlap import inner_conjugate_double, inner_conjugate_line, inner_mixed
from .propagators import (
    diagonal_trace_series,
    exact_ho_bargmann,
    exact_ho_conjugate,
    fock_propagator,
    matrix_element_conjugate,
)
from .semiclassical import (
    gradient_check,
    ho_hamiltonian,
    ksc_bargmann,
    ksc_conjugate,
    quadratic_hamiltonian,
    quartic_hamiltonian,
    saddle_residual,
    zero_hamiltonian,
)
from .states import (
    DEFAULT_TRUNCATION,
    FockCoefficients,
    OscillatorFrame,
    coherent_state,
    fock_basis_state,
    inner_series,
    momentum_eigenstate,
    position_eigenstate,
    random_state,
)
from .verify import SUITES, run_suite

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 2, 3

VALIDATION_ERRORS = (
    er.ParameterError, er.DomainError, er.SingularityError, er.ConvergenceRegionError,
    ValueError, KeyError, TypeError,
)
NUMERICAL_ERRORS = (
    er.AccuracyError, er.RootNotFound, er.ContractError, er.DegenerateSaddle, er.FocalPointError,
    er.EmptyTrajectorySum, er.IntegrationBlowUp, er.EvaluationError,
)


class UsageError(Exception):
    """Malformed command-line or configuration input."""


def parse_complex(text, field: str = "value") -> complex:
    """Accept "a+bi", "a-bj", "a", "bi", numbers, or {"re": a, "im": b}."""
    if isinstance(text, str) and text.strip().startswith("{"):
        try:
            text = json.loads(text)
        except json.JSONDecodeError as exc:
            raise UsageError(f"{field}: malformed JSON complex number {text!r}") from exc
    if isinstance(text, dict):
        try:
            return complex(float(text.get("re", 0.0)), float(text.get("im", 0.0)))
        except (TypeError, ValueError) as exc:
            raise UsageError(f"{field}: cannot read complex number {text!r}") from exc
    if isinstance(text, (int, float, complex)):
        return complex(text)
    s = str(text).strip().replace(" ", "").replace("i", "j")
    try:
        return complex(s)
    except ValueError as exc:
        raise UsageError(f"{field}: cannot read complex number {text!r}") from exc


def format_complex(z: complex) -> dict:
    return {"re": float(z.real), "im": float(z.imag)}


def _frame(desc) -> OscillatorFrame:
    desc = desc or {}
    try:
        return OscillatorFrame(float(desc.get("mass", 1.0)), float(desc.get("omega", 1.0)),
                               float(desc.get("hbar", 1.0)))
    except AttributeError as exc:
        raise UsageError("frame: expected an object with mass, omega, hbar") from exc


def build_state(desc) -> FockCoefficients:
    """State from a descriptor {"type", "params", "truncation", "frame"}."""
    if isinstance(desc, str):
        try:
            desc = json.loads(desc)
        except json.JSONDecodeError as exc:
            raise UsageError(f"state: malformed JSON ({exc.msg})") from exc
    if not isinstance(desc, dict) or "type" not in desc:
        raise UsageError("state: expected an object with a 'type' field")
    kind = desc["type"]
    params = desc.get("params", {}) or {}
    N = desc.get("truncation", DEFAULT_TRUNCATION)
    if not isinstance(N, int) or N < 0:
        raise UsageError("state.truncation: expected a non-negative integer")
    frame = _frame(desc.get("frame"))
    try:
        if kind == "fock":
            return fock_basis_state(int(params["n"]), N)
        if kind == "coherent":
            return coherent_state(parse_complex(params["z0"], "state.params.z0"), N,
                                  bool(params.get("normalized", False)))
        if kind == "position":
            return position_eigenstate(float(params["q"]), frame, N)
        if kind == "momentum":
            return momentum_eigenstate(float(params["p"]), frame, N)
        if kind == "random":
            return random_state(N, np.random.default_rng(int(params.get("seed", 0))))
        if kind == "coeffs":
            return FockCoefficients([parse_complex(c, "state.params.coeffs") for c in params["coeffs"]])
    except KeyError as exc:
        raise UsageError(f"state.params: missing field {exc.args[0]!r} for type {kind!r}") from exc
    raise UsageError(f"state.type: unknown state type {kind!r}")


def _points(values, field):
    out = []
    for v in values or []:
        if isinstance(v, dict):
            out.append(v)
        else:
            out.extend(p for p in str(v).split(",") if p.strip())
    if not out:
        raise UsageError(f"{field}: at least one point is required")
    return [parse_complex(p, field) for p in out]


def _floats(values, field):
    out = []
    for v in values or []:
        for p in str(v).split(","):
            if p.strip():
                try:
                    out.append(float(p))
                except ValueError as exc:
                    raise UsageError(f"{field}: cannot read number {p!r}") from exc
    if not out:
        raise UsageError(f"{field}: at least one value is required")
    return out


def _fmt(x) -> str:
    return repr(float(x))


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow(_fmt(x) if isinstance(x, (float, int, np.floating)) and not isinstance(x, bool) else x
                   for x in r)
    return buf.getvalue()


def _json(obj) -> str:
    def convert(o):
        if isinstance(o, complex):
            return format_complex(o)
        if isinstance(o, (np.floating, np.integer)):
            return o.item()
        if isinstance(o, np.ndarray):
            return [convert(x) for x in o.tolist()]
        if isinstance(o, dict):
            return {k: convert(v) for k, v in o.items()}
        if isinstance(o, (list, tuple)):
            return [convert(v) for v in o]
        if isinstance(o, float) and not math.isfinite(o):
            return repr(o)
        return o

    return json.dumps(convert(obj), indent=2) + "\n"


def write_output(text: str, path: str | None):
    """Write to ``path`` via a temporary file and rename, or to stdout."""
    if not path:
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# --- commands -------------------------------------------------------------

def cmd_transform(args):
    s = build_state(args.state)
    f = cj.to_conjugate(s)
    psi = BargmannFunction(s)
    rows = []
    for w in _points(args.at, "at"):
        if args.route == "line":
            value = cj.forward_line_integral(psi, w)
            err = abs(value - cj.eval_conjugate(f, w, use_closed_form=False))
        else:
            value = cj.eval_conjugate(f, w)
            err = cj.laurent_tail_bound(f, w)
        rows.append((w.real, w.imag, value.real, value.imag, err))
    if args.format == "json":
        return _json([{"w": complex(r[0], r[1]), "value": complex(r[2], r[3]), "tail_bound": r[4]}
                      for r in rows])
    return _csv(["re_w", "im_w", "re_value", "im_value", "tail_bound"], rows)


def _conjugate_input(args):
    if args.pole is not None:
        return cj.pole_function(parse_complex(args.pole, "pole"), args.truncation)
    if args.state is None:
        raise UsageError("invert: give --state or --pole")
    return cj.to_conjugate(build_state(args.state))


def cmd_invert(args):
    f = _conjugate_input(args)
    rows = []
    for z in _points(args.at, "at"):
        termwise = complex(cj.inverse_phase_space(f, z))
        if args.route == "termwise":
            value, err = termwise, 0.0
        elif args.route == "mellin":
            value = cj.inverse_limit_at_origin(f) if z == 0 else cj.inverse_mellin(f, z)
            err = abs(value - termwise)
        else:
            value = cj.inverse_phase_space(f, z, method="direct")
            err = abs(value - termwise)
        rows.append((z.real, z.imag, value.real, value.imag, err))
    if args.format == "json":
        return _json([{"zstar": complex(r[0], r[1]), "value": complex(r[2], r[3]), "error_estimate": r[4]}
                      for r in rows])
    return _csv(["re_zstar", "im_zstar", "re_value", "im_value", "error_estimate"], rows)


def cmd_inner(args):
    s, t = build_state(args.state), build_state(args.other)
    f, g = cj.to_conjugate(s), cj.to_conjugate(t)
    routes = {
        "series": lambda: inner_series(s, t),
        "double": lambda: inner_conjugate_double(f, g),
        "line": lambda: inner_conjugate_line(f, g),
        "mixed": lambda: inner_mixed(f, BargmannFunction(t)),
    }
    if args.route != "all":
        value = complex(routes[args.route]())
        ref = inner_series(s, t)
        if args.format == "json":
            return _json({"route": args.route, "value": value, "error_estimate": abs(value - ref)})
        return _csv(["route", "re_value", "im_value", "error_estimate"],
                    [(args.route, value.real, value.imag, abs(value - ref))])
    values = {name: complex(fn()) for name, fn in routes.items()}
    spread = max(abs(a - b) for a in values.values() for b in values.values())
    report = {f"value_{k}": v for k, v in values.items()}
    report["max_disagreement"] = spread
    return _json(report)


def cmd_propagate(args):
    frame = _frame(json.loads(args.frame) if args.frame else None)
    z0 = parse_complex(args.z0, "z0")
    times = _floats(args.t, "t")
    rows = []
    for t in times:
        if args.kind == "ho-bargmann":
            for z in _points(args.zstar, "zstar"):
                v = complex(exact_ho_bargmann(z, z0, t, frame))
                rows.append((t, z.real, z.imag, v.real, v.imag))
        elif args.kind == "ho-conjugate":
            for w in _points(args.w, "w"):
                v = complex(exact_ho_conjugate(w, z0, t, frame))
                rows.append((t, w.real, w.imag, v.real, v.imag))
        elif args.kind == "diagonal-trace":
            for w in _points(args.w, "w"):
                v = complex(diagonal_trace_series(w, t, args.truncation, frame))
                rows.append((t, w.real, w.imag, v.real, v.imag))
        else:
            op = "X" if args.kind == "matrix-x" else "P"
            for w in _points(args.w, "w"):
                v = complex(matrix_element_conjugate(op, z0, w, frame))
                rows.append((t, w.real, w.imag, v.real, v.imag))
    return _csv(["t", "re_arg", "im_arg", "re_value", "im_value"], rows)


def _hamiltonian(args):
    p = json.loads(args.params) if args.params else {}
    hbar = float(p.get("hbar", 1.0))
    if args.hamiltonian == "ho":
        return ho_hamiltonian(OscillatorFrame(omega=float(p.get("omega", 1.0)), hbar=hbar))
    if args.hamiltonian == "quadratic":
        return quadratic_hamiltonian(parse_complex(p.get("alpha", 1.0)), parse_complex(p.get("beta", 0.0)),
                                     parse_complex(p.get("gamma", 0.0)), hbar)
    if args.hamiltonian == "quartic":
        return quartic_hamiltonian(float(p.get("omega", 1.0)), parse_complex(p.get("lambda", 0.0)), hbar)
    if args.hamiltonian == "zero":
        return zero_hamiltonian(hbar)
    raise UsageError(f"hamiltonian: unknown name {args.hamiltonian!r}")


def cmd_semiclassical(args):
    H = _hamiltonian(args)
    z_i = parse_complex(args.z_i, "z-i")
    T = float(args.T)
    guesses = [parse_complex(g, "guess") for g in args.guess] if args.guess else None
    D = args.oracle_dimension
    report = {"hamiltonian": H.name, "T": T, "z_i": z_i}
    if args.w is None:
        if args.zf_star is None:
            raise UsageError("semiclassical: give --zf-star (Bargmann) or --w (conjugate)")
        zf = parse_complex(args.zf_star, "zf-star")
        res = ksc_bargmann(H, z_i, zf, T, guesses, args.steps, full_output=True)
        tr = res.trajectories[0]
        oracle = None
        if H.fock_matrix is not None:
            oracle = complex(fock_propagator(H.fock_matrix(D), z_i, zf, T, H.hbar))
        report.update(zf_star=zf, trajectory_residual=abs(tr.vT - zf))
    else:
        w = parse_complex(args.w, "w")
        res = ksc_conjugate(H, z_i, w, T, guesses, args.steps, allow_fallback=True, full_output=True)
        report.update(w=w, fallback_used=res.fallback_used)
        if res.fallback_used:
            report.update(value=res.value)
            if args.hamiltonian == "ho":
                omega = float(json.loads(args.params).get("omega", 1.0)) if args.params else 1.0
                oracle = complex(exact_ho_conjugate(w, z_i, T, OscillatorFrame(omega=omega, hbar=H.hbar)))
                report.update(oracle_value=oracle, error=abs(res.value - oracle))
            return _json(report)
        tr = res.trajectories[0]
        oracle = None
        report.update(trajectory_residual=abs(tr.uT - w), saddle_residual=saddle_residual(H, tr, w))
    report.update(
        M=[[tr.M[0, 0], tr.M[0, 1]], [tr.M[1, 0], tr.M[1, 1]]],
        det_M=tr.det_M,
        S=tr.S,
        integrator_error=tr.error,
        value=res.value,
        oracle_value=oracle,
        error=None if oracle is None else abs(res.value - oracle),
    )
    if args.gradient_check and args.w is None:
        g = gradient_check(H, tr)
        report["gradient_check"] = {"zf_star": g.zf_star, "z_i": g.z_i, "T": g.T}
    return _json(report)


def cmd_verify(args):
    names = list(SUITES) if args.suite == "all" else [args.suite]
    results = [run_suite(n, args.seed) for n in names]
    report = {"seed": args.seed, "passed": all(r.passed for r in results),
              "max_error": max(r.max_error for r in results),
              "suites": [r.as_dict() for r in results]}
    return _json(report), (EXIT_OK if report["passed"] else EXIT_NUMERICAL)


# --- parser ---------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bargmann-dual", description=__doc__.splitlines()[0])
    p.add_argument("--config", help="JSON file with the command and its options")
    p.add_argument("--output", "-o", help="write the result here instead of stdout")
    sub = p.add_subparsers(dest="command")

    t = sub.add_parser("transform", help="evaluate the conjugate function of a state")
    t.add_argument("--state", help="state descriptor (JSON)")
    t.add_argument("--at", action="append", help="w values, 'a+bi', comma separated or repeated")
    t.add_argument("--route", choices=["series", "line"], default="series")
    t.add_argument("--format", choices=["csv", "json"], default="csv")

    i = sub.add_parser("invert", help="recover psi(z*) from a conjugate function")
    i.add_argument("--state", help="state descriptor (JSON)")
    i.add_argument("--pole", help="use the pole form 1/(w - z0) with this z0")
    i.add_argument("--truncation", type=int, default=DEFAULT_TRUNCATION)
    i.add_argument("--at", action="append", help="z* values")
    i.add_argument("--route", choices=["termwise", "mellin", "direct"], default="termwise")
    i.add_argument("--format", choices=["csv", "json"], default="csv")

    n = sub.add_parser("inner", help="scalar products by the conjugate-space routes")
    n.add_argument("--state", help="bra state descriptor (JSON)")
    n.add_argument("--other", help="ket state descriptor (JSON)")
    n.add_argument("--route", choices=["series", "double", "line", "mixed", "all"], default="all")
    n.add_argument("--format", choices=["csv", "json"], default="csv")

    g = sub.add_parser("propagate", help="oscillator propagators and matrix elements")
    g.add_argument("--kind", choices=["ho-bargmann", "ho-conjugate", "diagonal-trace", "matrix-x", "matrix-p"],
                   default="ho-bargmann")
    g.add_argument("--z0", default="0", help="source coherent label z0 (or z' for matrix elements)")
    g.add_argument("--zstar", action="append", help="Bargmann arguments")
    g.add_argument("--w", action="append", help="conjugate arguments")
    g.add_argument("--t", action="append", default=None, help="times")
    g.add_argument("--truncation", type=int, default=DEFAULT_TRUNCATION, help="terms of the trace series")
    g.add_argument("--frame", help='oscillator frame JSON, e.g. {"omega": 2}')

    s = sub.add_parser("semiclassical", help="complex-trajectory propagator")
    s.add_argument("--hamiltonian", choices=["ho", "quadratic", "quartic", "zero"], default="ho")
    s.add_argument("--params", help='Hamiltonian parameters JSON, e.g. {"alpha": 1, "beta": 0.4, "gamma": 0.4}')
    s.add_argument("--z-i", dest="z_i", default="0")
    s.add_argument("--zf-star", dest="zf_star")
    s.add_argument("--w")
    s.add_argument("--T", type=float, default=1.0)
    s.add_argument("--guess", action="append")
    s.add_argument("--steps", type=int, default=1024)
    s.add_argument("--oracle-dimension", type=int, default=160)
    s.add_argument("--gradient-check", action="store_true")

    v = sub.add_parser("verify", help="run the invariant suites")
    v.add_argument("--suite", choices=["all", *SUITES], default="all")
    v.add_argument("--seed", type=int, default=0)
    return p


COMMANDS = {
    "transform": cmd_transform,
    "invert": cmd_invert,
    "inner": cmd_inner,
    "propagate": cmd_propagate,
    "semiclassical": cmd_semiclassical,
    "verify": cmd_verify,
}


def _config_argv(path: str, argv: list[str]) -> list[str]:
    """Merge a JSON config into argv; explicit flags win over the file."""
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise UsageError(f"config: cannot read {path!r} ({exc.strerror})") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"config: malformed JSON ({exc.msg})") from exc
    if not isinstance(cfg, dict):
        raise UsageError("config: expected a JSON object")
    command = cfg.pop("command", None)
    has_command = any(a in COMMANDS for a in argv)
    if not has_command:
        if command not in COMMANDS:
            raise UsageError(f"config.command: expected one of {sorted(COMMANDS)}, got {command!r}")
        argv = argv + [command]
    extra = []
    for key, value in cfg.items():
        flag = "--" + key.replace("_", "-")
        if flag in argv or f"--{key}" in argv:
            continue
        values = value if isinstance(value, list) else [value]
        if isinstance(value, bool):
            if value:
                extra.append(flag)
            continue
        for item in values:
            text = json.dumps(item) if isinstance(item, dict) else str(item)
            extra.extend([flag, text])
    return argv + extra


def run(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        pre, _ = parser.parse_known_args(argv)
        if pre.config:
            idx = argv.index("--config")
            rest = argv[:idx] + argv[idx + 2:]
            argv = _config_argv(pre.config, rest)
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("no command given")
        result = COMMANDS[args.command](args)
        code = EXIT_OK
        if isinstance(result, tuple):
            result, code = result
        write_output(result, args.output)
        return code
    except SystemExit as exc:
        return EXIT_INVALID if exc.code not in (0, None) else EXIT_OK
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except json.JSONDecodeError as exc:
        print(f"error: malformed JSON ({exc.msg})", file=sys.stderr)
        return EXIT_INVALID
    except VALIDATION_ERRORS as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVALID


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
