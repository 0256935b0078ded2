"""Command line interface.

Exit codes: 0 success, 1 verification failure, 2 invalid usage or config.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from fracvar import harness, leitmann, powerfn, varprob
from fracvar.fracnum import Grid, SampledFunction, rl_derivative_num, rl_integral_num
from fracvar.powerfn import PowerSum
from fracvar.report import VerificationReport, _jsonable
from fracvar.specfun import gamma, ln_gamma
from fracvar.varprob import ControlProblem, VariationalProblem, Weight

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

#: Tolerances used when the candidate is only known through samples.
NUMERIC_CONSTRAINT_TOL = 1e-3
NUMERIC_DIFFERENCE_TOL = 1e-2


class UsageError(Exception):
    pass


# {{{ io helpers


def _fmt(value: Any) -> str:
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def _dump_json(data: Any) -> str:
    return json.dumps(_jsonable(data), indent=2) + "\n"


def _rows_to_csv(columns: Sequence[str], rows: Sequence[dict[str, Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row.get(c, "")) for c in columns])
    return buf.getvalue()


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _load_text(spec: str) -> tuple[str, str]:
    """Return ``(text, kind)`` for an inline JSON string or a file path."""
    stripped = spec.strip()
    if stripped.startswith("{") or stripped.startswith("["):
        return stripped, "json"
    path = Path(spec)
    if not path.exists():
        raise UsageError(f"no such file: {spec}")
    return path.read_text(), "csv" if path.suffix.lower() == ".csv" else "json"


def _load_function(spec: str) -> PowerSum | SampledFunction:
    text, kind = _load_text(spec)
    try:
        if kind == "csv":
            samples, _ = SampledFunction.from_csv(text)
            return samples
        data = json.loads(text)
        if isinstance(data, dict) and "solution" in data:
            data = data["solution"]
        if isinstance(data, dict) and "terms" in data:
            return PowerSum.from_json(data)
        if isinstance(data, dict) and "values" in data:
            return SampledFunction.from_json(data)
    except (ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"cannot parse function from {spec!r}: {exc}") from exc
    raise UsageError(f"unrecognized function format in {spec!r}")


def _load_weight(spec: str) -> Weight:
    text, kind = _load_text(spec)
    if kind == "csv":
        try:
            samples, extra = SampledFunction.from_csv(text)
        except ValueError as exc:
            raise UsageError(f"cannot parse weight samples: {exc}") from exc
        derivative = extra.get("derivative")
        return Weight.from_samples(samples, derivative)
    f = _load_function(spec)
    if isinstance(f, SampledFunction):
        return Weight.from_samples(f)
    return Weight.from_powersum(f)


def _float_list(text: str) -> list[float]:
    if text.strip() == "":
        return []
    try:
        return [float(t) for t in text.split(",")]
    except ValueError as exc:
        raise UsageError(f"expected a comma-separated list of numbers, got {text!r}") from exc


def _int_list(text: str) -> list[int]:
    return [int(v) for v in _float_list(text)]


def _solution_json(y: Any, grid: Grid) -> dict[str, Any]:
    if isinstance(y, PowerSum):
        return {"kind": "powersum", **y.to_json()}
    samples = y if isinstance(y, SampledFunction) else y.to_samples(grid)
    return {"kind": "samples", **samples.to_json()}


def _sample_table(columns: dict[str, Any], grid: Grid) -> str:
    x = grid.x
    data = {"x": x}
    for name, f in columns.items():
        if isinstance(f, SampledFunction):
            data[name] = f.values
        else:
            data[name] = np.broadcast_to(np.asarray(f(x), dtype=float), x.shape)
    rows = [{k: float(v[i]) for k, v in data.items()} for i in range(len(x))]
    return _rows_to_csv(list(data), rows)


# }}}


# {{{ config


def _config(args: argparse.Namespace) -> dict[str, Any]:
    config: dict[str, Any] = {}
    if getattr(args, "config", None):
        text, _ = _load_text(args.config)
        try:
            config.update(json.loads(text))
        except json.JSONDecodeError as exc:
            raise UsageError(f"invalid config JSON: {exc}") from exc

    for key in ("problem", "alpha", "c", "xi", "n"):
        value = getattr(args, key, None)
        if value is not None:
            config[key] = value
    if getattr(args, "g", None) is not None:
        config["g"] = args.g

    if config.get("problem") not in ("p1", "p2", "p3"):
        raise UsageError("--problem must be one of p1, p2, p3")
    n = int(config.get("n", varprob.DEFAULT_N))
    if n < 3:
        raise UsageError("--n must be at least 3")
    config["n"] = n
    return config


def _grid_size(problem: VariationalProblem | ControlProblem, n: int, explicit: bool) -> int:
    """Node count, taken from a sampled weight when there is one."""
    g = getattr(problem, "g", None)
    if g is None or g.samples is None:
        return n
    if explicit and n != g.samples.grid.n:
        raise UsageError(f"--n {n} does not match the {g.samples.grid.n} weight samples")
    return g.samples.grid.n


def _problem(config: dict[str, Any], alpha: float | None = None) -> VariationalProblem | ControlProblem:
    alpha = config.get("alpha") if alpha is None else alpha
    if alpha is None:
        raise UsageError("--alpha is required")
    try:
        alpha = float(alpha)
        kind = config["problem"]
        if kind == "p1":
            return VariationalProblem.p1(alpha, float(config.get("c", 1.0)))
        if kind == "p2":
            g = config.get("g", {"a": 0.0, "terms": [[1.0, 0.0]]})
            if isinstance(g, str):
                g = _load_weight(g)
            elif isinstance(g, dict):
                g = Weight.from_powersum(PowerSum.from_json(g))
            return VariationalProblem.p2(alpha, float(config.get("xi", 0.0)), g)
        return ControlProblem(alpha)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


# }}}


# {{{ commands


def cmd_gamma(args: argparse.Namespace) -> int:
    try:
        value = ln_gamma(args.z) if args.log else gamma(args.z)
    except (ValueError, OverflowError) as exc:
        raise UsageError(str(exc)) from exc
    _emit(_dump_json({"z": args.z, "ln_gamma" if args.log else "gamma": value}), args.out)
    return EXIT_OK


def cmd_fracop(args: argparse.Namespace) -> int:
    f = _load_function(args.input)
    try:
        if isinstance(f, PowerSum) and not args.numeric:
            op = powerfn.rl_integral if args.op == "integral" else powerfn.rl_derivative
            result = op(f, args.alpha)
            if args.format == "csv":
                _emit(_sample_table({"value": result}, Grid(f.a, f.a + 1.0, args.n or varprob.DEFAULT_N)), args.out)
            else:
                _emit(_dump_json(result.to_json()), args.out)
            return EXIT_OK

        if isinstance(f, PowerSum):
            f = SampledFunction.sample(f.__call__, Grid(f.a, f.a + 1.0, args.n or varprob.DEFAULT_N))
        result = rl_integral_num(f, args.alpha) if args.op == "integral" else rl_derivative_num(f, args.alpha)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc

    if args.format == "csv":
        _emit(result.to_csv({"valid": result.valid.astype(float)}), args.out)
    else:
        _emit(_dump_json({**result.to_json(), "valid": result.valid.tolist()}), args.out)
    return EXIT_OK


def _control_summary(problem: ControlProblem, sol: varprob.ControlSolution, n: int) -> dict[str, Any]:
    res = varprob.check_control_system(problem, sol.controls, sol.states, n)
    return {
        "problem": "p3",
        "alpha": problem.alpha,
        "controls": [u.to_json() for u in sol.controls],
        "states": [y.to_json() for y in sol.states],
        "cost": varprob.control_cost(sol.controls),
        "dynamics_residual": list(res.dynamics),
        "boundary_residual": list(res.boundary),
    }


def cmd_solve(args: argparse.Namespace) -> int:
    config = _config(args)
    problem = _problem(config)
    n = _grid_size(problem, config["n"], args.n is not None)
    tol = args.tol if args.tol is not None else 1e-10

    if isinstance(problem, ControlProblem):
        sol = varprob.prop3_solution(problem.alpha)
        summary = _control_summary(problem, sol, n)
        failed = max(*summary["dynamics_residual"], *summary["boundary_residual"]) > tol
        if args.format == "csv":
            columns = dict(zip(("u1", "u2", "y1", "y2"), (*sol.controls, *sol.states)))
            _emit(_sample_table(columns, problem.grid(n)), args.out)
        else:
            _emit(_dump_json(summary), args.out)
        return EXIT_FAIL if failed else EXIT_OK

    if problem.kind == "p1":
        y = varprob.prop1_solution(problem.y_b, problem.alpha)
    else:
        y = varprob.prop2_solution(problem.g, problem.y_b, problem.alpha, n)

    J = varprob.evaluate(problem, y, n)
    residual = varprob.check_constraint(problem, y, n)
    if isinstance(y, SampledFunction):
        tol = args.tol if args.tol is not None else NUMERIC_CONSTRAINT_TOL
    grid = problem.grid(n)

    if args.format == "csv":
        samples = y if isinstance(y, SampledFunction) else (
            SampledFunction.sample(y.__call__, grid) if isinstance(y, PowerSum) else y.to_samples(grid)
        )
        _emit(samples.to_csv(), args.out)
    else:
        out = {
            "problem": problem.kind,
            "alpha": problem.alpha,
            "constraint_value": problem.y_b,
            "solution": _solution_json(y, grid),
            "J": J,
            "constraint_residual": residual,
        }
        if problem.kind == "p2":
            A, C = varprob.prop2_constants(problem.g, problem.y_b)
            out.update({"A": A, "C": C, "weight_derivative": problem.g.derivative_source})
        _emit(_dump_json(out), args.out)

    return EXIT_FAIL if residual > tol else EXIT_OK


def _verify_variational(problem: VariationalProblem, y: Any, args: argparse.Namespace, n: int) -> list[VerificationReport]:
    numeric = isinstance(y, SampledFunction)
    ctol = args.tol if args.tol is not None else (NUMERIC_CONSTRAINT_TOL if numeric else leitmann.CONSTRAINT_TOL)
    eps = _float_list(args.eps) if args.eps is not None else list(harness.DEFAULT_EPSILONS)

    residual = varprob.check_constraint(problem, y, n)
    reports = [
        VerificationReport(
            "constraint", residual <= ctol, residual, ctol, n, [{"target": problem.y_b, "path": "numeric" if numeric else "exact"}]
        )
    ]

    if problem.kind == "p1":
        transform = leitmann.prop1_transformation(problem)
    elif problem.g.is_exact:
        # a regular shift (B = 0) keeps the transformed samples bounded
        transform = leitmann.prop2_transformation(problem, offset=0.0 if numeric else None)
    else:
        transform = None

    if transform is not None:
        reports.append(leitmann.verify_exact_differential(problem, transform, y, n))
        candidates = [y] + [
            harness._perturb(y, harness.make_perturbation(problem.alpha, k).eta, e)
            for k, e in zip(range(1, 5), (0.1, -0.3, 0.5, 0.01))
        ]
        dtol = NUMERIC_DIFFERENCE_TOL if numeric else leitmann.EXACT_TOL
        reports.append(
            leitmann.verify_constant_difference(problem, transform, candidates, n, tol=dtol, constraint_tol=ctol)
        )

    if numeric:
        scan = harness.minimality_scan(problem, y, args.k, eps, n, tol=1e-2, linear_tol=1e-2)
    else:
        scan = harness.minimality_scan(problem, y, args.k, eps, n)
    reports.append(scan)
    return reports


def _verify_control(problem: ControlProblem, args: argparse.Namespace, n: int) -> list[VerificationReport]:
    tol = args.tol if args.tol is not None else 1e-10
    eps = _float_list(args.eps) if args.eps is not None else list(harness.DEFAULT_EPSILONS)
    sol = varprob.prop3_solution(problem.alpha)
    res = varprob.check_control_system(problem, sol.controls, sol.states, n)
    reports = [
        VerificationReport(
            "control_system", res.max_residual <= tol, res.max_residual, tol, n,
            [{"dynamics": list(res.dynamics), "boundary": list(res.boundary)}],
        )
    ]
    transform = leitmann.prop3_transformation(problem)
    m = PowerSum.polynomial([-0.5, 1.0])
    candidates = [leitmann.control_candidate(problem.alpha, PowerSum(), 1.0 + e * m) for e in (0.0, 0.1, -0.2, 0.5, 1.0)]
    reports.append(leitmann.verify_exact_differential(problem, transform, sol, n))
    reports.append(leitmann.verify_constant_difference(problem, transform, candidates, n))
    reports.append(harness.control_minimality_scan(problem.alpha, eps, n))
    return reports


def cmd_verify(args: argparse.Namespace) -> int:
    config = _config(args)
    problem = _problem(config)
    n = _grid_size(problem, config["n"], args.n is not None)

    if isinstance(problem, ControlProblem):
        if args.candidate:
            raise UsageError("p3 verification does not take a candidate")
        reports = _verify_control(problem, args, n)
    else:
        if args.candidate:
            y = _load_function(args.candidate)
            if isinstance(y, SampledFunction) and y.grid.n != n:
                n = y.grid.n
        elif problem.kind == "p1":
            y = varprob.prop1_solution(problem.y_b, problem.alpha)
        else:
            y = varprob.prop2_solution(problem.g, problem.y_b, problem.alpha, n)
        try:
            reports = _verify_variational(problem, y, args, n)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc

    failed = [r.check for r in reports if not r.passed]
    payload = {
        "pass": not failed,
        "first_failure": failed[0] if failed else None,
        "reports": [r.to_json() for r in reports],
    }
    _emit(_dump_json(payload), args.out)
    for r in reports:
        print(r.summary(), file=sys.stderr)
    return EXIT_FAIL if failed else EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    config = _config(args)
    alphas = _float_list(args.alphas)
    ns = _int_list(args.ns)
    if not alphas:
        raise UsageError("--alphas must list at least one order")
    if not ns or min(ns) < 3:
        raise UsageError("--ns must list grid sizes >= 3")

    if isinstance(config.get("g"), str):
        w = _load_weight(config["g"])
        if w.powersum is None:
            raise UsageError("sweeps need a power-sum weight g")
        config["g"] = w.powersum.to_json()

    rows = harness.alpha_sweep(config, alphas, ns)
    if args.format == "json":
        _emit(_dump_json(rows), args.out)
    else:
        _emit(_rows_to_csv(harness.SWEEP_COLUMNS, rows), args.out)
    return EXIT_FAIL if all(r["status"] != "ok" for r in rows) else EXIT_OK


# }}}


def _add_problem_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="problem config JSON (inline or path)")
    p.add_argument("--problem", choices=("p1", "p2", "p3"))
    p.add_argument("--alpha", type=float)
    p.add_argument("--c", type=float, help="terminal value for p1")
    p.add_argument("--xi", type=float, help="terminal value for p2")
    p.add_argument("--g", help="p2 weight: PowerSum JSON, or a .json/.csv path")
    p.add_argument("--n", type=int, help="grid node count")


def _add_output_flags(p: argparse.ArgumentParser, default_format: str = "json") -> None:
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"), default=default_format)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fracvar", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gamma", help="evaluate the Gamma function")
    p.add_argument("--z", type=float, required=True)
    p.add_argument("--log", action="store_true", help="return log Gamma instead")
    _add_output_flags(p)
    p.set_defaults(func=cmd_gamma)

    p = sub.add_parser("fracop", help="apply a fractional integral or derivative")
    p.add_argument("--op", choices=("integral", "derivative"), required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--input", required=True, help="PowerSum JSON, or .json/.csv samples")
    p.add_argument("--numeric", action="store_true", help="use the grid operators")
    p.add_argument("--n", type=int)
    _add_output_flags(p)
    p.set_defaults(func=cmd_fracop)

    p = sub.add_parser("solve", help="construct the exact minimizer")
    _add_problem_flags(p)
    p.add_argument("--tol", type=float)
    _add_output_flags(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="run the equivalence and minimality checks")
    _add_problem_flags(p)
    p.add_argument("--candidate", help="candidate y: PowerSum JSON, solve output, or samples")
    p.add_argument("--eps", help="comma-separated perturbation sizes")
    p.add_argument("--k", type=int, default=6, help="number of perturbation families")
    p.add_argument("--tol", type=float)
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify, format="json")

    p = sub.add_parser("sweep", help="tabulate exact and numeric values over orders and grids")
    _add_problem_flags(p)
    p.add_argument("--alphas", default="0.25,0.5,0.75,1.0")
    p.add_argument("--ns", default="129,257,513,1025,2049,4097")
    _add_output_flags(p, default_format="csv")
    p.set_defaults(func=cmd_sweep)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK

    if getattr(args, "tol", None) is not None and not args.tol > 0:
        print("fracvar: error: --tol must be positive", file=sys.stderr)
        return EXIT_USAGE
    if getattr(args, "k", None) is not None and args.k < 1:
        print("fracvar: error: --k must be at least 1", file=sys.stderr)
        return EXIT_USAGE

    try:
        return args.func(args)
    except UsageError as exc:
        print(f"fracvar: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
