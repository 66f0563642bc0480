"""Command-line entry point: ``taylorvi <command> [options]``.

Exit codes: 0 success, 2 configuration error, 3 solver non-convergence,
4 I/O error.
"""
from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

from .harness import (
    DEFAULT_ORDER,
    METHODS,
    ConfigError,
    ReferenceRunError,
    RunSpec,
    compare,
    convergence_study,
    run_trajectory,
    write_comparison_csv,
    write_convergence_csv,
)
from .plotting import PLOT_KINDS, SchemaError, emit_plot
from .problems import PROBLEMS, make_problem
from .quadrature import QuadratureConfigError

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_IO = 0, 2, 3, 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _common(p, h_many=False):
    p.add_argument("--problem", required=True, choices=sorted(PROBLEMS))
    p.add_argument("--order", type=int, default=None, help="Taylor order r (method default if omitted)")
    p.add_argument("--quadrature", default=None, help="rect_left, rect_right, midpoint, trapezoid, simpson, gaussM")
    if h_many:
        p.add_argument("--h", type=float, nargs="+", required=True, help="step sizes")
    else:
        p.add_argument("--h", type=float, default=None, help="step size (problem default if omitted)")
    p.add_argument("--tol", type=float, default=1e-12, help="Newton residual tolerance")
    p.add_argument("--seed", type=int, default=None, help="seed for randomised initial conditions")
    p.add_argument("--out", default=None, help="output CSV path")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="taylorvi", description="Taylor variational integrator experiments")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="integrate one trajectory and write its CSV")
    _common(run)
    run.add_argument("--method", required=True, choices=METHODS)
    span = run.add_mutually_exclusive_group()
    span.add_argument("--steps", type=int, default=None)
    span.add_argument("--tmax", type=float, default=None)
    run.add_argument("--reuse-jacobian", action="store_true", help="simplified Newton across steps")

    conv = sub.add_parser("converge", help="global error against step size")
    _common(conv, h_many=True)
    conv.add_argument("--method", required=True, choices=METHODS)
    conv.add_argument("--tmax", type=float, default=1.0, help="final time of the study")
    conv.add_argument("--ref-order", type=int, default=8, help="order of the Taylor reference run")

    cmp_ = sub.add_parser("compare", help="several methods on one problem")
    _common(cmp_)
    cmp_.add_argument(
        "--spec",
        action="append",
        required=True,
        help="method[:order[:quadrature]], repeatable",
    )
    span = cmp_.add_mutually_exclusive_group()
    span.add_argument("--steps", type=int, default=None)
    span.add_argument("--tmax", type=float, default=None)
    cmp_.add_argument("--reference", action="store_true", help="also measure global error at the final time")
    cmp_.add_argument("--ref-order", type=int, default=8)
    cmp_.add_argument("--reuse-jacobian", action="store_true")

    plot = sub.add_parser("plot", help="render harness CSV files as SVG")
    plot.add_argument("csv", nargs="+")
    plot.add_argument("--kind", required=True, choices=PLOT_KINDS)
    plot.add_argument("--out", default=None)

    sub.add_parser("list-problems", help="available problems")
    sub.add_parser("list-methods", help="available methods")
    return ap


def _steps(args, problem, h):
    if args.steps is not None:
        return args.steps
    if args.tmax is None:
        return None
    if h is None:
        h = make_problem(problem).h
    if not args.tmax > 0:
        raise ConfigError("--tmax must be positive")
    return max(1, int(round(args.tmax / h)))


def _parse_spec(text, args):
    parts = text.split(":")
    if len(parts) > 3 or not parts[0]:
        raise ConfigError(f"bad --spec {text!r}; expected method[:order[:quadrature]]")
    method = parts[0]
    r = int(parts[1]) if len(parts) > 1 and parts[1] else args.order
    quad = parts[2] if len(parts) > 2 else args.quadrature
    return RunSpec(
        args.problem,
        method,
        r=r,
        quadrature=quad,
        h=args.h,
        steps=_steps(args, args.problem, args.h),
        tol=args.tol,
        seed=args.seed,
        reuse_jacobian=args.reuse_jacobian,
    )


def _cmd_run(args):
    spec = RunSpec(
        args.problem,
        args.method,
        r=args.order,
        quadrature=args.quadrature,
        h=args.h,
        steps=_steps(args, args.problem, args.h),
        tol=args.tol,
        out=args.out,
        seed=args.seed,
        reuse_jacobian=args.reuse_jacobian,
    )
    traj = run_trajectory(spec)
    s = traj.summary
    print(
        f"{s['method']} on {args.problem}: {s['steps']} steps of h={s['h']:g}, "
        f"mean |dE|={s['mean_abs_energy_error']:.3e}, max |dE|={s['max_abs_energy_error']:.3e}, "
        f"newton iters={s['newton_iters']}, wall={s['wall_time']:.3f}s, status={s['status']}"
    )
    if not traj.ok:
        print(f"step {traj.failed_step} failed: {traj.message}", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


def _cmd_converge(args):
    spec = RunSpec(args.problem, args.method, r=args.order, quadrature=args.quadrature, tol=args.tol, seed=args.seed)
    (res,) = convergence_study(args.problem, [spec], args.h, T=args.tmax, ref_order=args.ref_order, seed=args.seed)
    for h, e in zip(res.h, res.error):
        print(f"h={h:g}  error={e:.6e}")
    print(f"slope={res.slope:.4f}")
    if args.out:
        write_convergence_csv(res, args.out)
    if res.failures:
        for h, msg in res.failures.items():
            print(f"h={h:g} failed: {msg}", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


def _cmd_compare(args):
    specs = [_parse_spec(s, args) for s in args.spec]
    rows, _ = compare(args.problem, specs, reference=args.reference, ref_order=args.ref_order)

    def num(x, spec=".3e"):
        return format(x, spec) if isinstance(x, float) else str(x)

    for row in rows:
        print(
            f"{row['method']:<24} h={num(row['h'], 'g'):<8} mean |dE|={num(row['mean_energy_error']):<10} "
            f"global={num(row['global_error']):<10} wall={num(row['wall_time'], '.3f')}s {row['status']}"
        )
    if args.out:
        write_comparison_csv(rows, args.out)
    return EXIT_OK


def _cmd_plot(args):
    path = emit_plot(args.csv, args.kind, args.out)
    print(path)
    return EXIT_OK


def _cmd_list_problems(args):
    for name in sorted(PROBLEMS):
        inst = make_problem(name)
        print(f"{name:<14} dim={inst.system.dim:<3} h={inst.h:g} horizon={inst.horizon:g}")
    return EXIT_OK


def _cmd_list_methods(args):
    for m in METHODS:
        default = DEFAULT_ORDER.get(m)
        extra = f" (default order {default})" if default is not None else ""
        print(f"{m}{extra}")
    return EXIT_OK


_COMMANDS = {
    "run": _cmd_run,
    "converge": _cmd_converge,
    "compare": _cmd_compare,
    "plot": _cmd_plot,
    "list-problems": _cmd_list_problems,
    "list-methods": _cmd_list_methods,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ConfigError, QuadratureConfigError, SchemaError, KeyError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ReferenceRunError as exc:
        print(f"reference run failed: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
