"""Command-line entry point: ``kslin <command> ...``.

Exit status is 0 on success, 2 for invalid arguments and 3 when every
row of a run failed numerically.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import experiments as ex
from .models import catalog

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3


def _ints(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    # SUPPRESS keeps a subcommand from resetting a value given before it
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="reserved; all runs are deterministic")
    common.add_argument("--plot", type=Path, default=argparse.SUPPRESS, help="write a log-scale SVG plot of the table")

    parser = argparse.ArgumentParser(prog="kslin", description="Koopman spectral and Carleman linearisation experiments")
    parser.add_argument("--seed", type=int, default=None, help="reserved; all runs are deterministic")
    parser.add_argument("--plot", type=Path, default=None, help="write a log-scale SVG plot of the table")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("list-models", parents=[common], help="print the benchmark models and their defaults")

    p = sub.add_parser("solve", parents=[common], help="run one linearisation and score it")
    p.add_argument("--model", required=True)
    p.add_argument("--method", choices=("koopman", "carleman"), required=True)
    p.add_argument("--order", type=int)
    p.add_argument("--radius", type=_floats)
    p.add_argument("--taylor-order", type=int, default=ex.DEFAULT_TAYLOR_ORDER)
    p.add_argument("--horizon", type=float)
    p.add_argument("--samples", type=int, default=ex.DEFAULT_SAMPLES)
    p.add_argument("--trajectory-out", type=Path, help="also write t, approximate and reference states")
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("sweep-order", parents=[common], help="error against truncation order")
    p.add_argument("--model", required=True)
    p.add_argument("--method", choices=("koopman", "carleman"), required=True)
    p.add_argument("--orders", type=_ints, required=True)
    p.add_argument("--radius", type=_floats)
    p.add_argument("--taylor-order", type=int, default=ex.DEFAULT_TAYLOR_ORDER)
    p.add_argument("--horizon", type=float)
    p.add_argument("--samples", type=int, default=ex.DEFAULT_SAMPLES)
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("sweep-radius", parents=[common], help="Koopman error against one axis radius")
    p.add_argument("--model", required=True)
    p.add_argument("--order", type=int, required=True)
    p.add_argument("--axis", type=int, required=True, help="1-based axis to sweep")
    p.add_argument("--radii", type=_floats, required=True)
    p.add_argument("--radius", type=_floats, help="radii of the axes held fixed")
    p.add_argument("--horizon", type=float)
    p.add_argument("--samples", type=int, default=ex.DEFAULT_SAMPLES)
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("compare", parents=[common], help="Koopman vs Carleman at one order")
    p.add_argument("--model", required=True)
    p.add_argument("--order", type=int, required=True)
    p.add_argument("--taylor-order", type=int, default=ex.DEFAULT_TAYLOR_ORDER)
    p.add_argument("--samples", type=int, default=ex.DEFAULT_SAMPLES)
    p.add_argument("--out", type=Path, required=True)
    return parser


def _list_models() -> str:
    lines = []
    for m in catalog():
        kind = "polynomial" if m.is_polynomial else "non-polynomial"
        lines.append(
            f"{m.name}\td={m.dimension}\t{kind}\tx0={list(m.x0)}\tT={m.horizon}\tr={list(m.radius)}\tN={m.order}"
        )
    return "\n".join(lines) + "\n"


def _write_trajectory(path: Path, times, approx, reference) -> None:
    d = approx.shape[1]
    header = ["t"] + [f"x{i + 1}" for i in range(d)] + [f"ref_x{i + 1}" for i in range(d)]
    with path.open("w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for k, t in enumerate(times):
            row = [t, *approx[k], *reference[k]]
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def _solve(args) -> ex.SweepResult:
    config = ex.ExperimentConfig(
        model=args.model,
        method=args.method,
        orders=(args.order,) if args.order is not None else (),
        radius=args.radius,
        taylor_order=args.taylor_order,
        horizon=args.horizon,
        samples=args.samples,
    )
    spec = config.spec
    order = args.order if args.order is not None else spec.order
    times = ex.sample_times(spec.horizon, args.samples)
    reference = ex.reference_solution(spec, times)
    runs = []

    def run_fn():
        if args.method == "koopman":
            run = ex.solve_koopman(spec, order, config.radius_vector(), times)
        else:
            run = ex.solve_carleman(spec, order, args.taylor_order, times)
        runs.append(run)
        return run

    if args.method == "koopman":
        side = ex.koopman_side(spec.dimension, order)
    else:
        side = ex._carleman_side_for(spec, order, args.taylor_order)
    result = ex.SweepResult("order")
    result.rows.append(ex._score(order, run_fn, reference, side))
    if args.trajectory_out is not None and runs:
        _write_trajectory(args.trajectory_out, times, runs[0].states.values, reference)
    return result


def _run(args) -> ex.SweepResult | None:
    if args.command == "list-models":
        sys.stdout.write(_list_models())
        return None
    if args.command == "solve":
        return _solve(args)
    if args.command == "sweep-order":
        config = ex.ExperimentConfig(
            model=args.model,
            method=args.method,
            orders=args.orders,
            radius=args.radius,
            taylor_order=args.taylor_order,
            horizon=args.horizon,
            samples=args.samples,
        )
        return ex.run_order_sweep(config)
    if args.command == "sweep-radius":
        config = ex.ExperimentConfig(
            model=args.model,
            method="koopman",
            orders=(args.order,),
            radius=args.radius,
            radii=args.radii,
            axis=args.axis,
            horizon=args.horizon,
            samples=args.samples,
        )
        return ex.run_radius_sweep(config)[0]
    if args.command == "compare":
        return ex.run_comparison(args.model, args.order, args.taylor_order, samples=args.samples)
    raise AssertionError(args.command)


def plot_result(result: ex.SweepResult, path: Path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    errors = np.where(np.isfinite(result.errors), result.errors, np.nan)
    params = result.params
    numeric = all(isinstance(p, (int, float)) for p in params)
    x = params if numeric else list(range(len(params)))
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.semilogy(x, errors, "o-")
    if not numeric:
        ax.set_xticks(x, [str(p) for p in params])
    if result.parameter.startswith("radius"):
        ax.set_xscale("log")
    ax.set_xlabel(result.parameter)
    ax.set_ylabel("max abs error")
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        result = _run(args)
    except ValueError as exc:
        parser.print_usage(sys.stderr)
        print(f"kslin: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ArithmeticError as exc:
        print(f"kslin: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    if result is None:
        return EXIT_OK
    result.write_csv(args.out)
    if args.plot is not None:
        plot_result(result, args.plot)
    return EXIT_NUMERICAL if result.all_failed else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
