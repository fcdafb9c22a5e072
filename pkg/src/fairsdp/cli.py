"""Command-line interface: ``fairsdp {generate,cluster,eval,sweep,plot}``.

Exit codes: 0 success, 2 usage error, 3 solver failure, 4 I/O or input
format error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import graph as gio
from .admm import AdmmConfig, AdmmDivergenceError, admm_solve, round_assignment
from .graph import GraphFormatError
from .metrics import score_report
from .numerics import ConvergenceError
from .sbm import SbmParams, WeightedTwoClusterParams, generate_sbm, generate_weighted_two_cluster, sample_sensitive
from .spectral import SolverConfig, build_penalized, objective_value, solve_spectral
from .svgplot import render_svg
from .sweep import SweepSpec, default_lambda_grid, format_sweep_csv, read_sweep_csv, run_sweep

EXIT_OK, EXIT_USAGE, EXIT_SOLVER, EXIT_IO = 0, 2, 3, 4

log = logging.getLogger("fairsdp")


class UsageError(Exception):
    pass


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _interval(text: str) -> tuple[float, float]:
    vals = _floats(text)
    if len(vals) != 2:
        raise argparse.ArgumentTypeError(f"expected 'lo,hi', got {text!r}")
    return vals[0], vals[1]


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


# --- subcommands ------------------------------------------------------------


def cmd_generate(args) -> int:
    sbm_only = {"--p-in": args.p_in, "--p-out": args.p_out}
    w2_only = {"--w-in": args.w_in, "--w-out": args.w_out, "--bernoulli": args.bernoulli or None}
    if args.model == "sbm":
        for flag, val in w2_only.items():
            if val is not None:
                raise UsageError(f"{flag} conflicts with --model sbm")
        if args.p_in is None or args.p_out is None:
            raise UsageError("--model sbm needs --p-in and --p-out")
        params = SbmParams.planted(args.sizes, args.p_in, args.p_out, args.seed)
        g, truth = generate_sbm(params)
    else:
        for flag, val in sbm_only.items():
            if val is not None:
                raise UsageError(f"{flag} conflicts with --model weighted2")
        if len(args.sizes) != 2:
            raise UsageError("--model weighted2 needs exactly two --sizes")
        params = WeightedTwoClusterParams(
            sizes=tuple(args.sizes),
            within_range=args.w_in or (0.5, 1.0),
            between_range=args.w_out or (0.0, 0.5),
            seed=args.seed,
            bernoulli=args.bernoulli,
        )
        g, truth = generate_weighted_two_cluster(params)
    s = sample_sensitive(g.n, args.sens_p, args.seed + 1, truth=truth, correlation=args.sens_corr)
    prefix = args.out_prefix or args.out
    if not prefix:
        raise UsageError("--out-prefix is required")
    gio.save_edge_list(g, f"{prefix}.el")
    gio.save_labels(truth, f"{prefix}.truth.csv")
    gio.save_sensitive(s, f"{prefix}.sens.csv")
    if not args.quiet:
        pos = int((s.signs > 0).sum())
        print(f"n={g.n} edges={g.num_edges} groups=+1:{pos},-1:{g.n - pos}")
    return EXIT_OK


def _lambda_arg(values: list[float]):
    return values[0] if len(values) == 1 else tuple(values)


def cmd_cluster(args) -> int:
    g = gio.load_edge_list(args.graph)
    s = gio.load_sensitive(args.sens, g.n)
    strategy = {"laplacian": "laplacian_kmeans", "bisect": "recursive_bisection"}[args.strategy]
    cfg = SolverConfig(
        lambda_weights=_lambda_arg(args.lam),
        mu=args.mu,
        k=args.k,
        multi_k_strategy=strategy,
        eig_order=args.eig_order,
        seed=args.seed,
    )
    if args.algo == "svd":
        c = solve_spectral(g, s, cfg)
    else:
        if args.k != 2:
            raise UsageError("--algo admm supports --k 2 only")
        acfg = AdmmConfig(args.rho, args.beta, args.max_iter, args.tol, cfg)
        state, trace = admm_solve(g, s, acfg)
        if args.trace:
            lines = ["iteration,residual_split,residual_diag"]
            lines += [f"{r.iteration},{r.residual_split:.17g},{r.residual_diag:.17g}" for r in trace]
            Path(args.trace).write_text("\n".join(lines) + "\n")
        c = round_assignment(state)
    text = "node,label\n" + "".join(f"{i},{v}\n" for i, v in enumerate(c.labels))
    _emit(text, args.out)
    if not args.quiet:
        if c.k == 2:
            at = build_penalized(g, s, cfg)
            print(f"objective={objective_value(at, c):.17g}", file=sys.stderr)
        if c.is_degenerate:
            print("warning: all nodes were assigned to a single cluster", file=sys.stderr)
    return EXIT_OK


def cmd_eval(args) -> int:
    n = gio.count_csv_rows(args.pred)
    # any integer labels are accepted; they are renumbered in sorted order
    _, pred_labels = np.unique(gio.load_labels(args.pred, n), return_inverse=True)
    pred = gio.ClusterAssignment.from_labels(pred_labels)
    s = gio.load_sensitive(args.sens, n)
    truth = gio.load_labels(args.truth, n) if args.truth else None
    at = None
    if args.graph:
        g = gio.load_edge_list(args.graph)
        if g.n != n:
            raise GraphFormatError(f"graph has {g.n} nodes, predictions cover {n}")
        at = build_penalized(g, s, SolverConfig(lambda_weights=_lambda_arg(args.lam), mu=args.mu))
        if pred.k == 1:
            pred = gio.ClusterAssignment(pred.labels, 2)
    report = score_report(pred, truth, s, at)
    _emit(report.to_csv(), args.out)
    return EXIT_OK


def cmd_sweep(args) -> int:
    if args.lambda_min > args.lambda_max or (args.steps > 1 and args.lambda_min == args.lambda_max):
        raise UsageError("--lambda-min must be below --lambda-max")
    if args.steps < 1:
        raise UsageError("--steps must be at least 1")
    g = gio.load_edge_list(args.graph)
    s = gio.load_sensitive(args.sens, g.n)
    truth = gio.load_labels(args.truth, g.n) if args.truth else None
    spec = SweepSpec(
        graph=g,
        sensitive=s,
        truth=truth,
        lambda_grid=default_lambda_grid(args.lambda_min, args.lambda_max, args.steps),
        mu_values=args.mu,
        algo=args.algo,
        seeds=args.seeds,
        eig_order=args.eig_order,
        admm=AdmmConfig(args.rho, args.beta, args.max_iter, args.tol),
        workers=args.workers,
    )

    def progress(done, total):
        if not args.quiet:
            print(f"\rsweep {done}/{total}", end="" if done < total else "\n", file=sys.stderr)

    points = run_sweep(spec, progress)
    _emit(format_sweep_csv(points), args.out)
    return EXIT_OK


def cmd_plot(args) -> int:
    try:
        points = read_sweep_csv(args.input)
    except ValueError as exc:
        raise GraphFormatError(str(exc)) from exc
    svg = render_svg(points, args.metric)
    if not args.out:
        raise UsageError("--out is required for plot")
    Path(args.out).write_text(svg)
    return EXIT_OK


# --- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")
    common.add_argument("--quiet", action="store_true", help="suppress progress and summaries")
    common.add_argument("--out", help="output file (stdout when omitted, where applicable)")

    solver = argparse.ArgumentParser(add_help=False)
    solver.add_argument("--algo", choices=("svd", "admm"), default="svd")
    solver.add_argument("--eig-order", choices=("magnitude", "algebraic"), default="magnitude")
    solver.add_argument("--rho", type=float, default=1.0)
    solver.add_argument("--beta", type=float, default=1.0)
    solver.add_argument("--max-iter", type=int, default=1000)
    solver.add_argument("--tol", type=float, default=1e-6)

    parser = argparse.ArgumentParser(prog="fairsdp", description="Fair graph clustering via a penalized SDP relaxation.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", parents=[common], help="generate a synthetic instance")
    p.add_argument("--model", choices=("sbm", "weighted2"), required=True)
    p.add_argument("--sizes", type=_ints, required=True, help="community sizes, e.g. 1000,1000")
    p.add_argument("--p-in", type=float)
    p.add_argument("--p-out", type=float)
    p.add_argument("--w-in", type=_interval, help="within-cluster weight interval lo,hi")
    p.add_argument("--w-out", type=_interval, help="between-cluster weight interval lo,hi")
    p.add_argument("--bernoulli", action="store_true", help="weighted2: sampled values are edge probabilities")
    p.add_argument("--sens-p", type=float, default=0.5, help="probability of attribute +1")
    p.add_argument("--sens-corr", type=float, default=0.0, help="probability a node copies its community side")
    p.add_argument("--out-prefix")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("cluster", parents=[common, solver], help="cluster a graph")
    p.add_argument("--graph", required=True)
    p.add_argument("--sens", required=True)
    p.add_argument("--lambda", dest="lam", type=_floats, default=[0.0],
                   help="fairness weight; comma list gives one weight per attribute level")
    p.add_argument("--mu", type=float, default=1.0)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--strategy", choices=("laplacian", "bisect"), default="laplacian")
    p.add_argument("--trace", help="ADMM residual trace CSV")
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("eval", parents=[common], help="score a predicted assignment")
    p.add_argument("--pred", required=True)
    p.add_argument("--truth")
    p.add_argument("--sens", required=True)
    p.add_argument("--graph", help="graph for the objective value")
    p.add_argument("--lambda", dest="lam", type=_floats, default=[0.0])
    p.add_argument("--mu", type=float, default=1.0)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep", parents=[common, solver], help="sweep lambda (and mu)")
    p.add_argument("--graph", required=True)
    p.add_argument("--sens", required=True)
    p.add_argument("--truth")
    p.add_argument("--lambda-min", type=float, default=-1.0)
    p.add_argument("--lambda-max", type=float, default=1.0)
    p.add_argument("--steps", type=int, default=101)
    p.add_argument("--mu", type=_floats, default=[-1.0, 1.0])
    p.add_argument("--seeds", type=_ints, default=[0])
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("plot", parents=[common], help="render a sweep CSV as SVG")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--metric", choices=("ami", "ari", "v"), default="ami")
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.ERROR if args.quiet else logging.WARNING, format="%(levelname)s: %(message)s")
    if getattr(args, "k", 2) < 2:
        print("fairsdp: error: --k must be at least 2", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"fairsdp: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (AdmmDivergenceError, ConvergenceError) as exc:
        print(f"fairsdp: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (OSError, GraphFormatError) as exc:
        print(f"fairsdp: input/output error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"fairsdp: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
