"""Command-line front end: sweeps, optimization, CFL and accuracy studies.

Every subcommand writes CSV result tables plus a JSON manifest (flags,
package version, wall time, seed) into the output directory.  Exit
codes: 0 success, 1 computational failure, 2 usage error.
"""

import argparse
import csv
import json
import math
import os
import sys
import time

from . import __version__
from .analysis import (
    BracketError,
    SweepSpec,
    opnorm_sweep,
    optimize_lambda,
    optimized_lambda,
    rule_for,
    sharp_cfl_search,
)
from .experiments import (
    DEFAULT_SHARP_CFL,
    resolve_penalty,
    run_convergence,
    run_work_precision,
)
from .mesh import make_mesh
from .operator import AdvectionConfig, PenaltyConfig, assemble
from .quadrature import NodeKind
from .timestepping import METHODS


def parse_float_list(text: str) -> list[float]:
    """Comma-separated values and/or inclusive start:step:stop ranges."""
    out: list[float] = []
    for token in text.split(","):
        token = token.strip()
        if not token:
            continue
        if ":" in token:
            start, step, stop = (float(t) for t in token.split(":"))
            if step <= 0:
                raise ValueError(f"range step must be positive in {token!r}")
            n = int(math.floor((stop - start) / step + 1e-9))
            out.extend(start + k * step for k in range(n + 1))
        else:
            out.append(float(token))
    if not out:
        raise ValueError(f"empty list {text!r}")
    return out


def parse_int_list(text: str) -> list[int]:
    values = parse_float_list(text)
    ints = [int(round(v)) for v in values]
    if any(abs(i - v) > 1e-9 for i, v in zip(ints, values)):
        raise ValueError(f"expected integers, got {text!r}")
    return ints


def _jobs_default() -> int:
    env = os.environ.get("DODLAB_JOBS")
    if env:
        return int(env)
    return os.cpu_count() or 1


def write_csv(path: str, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow(["" if v is None else repr(float(v)) if isinstance(v, float) else v for v in row])


def write_manifest(out_dir: str, name: str, args: argparse.Namespace, wall_time: float) -> None:
    flags = {k: v for k, v in vars(args).items() if k != "func"}
    manifest = {
        "command": name,
        "flags": flags,
        "version": __version__,
        "wall_time_s": wall_time,
        "seed": getattr(args, "seed", None),
    }
    with open(os.path.join(out_dir, f"{name}_manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)


def _lambda_values(token: str, kind: NodeKind, degrees: list[int]) -> dict[int, list[float]]:
    """Cutoff values per degree from a flag token."""
    if token == "optimized":
        return {p: [optimized_lambda(kind, p)] for p in degrees}
    values = parse_float_list(token)
    return {p: values for p in degrees}


def cmd_opnorm_sweep(args: argparse.Namespace) -> int:
    kind = NodeKind(args.kind)
    degrees = parse_int_list(args.p)
    alphas = parse_float_list(args.alphas)
    n_background = int(round((args.domain[1] - args.domain[0]) / args.dx))
    lambdas_by_p = _lambda_values(args.lam, kind, degrees)
    rows = []
    for p in degrees:
        spec = SweepSpec(
            kind=kind,
            degrees=(p,),
            alphas=tuple(alphas),
            lambdas=tuple(lambdas_by_p[p]),
            n_background=n_background,
            cut_index=args.cut_index if args.cut_index is not None else n_background // 2,
            domain=tuple(args.domain),
            speed=args.speed,
        )
        rows.extend(opnorm_sweep(spec, jobs=args.jobs))
    failed = [r for r in rows if r.error]
    for r in failed:
        print(f"sweep point (p={r.p}, lambda={r.lambda_c}, alpha={r.alpha}) failed: {r.error}",
              file=sys.stderr)
    out = os.path.join(args.out_dir, "opnorm_sweep.csv")
    write_csv(
        out,
        ["kind", "p", "lambda_c", "alpha", "norm_dod", "norm_background", "quotient"],
        [
            [r.kind, r.p, r.lambda_c, r.alpha, r.norm_dod, r.norm_background,
             r.norm_dod / r.norm_background if not r.error else math.nan]
            for r in rows
        ],
    )
    if args.dump_operator:
        for p in degrees:
            for lam in lambdas_by_p[p]:
                for alpha in alphas:
                    mesh = make_mesh(tuple(args.domain), n_background,
                                     args.cut_index if args.cut_index is not None else n_background // 2,
                                     alpha)
                    op = assemble(mesh, rule_for(kind, p), AdvectionConfig(args.speed),
                                  PenaltyConfig(lambda_c=lam))
                    name = f"operator_{kind.value}_p{p}_lc{lam:g}_a{alpha:g}.txt"
                    op.write_triplets(os.path.join(args.out_dir, name))
    return 1 if failed else 0


def cmd_optimize(args: argparse.Namespace) -> int:
    kinds = [NodeKind(args.kind)] if args.kind != "both" else [NodeKind("gll"), NodeKind("gl")]
    degrees = parse_int_list(args.p)
    rows = []
    for kind in kinds:
        for p in degrees:
            r = optimize_lambda(
                p,
                kind,
                n_lambda=args.grid,
                n_alpha=args.grid,
                n_background=args.n_background,
            )
            rows.append([r.kind, r.p, r.lambda_star, r.worst_alpha, r.minmax_norm])
            print(f"{r.kind} p={r.p}: lambda*={r.lambda_star:.5f} "
                  f"worst_alpha={r.worst_alpha:.4f} minmax_norm={r.minmax_norm:.4f}")
    write_csv(
        os.path.join(args.out_dir, "lambda_opt.csv"),
        ["kind", "p", "lambda_star", "worst_alpha", "minmax_norm"],
        rows,
    )
    return 0


def cmd_cfl_search(args: argparse.Namespace) -> int:
    kind = NodeKind(args.kind)
    method = METHODS[args.method]
    degrees = parse_int_list(args.p)
    alphas: list[float | None] = list(parse_float_list(args.alphas))
    if args.include_background:
        alphas.append(None)
    rows = []
    for p in degrees:
        penalty = resolve_penalty(args.lam, kind, p)
        for alpha in alphas:
            try:
                r = sharp_cfl_search(
                    method,
                    p,
                    kind,
                    alpha,
                    penalty,
                    t_final=args.t_final,
                    bracket=tuple(args.bracket),
                    rel_tol=args.rel_tol,
                    n_background=args.n_background,
                    cut_index=args.n_background // 2,
                    lambda_mode=args.lam,
                    criterion=args.criterion,
                )
            except BracketError as exc:
                print(
                    f"cfl bracket invalid for p={p}, alpha={alpha}: lo={exc.lo} "
                    f"({'stable' if exc.lo_stable else 'unstable'}), hi={exc.hi} "
                    f"({'stable' if exc.hi_stable else 'unstable'})",
                    file=sys.stderr,
                )
                return 1
            rows.append([r.method, r.kind, r.p, r.alpha, r.lambda_mode, r.sharp_cfl])
            alabel = "uncut" if r.alpha is None else f"{r.alpha:g}"
            print(f"{r.method} {r.kind} p={r.p} alpha={alabel}: sharp CFL {r.sharp_cfl:.4f}")
    write_csv(
        os.path.join(args.out_dir, "cfl.csv"),
        ["method", "kind", "p", "alpha", "lambda_mode", "sharp_cfl"],
        rows,
    )
    return 0


def cmd_converge(args: argparse.Namespace) -> int:
    kind = NodeKind(args.kind)
    method = METHODS[args.method]
    p = int(args.p)
    alphas = parse_float_list(args.alphas)
    resolutions = parse_int_list(args.resolutions)
    sharp = args.sharp_cfl if args.sharp_cfl is not None else DEFAULT_SHARP_CFL.get((method.name, p))
    if sharp is None:
        print(f"no default sharp CFL for ({method.name}, p={p}); pass --sharp-cfl",
              file=sys.stderr)
        return 2
    rows, orders = run_convergence(
        method, p, kind, alphas, resolutions,
        sharp_cfl=sharp, lambda_mode=args.lam, safety=args.safety,
    )
    write_csv(
        os.path.join(args.out_dir, "convergence.csv"),
        ["kind", "p", "method", "lambda_mode", "alpha", "n_background", "cfl", "n_steps", "error"],
        [[r.kind, r.p, r.method, r.lambda_mode, r.alpha, r.n_background, r.cfl, r.n_steps, r.error]
         for r in rows],
    )
    write_csv(
        os.path.join(args.out_dir, "convergence_orders.csv"),
        ["kind", "p", "method", "lambda_mode", "alpha", "fitted_order"],
        [[kind.value, p, method.name, args.lam, a, o] for a, o in orders.items()],
    )
    for a, o in orders.items():
        print(f"alpha={a:g}: fitted order {o:.3f}")
    return 0


def cmd_work_precision(args: argparse.Namespace) -> int:
    kind = NodeKind(args.kind)
    method = METHODS[args.method]
    p = int(args.p)
    alphas = parse_float_list(args.alphas)
    resolutions = parse_int_list(args.resolutions)
    sharp = args.sharp_cfl if args.sharp_cfl is not None else DEFAULT_SHARP_CFL.get((method.name, p))
    if sharp is None:
        print(f"no default sharp CFL for ({method.name}, p={p}); pass --sharp-cfl",
              file=sys.stderr)
        return 2
    rows = run_work_precision(
        method, p, kind, alphas, resolutions,
        sharp_cfl=sharp, lambda_modes=tuple(args.lam.split("+")), safety=args.safety,
    )
    write_csv(
        os.path.join(args.out_dir, "work_precision.csv"),
        ["kind", "p", "method", "lambda_mode", "alpha", "n_background", "steps", "error"],
        [[r.kind, r.p, r.method, r.lambda_mode, r.alpha, r.n_background, r.n_steps, r.error]
         for r in rows],
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dodlab",
        description="Cut-cell DG stabilization studies: operator norms, cutoff "
                    "optimization, sharp CFL, convergence, work-precision.",
    )
    parser.add_argument("--version", action="version", version=f"dodlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--out-dir", default=".", help="output directory (default: cwd)")
        sp.add_argument("--jobs", type=int, default=_jobs_default(),
                        help="worker pool size (env DODLAB_JOBS, default: cores)")
        sp.add_argument("--seed", type=int, default=0, help="seed for iterative norm paths")

    sp = sub.add_parser("opnorm-sweep", help="operator norms over (p, lambda_c, alpha)")
    sp.add_argument("--kind", choices=["gl", "gll"], required=True)
    sp.add_argument("--p", required=True, help="degrees, e.g. 2,3,4")
    sp.add_argument("--dx", type=float, default=0.02, help="background cell width")
    sp.add_argument("--alphas", required=True, help="cut fractions, e.g. 0.01:0.01:0.49")
    sp.add_argument("--lambda", dest="lam", default="1.0",
                    help="cutoff values, or 'optimized' for the shipped table")
    sp.add_argument("--domain", type=float, nargs=2, default=(0.0, 1.0))
    sp.add_argument("--speed", type=float, default=1.0)
    sp.add_argument("--cut-index", type=int, default=None)
    sp.add_argument("--dump-operator", action="store_true",
                    help="write each operator as sparse (row col value) triplets")
    common(sp)
    sp.set_defaults(func=cmd_opnorm_sweep)

    sp = sub.add_parser("optimize", help="min-max optimal cutoff per degree")
    sp.add_argument("--kind", choices=["gl", "gll", "both"], default="both")
    sp.add_argument("--p", default="0,1,2,3,4,5", help="degrees")
    sp.add_argument("--grid", type=int, default=51, help="coarse grid points per axis")
    sp.add_argument("--n-background", type=int, default=50)
    common(sp)
    sp.set_defaults(func=cmd_optimize)

    sp = sub.add_parser("cfl-search", help="sharp CFL by bisection")
    sp.add_argument("--method", choices=sorted(METHODS), required=True)
    sp.add_argument("--kind", choices=["gl", "gll"], required=True)
    sp.add_argument("--p", required=True)
    sp.add_argument("--alphas", required=True)
    sp.add_argument("--lambda", dest="lam", default="1.0",
                    help="cutoff value, 'optimized', or 'off'")
    sp.add_argument("--bracket", type=float, nargs=2, default=(0.02, 2.0))
    sp.add_argument("--t-final", type=float, default=None,
                    help="stability horizon (default: 100 domain crossings)")
    sp.add_argument("--rel-tol", type=float, default=1e-3)
    sp.add_argument("--n-background", type=int, default=50)
    sp.add_argument("--criterion", choices=["longterm", "monotone"], default="longterm")
    sp.add_argument("--include-background", action="store_true",
                    help="add an uncut baseline row")
    common(sp)
    sp.set_defaults(func=cmd_cfl_search)

    sp = sub.add_parser("converge", help="convergence study at 0.95 x sharp CFL")
    sp.add_argument("--method", choices=sorted(METHODS), required=True)
    sp.add_argument("--kind", choices=["gl", "gll"], required=True)
    sp.add_argument("--p", required=True)
    sp.add_argument("--alphas", default="0.001,0.1,0.3,0.49")
    sp.add_argument("--resolutions", default="16,32,64,128")
    sp.add_argument("--lambda", dest="lam", default="optimized")
    sp.add_argument("--sharp-cfl", type=float, default=None)
    sp.add_argument("--safety", type=float, default=0.95)
    common(sp)
    sp.set_defaults(func=cmd_converge)

    sp = sub.add_parser("work-precision", help="error vs step count at 0.99 x sharp CFL")
    sp.add_argument("--method", choices=sorted(METHODS), required=True)
    sp.add_argument("--kind", choices=["gl", "gll"], required=True)
    sp.add_argument("--p", required=True)
    sp.add_argument("--alphas", default="0.001,0.1,0.3,0.49")
    sp.add_argument("--resolutions", default="16,32,64,128")
    sp.add_argument("--lambda", dest="lam", default="1.0+optimized",
                    help="'+'-separated cutoff modes to compare")
    sp.add_argument("--sharp-cfl", type=float, default=None)
    sp.add_argument("--safety", type=float, default=0.99)
    common(sp)
    sp.set_defaults(func=cmd_work_precision)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        os.makedirs(args.out_dir, exist_ok=True)
        t0 = time.perf_counter()
        status = args.func(args)
        write_manifest(args.out_dir, args.command.replace("-", "_"), args,
                       time.perf_counter() - t0)
        return status
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        print(parser.format_usage(), end="", file=sys.stderr)
        return 2
    except Exception as exc:  # computational failure
        print(f"failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
