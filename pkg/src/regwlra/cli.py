"""Command line interface: ``regwlra {solve,gen,bench,verify}``."""
from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from .io import load_matrix, save_matrix
from .matrix_core import WlraProblem
from .sketch import SketchSpec
from .wlra import AmConfig, Solver, alternating_minimization, auto_sketch_rows, svd_baseline
from .harness.bench import BenchConfig, run_benchmark, write_bench_csv
from .harness.datasets import ProfileKind, WeightProfile, gen_synthetic, gen_weights
from .harness.verify import SUITES, verify_suite


def _emit(obj, out=None):
    text = json.dumps(obj, indent=2, default=_json_default)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer, np.bool_)):
        return o.item()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def cmd_solve(args):
    A = load_matrix(args.input)
    W = load_matrix(args.weights) if args.weights else np.ones_like(A)
    problem = WlraProblem(A, W, args.k, args.lam, args.epsilon)
    sketch_u = sketch_v = None
    rows = args.sketch_rows
    if args.sketch_kind and rows is None:
        rows = auto_sketch_rows(problem, args.seed)
    if rows is not None:
        kind = args.sketch_kind or "countsketch"
        sketch_u = SketchSpec(kind, rows, args.seed + 1)
        sketch_v = SketchSpec(kind, rows, args.seed + 2)
    cfg = AmConfig(
        iterations=args.iters,
        sketch_u=sketch_u,
        sketch_v=sketch_v,
        init_seed=args.seed,
        solver=Solver(args.solver),
        resample=args.resample,
    )
    F, report = alternating_minimization(problem, cfg)
    U, V = (F.V.T, F.U.T) if problem.transposed else (F.U, F.V)
    svd_obj = svd_baseline(problem.A, problem.k).with_objective(problem).objective
    out = {
        "shape": list(A.shape),
        "k": problem.k,
        "lambda": problem.lam,
        "epsilon": problem.epsilon,
        "seed": args.seed,
        "sketch_kind": None if rows is None else (args.sketch_kind or "countsketch"),
        "final_objective": F.objective,
        "svd_objective": svd_obj,
        **report.to_dict(),
        "U": U,
        "V": V,
    }
    if args.save_factors:
        save_matrix(args.save_factors[0], U)
        save_matrix(args.save_factors[1], V)
    _emit(out, args.out)
    return 0


def cmd_gen(args):
    if args.what == "synthetic":
        M = gen_synthetic(args.n, args.d, args.sd, args.lam, args.seed)
    else:
        values = (args.value,) if args.profile == "uniform" else ()
        M = gen_weights(args.n, args.d, WeightProfile(ProfileKind(args.profile), values), args.seed)
    save_matrix(args.out, M)
    return 0


def cmd_bench(args):
    cfg = BenchConfig(
        n=args.n, d=args.d, k=args.k, lam=args.lam, sd_target=args.sd, profile=args.profile,
        iterations=args.iters, sketch_sizes=tuple(args.sizes), sketch_kind=args.sketch_kind,
        seed=args.seed, repeats=args.repeats, parallel=args.parallel,
        rank_follows_sketch=args.rank_follows_sketch,
    )
    report = run_benchmark(cfg)
    if args.csv:
        write_bench_csv(report, args.csv)
    _emit(report.to_dict(), args.out)
    return 0 if all(r["error"] is None for r in report.records) else 1


def cmd_verify(args):
    params = {k: v for k, v in vars(args).items()
              if k not in {"cmd", "suite", "func", "out", "verbose"} and v is not None}
    names = sorted(SUITES) if args.suite == "all" else [args.suite]
    results = [verify_suite(name, **(params if args.suite != "all" else {})) for name in names]
    _emit(results[0] if len(results) == 1 else results, args.out)
    return 0 if all(r["passed"] for r in results) else 1


def build_parser():
    p = argparse.ArgumentParser(prog="regwlra", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="cmd", required=True)

    s = sub.add_parser("solve", help="alternating minimization on a CSV/binary instance")
    s.add_argument("--input", required=True, help="data matrix A (.csv or binary)")
    s.add_argument("--weights", help="weight matrix W; all ones if omitted")
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--lambda", dest="lam", type=float, default=1.0)
    s.add_argument("--epsilon", type=float, default=0.5)
    s.add_argument("--iters", type=int, default=25)
    s.add_argument("--sketch-rows", type=int, help="sketch size t; derived from sd if only --sketch-kind is set")
    s.add_argument("--sketch-kind", choices=["gaussian", "countsketch"])
    s.add_argument("--resample", action="store_true", help="fresh sketches every iteration")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--solver", choices=[x.value for x in Solver], default="direct")
    s.add_argument("--out", help="report path (stdout if omitted)")
    s.add_argument("--save-factors", nargs=2, metavar=("U", "V"))
    s.set_defaults(func=cmd_solve)

    g = sub.add_parser("gen", help="generate synthetic inputs")
    gsub = g.add_subparsers(dest="what", required=True)
    gs = gsub.add_parser("synthetic")
    gs.add_argument("--n", type=int, required=True)
    gs.add_argument("--d", type=int, required=True)
    gs.add_argument("--sd", type=float, default=2.0)
    gs.add_argument("--lambda", dest="lam", type=float, default=1.0)
    gs.add_argument("--seed", type=int, default=0)
    gs.add_argument("--out", required=True)
    gw = gsub.add_parser("weights")
    gw.add_argument("--n", type=int, required=True)
    gw.add_argument("--d", type=int, required=True)
    gw.add_argument("--profile", choices=[x.value for x in ProfileKind if x is not ProfileKind.CUSTOM],
                    default="dense")
    gw.add_argument("--value", type=float, default=1.0, help="weight for the uniform profile")
    gw.add_argument("--seed", type=int, default=0)
    gw.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen)

    b = sub.add_parser("bench", help="sketch-size sweep: svd vs am vs am_sketched")
    b.add_argument("--n", type=int, default=1000)
    b.add_argument("--d", type=int, default=200)
    b.add_argument("--k", type=int, default=20)
    b.add_argument("--lambda", dest="lam", type=float, default=1.0)
    b.add_argument("--sd", type=float, default=2.0)
    b.add_argument("--profile", choices=["dense", "binary", "uniform"], default="dense")
    b.add_argument("--iters", type=int, default=25)
    b.add_argument("--sizes", type=int, nargs="+", default=[4, 8, 12, 16, 20])
    b.add_argument("--sketch-kind", choices=["gaussian", "countsketch"], default="countsketch")
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--repeats", type=int, default=3)
    b.add_argument("--parallel", action="store_true")
    b.add_argument("--rank-follows-sketch", action="store_true")
    b.add_argument("--out")
    b.add_argument("--csv")
    b.set_defaults(func=cmd_bench)

    v = sub.add_parser("verify", help="empirical checks; exit 0 iff all pass")
    vsub = v.add_subparsers(dest="suite", required=True)
    t31 = vsub.add_parser("shared_sketch", aliases=["theorem31"])
    for flag in ("--n", "--d", "--k", "--trials", "--seed", "--ell"):
        t31.add_argument(flag, type=int)
    t31.add_argument("--lambda", dest="lam", type=float)
    t31.add_argument("--sd", type=float)
    t31.add_argument("--epsilon", type=float)
    t31.add_argument("--kind", choices=["gaussian", "countsketch"])
    sk = vsub.add_parser("sketch")
    sk.add_argument("--kind", choices=["gaussian", "countsketch"])
    sk.add_argument("--rows", type=int)
    sk.add_argument("--trials", type=int)
    sk.add_argument("--seed", type=int)
    l25 = vsub.add_parser("product_tail", aliases=["lemma25"])
    l25.add_argument("--trials", type=int)
    l25.add_argument("--eps-hat", dest="eps_hat", type=float)
    l25.add_argument("--gamma", type=float)
    l25.add_argument("--c", type=float)
    l25.add_argument("--seed", type=int)
    l25.add_argument("--kind", choices=["gaussian", "countsketch"])
    rnd = vsub.add_parser("rounding")
    rnd.add_argument("--instances", type=int)
    rnd.add_argument("--seed", type=int)
    ric = vsub.add_parser("richardson")
    ric.add_argument("--pairs", type=int)
    ric.add_argument("--seed", type=int)
    pre = vsub.add_parser("preconditioner")
    pre.add_argument("--ell", type=int)
    pre.add_argument("--seed", type=int)
    rr = vsub.add_parser("rank_reduce")
    rr.add_argument("--c", type=float)
    rr.add_argument("--seed", type=int)
    of = vsub.add_parser("objective_forms")
    of.add_argument("--instances", type=int)
    of.add_argument("--seed", type=int)
    vsub.add_parser("all")
    for sp in {id(x): x for x in vsub.choices.values()}.values():
        sp.add_argument("--out")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"regwlra: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
