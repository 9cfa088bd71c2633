"""Command-line entry points.

Subcommands: walk, speed, angle-chain, renewal, crosscheck, sweep-k.
Exit codes: 0 success, 2 validation/usage error, 3 runtime error.
``HULLWALK_THREADS`` overrides ``--threads``.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import time

import numpy as np

from . import angle_chain
from .engine import WalkConfig, run, run_replicas
from .errors import SamplerStall, SplitSamplerError
from .estimators import (crosscheck_renewal_speed, direction_stats, drift_profile,
                         k_sweep, speed_estimate)
from .renewal import collect_renewals, run_split
from .traceio import SummaryDocument, write_summary, write_trace


def _parse_ell(text):
    try:
        vals = tuple(float(v) for v in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"cannot parse unit vector {text!r}") from exc
    return vals


def _add_walk_flags(p: argparse.ArgumentParser):
    p.add_argument("--d", type=int, default=2, help="ambient dimension (>= 2)")
    p.add_argument("--k", type=int, default=1, help="memory length (>= d-1)")
    p.add_argument("--steps", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--replica", type=int, default=0)
    p.add_argument("--replicas", type=int, default=1)
    p.add_argument("--delta", type=float, default=0.1,
                   help="corridor ball radius, in (0, 1/8)")
    p.add_argument("--variant", choices=["ball", "sphere", "homogeneous"],
                   default="ball")
    p.add_argument("--ell", type=_parse_ell, default=None,
                   help="unit drift direction for the homogeneous variant, e.g. 1,0")
    p.add_argument("--sampler", choices=["rejection", "direct2d"], default=None)
    p.add_argument("--thin", type=int, default=1,
                   help="store every thin-th trace record")
    p.add_argument("--out", type=str, default=None)
    p.add_argument("--format", choices=["jsonl", "csv"], default="jsonl")
    p.add_argument("--threads", type=int, default=1)


def _threads(args) -> int:
    env = os.environ.get("HULLWALK_THREADS")
    if env is not None:
        return max(1, int(env))
    return max(1, args.threads)


def _config(args, replica=None, thin=None) -> WalkConfig:
    return WalkConfig(
        d=args.d, k=args.k, steps=args.steps, variant=args.variant,
        ell=args.ell, sampler=args.sampler, delta=args.delta, seed=args.seed,
        replica=args.replica if replica is None else replica,
        trace_thin=args.thin if thin is None else thin,
    ).validate()


def _emit(doc: SummaryDocument, args):
    if args.out:
        write_summary(doc, args.out)
        print(f"summary written to {args.out}")
    else:
        import json

        from .traceio import _jsonable
        print(json.dumps(_jsonable(doc.as_dict()), sort_keys=True, indent=2))


def _cmd_walk(args) -> int:
    cfg = _config(args)
    t0 = time.perf_counter()
    try:
        result = run(cfg)
    except (SamplerStall, SplitSamplerError) as exc:
        if args.out and getattr(exc, "partial", None) is not None:
            write_trace(exc.partial, args.out, args.format)
            print(f"partial trace flushed to {args.out}", file=sys.stderr)
        raise
    if args.out:
        write_trace(result, args.out, args.format)
        print(f"trace written to {args.out} ({result.trace_n.shape[0]} records)")
    print(f"final position {result.final.tolist()}  "
          f"speed {result.speed_final:.6f}  "
          f"proposals/step {result.total_proposals / result.steps:.3f}  "
          f"[{time.perf_counter() - t0:.2f}s]")
    return 0


def _cmd_speed(args) -> int:
    cfg = _config(args, thin=max(1, args.steps))
    t0 = time.perf_counter()
    runs = run_replicas(cfg, args.replicas, threads=_threads(args))
    est = speed_estimate(runs)
    results = {"speed": est.as_dict()}
    tails = [drift_profile(r)[-1] for r in runs]
    results["tail_drift_mean"] = float(np.mean(tails))
    results["acceptance"] = float(
        sum(r.steps for r in runs) / sum(r.total_proposals for r in runs))
    if args.replicas >= 50:
        results["direction"] = direction_stats(runs).as_dict()
    doc = SummaryDocument(command="speed", config=est.fingerprint,
                          results=results, wall_clock_s=time.perf_counter() - t0)
    _emit(doc, args)
    print(f"v_hat = {est.v_hat:.6f} +/- {est.stderr:.6f} "
          f"(95% CI {est.ci95[0]:.6f}..{est.ci95[1]:.6f})")
    return 0


def _cmd_angle_chain(args) -> int:
    t0 = time.perf_counter()
    chain = angle_chain.simulate_chain(args.n, seed=args.seed,
                                       init=args.init, burnin=args.burnin)
    closed = angle_chain.speed_2_1("closed_form")
    mc = angle_chain.speed_2_1("chain_mc", n=args.n, seed=args.seed)
    results = {
        "n": args.n, "burnin": args.burnin, "init": args.init,
        "ks_distance": chain.ks_distance,
        "speed_closed_form": closed.value,
        "speed_chain_mc": mc.value, "speed_chain_mc_stderr": mc.stderr,
    }
    doc = SummaryDocument(command="angle-chain",
                          config={"n": args.n, "seed": args.seed,
                                  "burnin": args.burnin, "init": args.init},
                          results=results, wall_clock_s=time.perf_counter() - t0)
    _emit(doc, args)
    print(f"KS distance vs stationary law: {chain.ks_distance:.5f} "
          f"(n={args.n}); chain speed {mc.value:.6f} +/- {mc.stderr:.6f}")
    return 0


def _cmd_renewal(args) -> int:
    cfg = _config(args, thin=max(1, args.steps))
    t0 = time.perf_counter()
    result = run_split(cfg, args.blocks)
    records, surv = collect_renewals(result)
    results = {
        "blocks": args.blocks, "k": cfg.k, "delta": cfg.delta,
        "alpha": result.alpha, "n_renewals": len(records),
        "good_geometry_fraction": result.good_fraction,
        "mean_gap_blocks": (float(np.mean(np.diff(result.taus)))
                            if len(records) > 1 else None),
        "gap_tail_rate_c": surv.c,
        "survival": {"r": surv.r, "empirical": surv.survival,
                     "wilson_high": surv.wilson_high, "bound": surv.bound},
    }
    doc = SummaryDocument(command="renewal", config=cfg.fingerprint(),
                          results=results, wall_clock_s=time.perf_counter() - t0)
    _emit(doc, args)
    print(f"{len(records)} renewals in {args.blocks} blocks "
          f"(good-geometry fraction {result.good_fraction:.3f})")
    return 0


def _cmd_crosscheck(args) -> int:
    if args.ell is None:
        args.ell = tuple([1.0] + [0.0] * (args.d - 1))
    args.variant = "homogeneous"
    cfg = _config(args, thin=max(1, args.steps))
    t0 = time.perf_counter()
    split = run_split(cfg, args.blocks)
    check = crosscheck_renewal_speed(split, np.asarray(args.ell))
    runs = run_replicas(cfg, max(2, args.replicas), threads=_threads(args))
    direct = speed_estimate(runs)
    combined = math.hypot(check.v_stderr, direct.stderr)
    results = {
        "renewal": check.as_dict(),
        "direct": direct.as_dict(),
        "difference": check.v_derived - direct.v_hat,
        "combined_sigma": combined,
    }
    doc = SummaryDocument(command="crosscheck", config=cfg.fingerprint(),
                          results=results, wall_clock_s=time.perf_counter() - t0)
    _emit(doc, args)
    print(f"v_derived = {check.v_derived:.6f} +/- {check.v_stderr:.6f}  "
          f"vs direct {direct.v_hat:.6f} +/- {direct.stderr:.6f}")
    return 0


def _cmd_sweep_k(args) -> int:
    ks = [int(v) for v in args.k_list.split(",")]
    t0 = time.perf_counter()
    rows = k_sweep(args.d, ks, steps=args.steps, replicas=args.replicas,
                   seed=args.seed, variant=args.variant,
                   threads=_threads(args))
    results = {"rows": [r.as_dict() for r in rows]}
    doc = SummaryDocument(command="sweep-k",
                          config={"d": args.d, "k_list": sorted(set(ks)),
                                  "steps": args.steps,
                                  "replicas": args.replicas,
                                  "variant": args.variant, "seed": args.seed},
                          results=results, wall_clock_s=time.perf_counter() - t0)
    _emit(doc, args)
    print(f"{'k':>4}  {'v_hat':>10}  {'stderr':>9}  ci-overlap-prev")
    for r in rows:
        ov = "-" if r.ci_overlaps_previous is None else str(r.ci_overlaps_previous)
        print(f"{r.k:>4}  {r.estimate.v_hat:>10.6f}  {r.estimate.stderr:>9.6f}  {ov}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hullwalk",
        description="Hull-avoiding random walk simulation and analysis")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("walk", help="simulate one trajectory and write its trace")
    _add_walk_flags(p)
    p.set_defaults(fn=_cmd_walk)

    p = sub.add_parser("speed", help="replicated speed estimate")
    _add_walk_flags(p)
    p.set_defaults(fn=_cmd_speed)

    p = sub.add_parser("angle-chain", help="stationary interior-angle chain")
    p.add_argument("--n", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--burnin", type=int, default=angle_chain.DEFAULT_BURNIN)
    p.add_argument("--init", type=float, default=0.0)
    p.add_argument("--out", type=str, default=None)
    p.set_defaults(fn=_cmd_angle_chain)

    p = sub.add_parser("renewal", help="split sampler and regeneration statistics")
    _add_walk_flags(p)
    p.add_argument("--blocks", type=int, default=100_000)
    p.set_defaults(fn=_cmd_renewal)

    p = sub.add_parser("crosscheck", help="renewal speed vs direct speed (homogeneous)")
    _add_walk_flags(p)
    p.add_argument("--blocks", type=int, default=300_000)
    p.set_defaults(fn=_cmd_crosscheck)

    p = sub.add_parser("sweep-k", help="speed table across memory lengths")
    _add_walk_flags(p)
    p.add_argument("--k-list", type=str, default="1,2,3")
    p.set_defaults(fn=_cmd_sweep_k)

    return parser


def dispatch(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    try:
        return args.fn(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except RuntimeError as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 3


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
