"""Command-line entry point: ``ckmeans --points data.csv --k 3 ...``."""

from __future__ import annotations

import argparse
import logging
import os
import sys
import time
from dataclasses import asdict

import numpy as np

from .admm import SolverConfig, best_of, run, run_sweep
from .constraints import ConstraintSet, validate
from .errors import IngestionError, OracleSizeError, ValidationError
from .io import gen_blobs, parse_constraints, parse_labels, parse_points, serialize_report
from .metrics import metric_accuracy, metric_nmi
from .operators import Shape
from .oracle import brute_force_solve

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NOT_CONVERGED = 3

log = logging.getLogger("ckmeans")


def _float_list(text):
    return [float(t) for t in text.split(",") if t.strip()]


def _int_list(text):
    return [int(t) for t in text.split(",") if t.strip()]


def parse_sweep(text: str):
    """``"seeds=0,1,2;rhos=0.01,0.1"`` -> (seeds, rhos)."""
    fields = {}
    for part in text.split(";"):
        if not part.strip():
            continue
        key, _, value = part.partition("=")
        fields[key.strip()] = value
    unknown = set(fields) - {"seeds", "rhos"}
    if unknown:
        raise ValidationError(f"unknown sweep field(s): {', '.join(sorted(unknown))}")
    seeds = _int_list(fields.get("seeds", "0"))
    rhos = _float_list(fields.get("rhos", "0.1"))
    if not seeds or not rhos:
        raise ValidationError("sweep needs at least one seed and one rho")
    return seeds, rhos


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ckmeans",
                                description="K-means with cardinality and pairwise constraints.")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--points", help="CSV file, one point per row")
    src.add_argument("--gen-blobs", metavar="K,PER,D,SPREAD,SEP",
                     help="generate Gaussian blobs instead of reading points")
    p.add_argument("--k", type=int, help="number of clusters (defaults to K of --gen-blobs)")
    p.add_argument("--constraints", help="file of ML/CL/CARD lines (0-based indices)")
    p.add_argument("--truth", help="ground-truth labels, one per line, for NMI/accuracy")
    p.add_argument("--rho", type=float, default=SolverConfig.rho,
                   help="ADMM penalty, shared by all constraint groups (default %(default)s)")
    p.add_argument("--max-iters", type=int, default=SolverConfig.max_outer_iters,
                   help="outer iteration cap (default %(default)s)")
    p.add_argument("--cg-tol", type=float, default=SolverConfig.cg_tol,
                   help="relative residual for the inner CG solves (default %(default)s)")
    p.add_argument("--seed", type=int, default=0,
                   help="seed for the K-means warm start and for --gen-blobs")
    p.add_argument("--sweep", help='run a grid, e.g. "seeds=0,1,2;rhos=0.01,0.1,1"')
    p.add_argument("--workers", type=int, default=1, help="threads for --sweep")
    p.add_argument("--oracle", action="store_true", help="also run the exhaustive solver")
    p.add_argument("--oracle-limit", type=int, default=10**7)
    p.add_argument("--out", help="write the JSON report here instead of stdout")
    return p


def _load(args):
    truth = None
    if args.gen_blobs:
        try:
            k, per, d, spread, sep = args.gen_blobs.split(",")
            S, truth = gen_blobs(int(k), int(per), int(d), float(spread), float(sep), args.seed)
        except ValueError as exc:
            raise ValidationError(f"--gen-blobs: {exc}") from None
        k = args.k if args.k is not None else int(k)
    else:
        S = parse_points(args.points)
        if args.k is None:
            raise ValidationError("--k is required with --points")
        k = args.k
    n = S.shape[1]
    if not 1 <= k <= n:
        raise ValidationError(f"k={k} must satisfy 1 <= k <= n={n}")
    if args.constraints:
        cs = parse_constraints(args.constraints, n, k)
    else:
        cs = ConstraintSet()
    if args.truth:
        truth = parse_labels(args.truth)
        if truth.size != n:
            raise ValidationError(f"--truth has {truth.size} labels for n={n} points")
    return S, k, cs, truth


def solve_command(args) -> tuple:
    """Run the solver as described by ``args``; returns (report, exit code)."""
    S, k, cs, truth = _load(args)
    report_ = validate(cs, Shape(S.shape[1], k, S.shape[0]))
    for msg in report_.warnings:
        log.warning(msg)
    cfg = SolverConfig(rho=args.rho, max_outer_iters=args.max_iters, cg_tol=args.cg_tol,
                       seed=args.seed)
    t0 = time.perf_counter()
    if args.sweep:
        seeds, rhos = parse_sweep(args.sweep)
        results = run_sweep(S, k, cs, seeds, rhos, cfg, workers=args.workers)
        result = best_of(results)
        runs = [{"seed": r.seed, "rho": r.rho, "objective": r.objective,
                 "feasible": r.feasible, "converged": r.converged,
                 "iterations": r.iterations} for r in results]
    else:
        result = run(S, k, cs, cfg)
        runs = None
    log.info("solver finished: objective %.6g, converged %s", result.objective, result.converged)

    report = {"solve": result.to_dict(), "config": asdict(cfg),
              "instance": {"n": int(S.shape[1]), "k": int(k), "d": int(S.shape[0]),
                           "cardinalities": (None if cs.cardinalities is None
                                             else list(cs.cardinalities)),
                           "must_links": [list(p) for p in cs.must_links],
                           "cannot_links": [list(p) for p in cs.cannot_links]}}
    if runs is not None:
        report["sweep"] = runs
    if args.oracle:
        try:
            oracle = brute_force_solve(S, k, cs, limit=args.oracle_limit)
        except OracleSizeError as exc:
            log.warning("oracle skipped: %s", exc)
            report["oracle"] = {"skipped": str(exc)}
        else:
            entry = oracle.to_dict()
            if not oracle.infeasible:
                best = oracle.best_objective
                entry["gap"] = (result.objective - best) / best if best > 0 else (
                    result.objective - best)
            report["oracle"] = entry
    if truth is not None:
        report["metrics"] = {"nmi": metric_nmi(result.labels, truth),
                             "accuracy": metric_accuracy(result.labels, truth, k)}
    report["wall_time"] = time.perf_counter() - t0
    code = EXIT_OK if result.converged else EXIT_NOT_CONVERGED
    return report, code


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("CKMEANS_LOG", "WARNING").upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        report, code = solve_command(args)
    except (ValidationError, IngestionError) as exc:
        print(f"ckmeans: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"ckmeans: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    text = serialize_report(report)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
