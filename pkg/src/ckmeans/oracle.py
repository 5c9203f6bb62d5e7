"""Exhaustive search over all k**n labellings for tiny instances."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import kernels
from .constraints import ConstraintSet
from .errors import OracleSizeError

TIE_TOL = 1e-12


@dataclass
class OracleResult:
    best_labels: Optional[np.ndarray]
    best_objective: float
    feasible_count: int
    optimal_count: int

    @property
    def infeasible(self) -> bool:
        return self.feasible_count == 0

    def to_dict(self) -> dict:
        return {
            "best_labels": None if self.best_labels is None else [int(t) for t in self.best_labels],
            "best_objective": None if self.infeasible else float(self.best_objective),
            "feasible_count": int(self.feasible_count),
            "optimal_count": int(self.optimal_count),
        }


def feasible_assignments(n: int, k: int, cs: ConstraintSet):
    """Yield, in lexicographic order, every labelling that meets ``cs``."""
    u = cs.cardinalities
    for labels in itertools.product(range(k), repeat=n):
        if any(labels[a] != labels[b] for a, b in cs.must_links):
            continue
        if any(labels[a] == labels[b] for a, b in cs.cannot_links):
            continue
        if u is not None and tuple(np.bincount(labels, minlength=k)) != u:
            continue
        yield labels


def _chunk_labels(start, stop, n, k):
    idx = np.arange(start, stop, dtype=np.int64)
    powers = k ** np.arange(n - 1, -1, -1, dtype=np.int64)
    return (idx[:, None] // powers[None, :]) % k


def _chunk_scores(X, L, k, cs):
    # X: n x d points, L: m x n labels -> (feasible mask, objectives)
    m, n = L.shape
    ok = np.ones(m, dtype=bool)
    for a, b in cs.must_links:
        ok &= L[:, a] == L[:, b]
    for a, b in cs.cannot_links:
        ok &= L[:, a] != L[:, b]
    onehot = L[:, :, None] == np.arange(k)[None, None, :]
    counts = onehot.sum(axis=1)
    if cs.cardinalities is not None:
        ok &= np.all(counts == np.asarray(cs.cardinalities)[None, :], axis=1)
    sums = np.einsum("mnk,nd->mkd", onehot.astype(float), X)
    means = sums / np.maximum(counts, 1)[:, :, None]
    dev = X[None, :, :] - np.take_along_axis(means, L[:, :, None], axis=1)
    return ok, (dev ** 2).sum(axis=(1, 2))


def _enumerate_numpy(S, k, cs, tol, chunk=1 << 15):
    X = np.asarray(S, dtype=float).T
    n = X.shape[0]
    total = k ** n
    fmin, nfeas = math.inf, 0
    for start in range(0, total, chunk):
        L = _chunk_labels(start, min(start + chunk, total), n, k)
        ok, f = _chunk_scores(X, L, k, cs)
        nfeas += int(ok.sum())
        if ok.any():
            fmin = min(fmin, float(f[ok].min()))
    if nfeas == 0:
        return None, math.inf, 0, 0
    best, nopt = None, 0
    for start in range(0, total, chunk):
        L = _chunk_labels(start, min(start + chunk, total), n, k)
        ok, f = _chunk_scores(X, L, k, cs)
        hit = ok & (f <= fmin + tol)
        nopt += int(hit.sum())
        if best is None and hit.any():
            best = L[np.argmax(hit)].astype(np.intp)
    return best, fmin, nfeas, nopt


def brute_force_solve(S, k: int, cs: ConstraintSet = ConstraintSet(), limit: int = 10**7,
                      backend: str = "auto") -> OracleResult:
    """Global optimum of the within-cluster sum of squares under ``cs``.

    Cluster relabellings are not merged, so ``optimal_count`` counts
    labellings. Ties within 1e-12 resolve to the lexicographically smallest
    labelling. An infeasible ``cs`` gives ``feasible_count == 0``.
    """
    S = np.ascontiguousarray(S, dtype=float)
    n = S.shape[1]
    if k ** n > limit:
        raise OracleSizeError(f"k**n = {k}**{n} exceeds the enumeration limit {limit}")
    use_compiled = kernels.compiled is not None and backend != "python"
    if use_compiled:
        u = np.asarray(cs.cardinalities if cs.cardinalities is not None else [0] * k,
                       dtype=np.intc)
        ml = np.asarray(cs.must_links, dtype=np.intc).reshape(-1, 2)
        cl = np.asarray(cs.cannot_links, dtype=np.intc).reshape(-1, 2)
        best, fmin, nfeas, nopt = kernels.compiled.enumerate_best(
            S, k, u, cs.cardinalities is not None, ml, cl, TIE_TOL)
    else:
        best, fmin, nfeas, nopt = _enumerate_numpy(S, k, cs, TIE_TOL)
    return OracleResult(best_labels=best, best_objective=float(fmin),
                        feasible_count=int(nfeas), optimal_count=int(nopt))
