"""Lloyd's K-means with k-means++ seeding, used as the solver warm start."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import ValidationError
from .operators import Shape


@dataclass
class KmeansResult:
    labels: np.ndarray
    centroids: np.ndarray  # k x d
    objective: float
    iterations: int
    history: list = field(default_factory=list)


def _sq_dists(X, centers):
    diff = X[:, None, :] - centers[None, :, :]
    return np.einsum("ijt,ijt->ij", diff, diff)


def kmeans_pp(X, k, rng):
    """k-means++ seeding on the rows of ``X``."""
    n = X.shape[0]
    centers = [X[rng.integers(n)]]
    for _ in range(1, k):
        d2 = _sq_dists(X, np.array(centers)).min(axis=1)
        total = d2.sum()
        if total <= 0:
            # all remaining points coincide with a chosen center
            idx = rng.integers(n)
        else:
            idx = rng.choice(n, p=d2 / total)
        centers.append(X[idx])
    return np.array(centers, dtype=float)


def _repair_empty(X, labels, centers, k):
    # move the point farthest from its own centroid into each empty cluster
    for j in range(k):
        if np.any(labels == j):
            continue
        own = ((X - centers[labels]) ** 2).sum(axis=1)
        counts = np.bincount(labels, minlength=k)
        own[counts[labels] <= 1] = -1.0  # never empty another cluster
        far = int(np.argmax(own))
        labels[far] = j
        centers[j] = X[far]
    return labels


def lloyd(S, k: int, seed: int = 0, max_iters: int = 300) -> KmeansResult:
    """Cluster the columns of the d x n matrix ``S`` into ``k`` groups.

    Deterministic for a fixed ``seed``. The returned labelling never has an
    empty cluster.
    """
    X = np.asarray(S, dtype=float).T
    n = X.shape[0]
    if k < 1 or k > n:
        raise ValidationError(f"k={k} must satisfy 1 <= k <= n={n}")
    if max_iters < 1:
        raise ValidationError("max_iters must be >= 1")
    rng = np.random.default_rng(seed)
    centers = kmeans_pp(X, k, rng)
    labels = np.argmin(_sq_dists(X, centers), axis=1)
    labels = _repair_empty(X, labels, centers, k)

    history = []
    it = 0
    for it in range(1, max_iters + 1):
        for j in range(k):
            centers[j] = X[labels == j].mean(axis=0)
        history.append(float(((X - centers[labels]) ** 2).sum()))
        new = np.argmin(_sq_dists(X, centers), axis=1)
        new = _repair_empty(X, new, centers.copy(), k)
        if np.array_equal(new, labels):
            break
        labels = new

    for j in range(k):
        centers[j] = X[labels == j].mean(axis=0)
    objective = float(((X - centers[labels]) ** 2).sum())
    return KmeansResult(labels=labels.astype(int), centroids=centers,
                        objective=objective, iterations=it, history=history)


def align_to_sizes(labels, sizes) -> np.ndarray:
    """Rename clusters so their sizes best match the targets ``sizes``.

    Cluster names are arbitrary in K-means but cardinality targets are
    attached to specific cluster indices; the renaming minimises the total
    absolute size mismatch (optimal assignment, ties to the lowest index).
    """
    labels = np.asarray(labels, dtype=int)
    sizes = np.asarray(sizes)
    counts = np.bincount(labels, minlength=sizes.size)
    cost = np.abs(counts[:, None] - sizes[None, :])
    rows, cols = linear_sum_assignment(cost)
    mapping = np.empty(sizes.size, dtype=int)
    mapping[rows] = cols
    return mapping[labels]


def to_assignment(labels, shape: Shape) -> np.ndarray:
    """One-hot point-major encoding of integer labels."""
    labels = np.asarray(labels, dtype=int)
    if labels.shape != (shape.n,):
        raise ValidationError(f"expected {shape.n} labels, got {labels.shape}")
    if labels.size and (labels.min() < 0 or labels.max() >= shape.k):
        raise ValidationError(f"labels must lie in [0, {shape.k})")
    x = np.zeros((shape.n, shape.k))
    x[np.arange(shape.n), labels] = 1.0
    return x.ravel()
