"""Clustering objectives and the point-to-centroid distance matrix."""

from __future__ import annotations

import numpy as np

from .errors import DimensionError, ValidationError
from .operators import Shape, c_apply, perm_t_apply


def _data(S) -> np.ndarray:
    S = np.asarray(S, dtype=float)
    if S.ndim != 2 or S.shape[0] < 1 or S.shape[1] < 1:
        raise DimensionError(f"S must be a non-empty d x n matrix, got shape {S.shape}")
    return S


def compute_B(S, w) -> np.ndarray:
    """Squared distances ``B[i, j] = ||s_i - S Lambda_j w||^2`` as an n x k array."""
    S = _data(S)
    n = S.shape[1]
    w = np.asarray(w, dtype=float)
    if w.ndim != 1 or w.size == 0 or w.size % n:
        raise DimensionError(f"w length {w.size} incompatible with n={n}")
    k = w.size // n
    centers = w.reshape(k, n) @ S.T  # k x d
    diff = S.T[:, None, :] - centers[None, :, :]
    return np.einsum("ijt,ijt->ij", diff, diff)


def objective_value(S, x, w) -> float:
    """Relaxed objective ``sum_ij x_ij B_ij`` for point-major ``x``."""
    B = compute_B(S, w)
    x = np.asarray(x, dtype=float)
    if x.shape != (B.size,):
        raise DimensionError(f"x must have length {B.size}, got shape {x.shape}")
    return float(x @ B.ravel())


def kmeans_objective(S, labels, k: int) -> float:
    """Within-cluster sum of squares of a hard labelling.

    Empty clusters contribute nothing.
    """
    S = _data(S)
    labels = np.asarray(labels)
    if labels.shape != (S.shape[1],):
        raise DimensionError(f"labels must have length {S.shape[1]}, got {labels.shape}")
    if labels.size and (labels.min() < 0 or labels.max() >= k):
        raise ValidationError(f"labels must lie in [0, {k})")
    total = 0.0
    for j in range(k):
        members = S[:, labels == j]
        if members.shape[1]:
            total += float(((members - members.mean(axis=1, keepdims=True)) ** 2).sum())
    return total


def coupling_weights(x, shape: Shape) -> np.ndarray:
    """Cluster-major weights ``w = P^T x / (C x)`` used to start the solver.

    Raises ValidationError if some cluster has zero mass.
    """
    x = np.asarray(x, dtype=float)
    mass = c_apply(x, shape)
    if np.any(mass[: shape.k] == 0):
        empty = int(np.flatnonzero(mass[: shape.k] == 0)[0])
        raise ValidationError(f"cluster {empty} is empty; cannot normalise weights")
    return perm_t_apply(x / mass, shape)
