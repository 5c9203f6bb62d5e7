"""Matrix-free structured operators of the constrained K-means program.

Two layouts are used for length ``n*k`` vectors:

* point-major (assignment ``x``, auxiliary ``z``, most duals): entry for
  point ``i`` and cluster ``j`` lives at ``i*k + j``;
* cluster-major (coupling weights ``w``): entry for point ``p`` and cluster
  ``j`` lives at ``j*n + p``.

Every operator below works by reshaping, so no ``nk x nk`` matrix is ever
formed. Dense counterparts exist only in the test-suite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, ValidationError

__all__ = [
    "Shape",
    "SelectionOperator",
    "psi_t_apply",
    "psi_apply",
    "perm_apply",
    "perm_t_apply",
    "c_apply",
    "c_t_apply",
    "q_apply",
    "q_t_apply",
    "lambda_apply",
    "lambda_t_apply",
    "centroid",
    "selection_apply",
    "selection_t_apply",
]


@dataclass(frozen=True)
class Shape:
    """Problem dimensions: ``n`` points, ``k`` clusters, ``d`` features."""

    n: int
    k: int
    d: int = 1

    def __post_init__(self):
        if self.n < 1 or self.k < 1 or self.d < 1:
            raise ValidationError(f"shape entries must be >= 1, got {self}")
        if self.k > self.n:
            raise ValidationError(f"k={self.k} exceeds n={self.n}")

    @property
    def nk(self) -> int:
        return self.n * self.k


def _check(v, length, name="vector"):
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or v.shape[0] != length:
        raise DimensionError(f"{name} must have length {length}, got shape {v.shape}")
    return v


def psi_t_apply(x, shape: Shape) -> np.ndarray:
    """Per-point sums of the k association values (``Psi^T x``)."""
    x = _check(x, shape.nk)
    return x.reshape(shape.n, shape.k).sum(axis=1)


def psi_apply(y, shape: Shape) -> np.ndarray:
    """Adjoint of :func:`psi_t_apply`: replicate each point's scalar k times."""
    y = _check(y, shape.n)
    return np.repeat(y, shape.k)


def perm_apply(v, shape: Shape) -> np.ndarray:
    """Reorder a cluster-major vector into point-major order (``P v``)."""
    v = _check(v, shape.nk)
    return v.reshape(shape.k, shape.n).T.ravel()


def perm_t_apply(v, shape: Shape) -> np.ndarray:
    """Reorder a point-major vector into cluster-major order (``P^T v``)."""
    v = _check(v, shape.nk)
    return v.reshape(shape.n, shape.k).T.ravel()


def c_apply(x, shape: Shape) -> np.ndarray:
    """Cluster masses replicated at every point's slot (``C x``).

    Output entry ``(i, j)`` is ``sum_l x[l, j]`` and does not depend on ``i``.
    """
    x = _check(x, shape.nk)
    mass = x.reshape(shape.n, shape.k).sum(axis=0)
    return np.tile(mass, shape.n)


def c_t_apply(v, shape: Shape) -> np.ndarray:
    """Adjoint of :func:`c_apply`. ``C`` is symmetric, so this is ``C v``."""
    return c_apply(v, shape)


def q_apply(xc, shape: Shape) -> np.ndarray:
    """Per-cluster sums of a cluster-major vector (``Q xc``)."""
    xc = _check(xc, shape.nk)
    return xc.reshape(shape.k, shape.n).sum(axis=1)


def q_t_apply(t, shape: Shape) -> np.ndarray:
    """Adjoint of :func:`q_apply`: broadcast ``t[j]`` over cluster j's block."""
    t = _check(t, shape.k)
    return np.repeat(t, shape.n)


def lambda_apply(w, j: int, shape: Shape) -> np.ndarray:
    """Extract the cluster-j block of a cluster-major vector (``Lambda_j w``)."""
    w = _check(w, shape.nk)
    if not 0 <= j < shape.k:
        raise IndexError(f"cluster index {j} out of range for k={shape.k}")
    return w[j * shape.n:(j + 1) * shape.n].copy()


def lambda_t_apply(v, j: int, shape: Shape) -> np.ndarray:
    """Adjoint of :func:`lambda_apply`: embed ``v`` into block j of zeros."""
    v = _check(v, shape.n)
    if not 0 <= j < shape.k:
        raise IndexError(f"cluster index {j} out of range for k={shape.k}")
    out = np.zeros(shape.nk)
    out[j * shape.n:(j + 1) * shape.n] = v
    return out


def centroid(S, w, j: int) -> np.ndarray:
    """Weighted combination ``sum_p w[p, j] s_p`` of the columns of ``S``."""
    S = np.asarray(S, dtype=float)
    if S.ndim != 2:
        raise DimensionError(f"S must be d x n, got shape {S.shape}")
    d, n = S.shape
    w = np.asarray(w, dtype=float)
    if w.ndim != 1 or w.shape[0] % n != 0 or w.shape[0] == 0:
        raise DimensionError(f"w length {w.shape} incompatible with n={n}")
    k = w.shape[0] // n
    if not 0 <= j < k:
        raise IndexError(f"cluster index {j} out of range for k={k}")
    return S @ w[j * n:(j + 1) * n]


@dataclass(frozen=True)
class SelectionOperator:
    """One side of a pairwise selection matrix (``E1``/``E2`` or ``E3``/``E4``).

    ``side=0`` selects the first endpoint of every pair, ``side=1`` the second.
    Each constraint contributes a block of k consecutive rows.
    """

    pairs: tuple
    side: int

    def __post_init__(self):
        if self.side not in (0, 1):
            raise ValidationError(f"side must be 0 or 1, got {self.side}")
        for a, b in self.pairs:
            if a == b:
                raise ValidationError(f"pair ({a}, {b}) links a point to itself")

    @property
    def count(self) -> int:
        return len(self.pairs)

    def indices(self, shape: Shape) -> np.ndarray:
        idx = np.array([p[self.side] for p in self.pairs], dtype=np.intp)
        if idx.size and (idx.min() < 0 or idx.max() >= shape.n):
            bad = int(idx[(idx < 0) | (idx >= shape.n)][0])
            raise ValidationError(f"point index {bad} out of range for n={shape.n}")
        return idx


def selection_apply(op: SelectionOperator, x, shape: Shape) -> np.ndarray:
    """Stack the k label entries of the selected endpoint of each pair."""
    x = _check(x, shape.nk)
    idx = op.indices(shape)
    return x.reshape(shape.n, shape.k)[idx].ravel()


def selection_t_apply(op: SelectionOperator, y, shape: Shape) -> np.ndarray:
    """Adjoint of :func:`selection_apply`; repeated points accumulate."""
    idx = op.indices(shape)
    y = _check(y, shape.k * idx.size)
    out = np.zeros((shape.n, shape.k))
    np.add.at(out, idx, y.reshape(idx.size, shape.k))
    return out.ravel()
