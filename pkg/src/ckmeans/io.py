"""Reading points and constraint files, synthetic blobs, and report output."""

from __future__ import annotations

import json
import math

import numpy as np

from .constraints import ConstraintSet, validate
from .errors import IngestionError, ValidationError
from .operators import Shape

FLOAT_DIGITS = 12


def parse_points(path) -> np.ndarray:
    """Read a CSV with one point per row; returns the d x n matrix ``S``."""
    rows = []
    width = None
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            cells = [c.strip() for c in line.split(",")]
            try:
                values = [float(c) for c in cells]
            except ValueError:
                raise IngestionError(f"non-numeric cell in {line!r}", lineno) from None
            if not all(math.isfinite(v) for v in values):
                raise IngestionError("non-finite value", lineno)
            if width is None:
                width = len(values)
            elif len(values) != width:
                raise IngestionError(f"expected {width} columns, got {len(values)}", lineno)
            rows.append(values)
    if not rows:
        raise IngestionError(f"{path}: no data points")
    return np.array(rows, dtype=float).T


def parse_labels(path) -> np.ndarray:
    """Read one integer label per line (ground truth for metrics)."""
    labels = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                labels.append(int(line.split(",")[0]))
            except ValueError:
                raise IngestionError(f"invalid label {line!r}", lineno) from None
    return np.array(labels, dtype=int)


def parse_constraints(path, n: int, k: int) -> ConstraintSet:
    """Read ``ML a b`` / ``CL a b`` / ``CARD j u_j`` lines (0-based indices).

    ``#`` starts a comment. CARD lines must cover every cluster or none.
    """
    ml, cl, card = [], [], {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            kind = parts[0].upper()
            if kind not in ("ML", "CL", "CARD"):
                raise IngestionError(f"unknown directive {parts[0]!r}", lineno)
            if len(parts) != 3:
                raise IngestionError(f"{kind} takes two integers", lineno)
            try:
                a, b = int(parts[1]), int(parts[2])
            except ValueError:
                raise IngestionError(f"{kind} takes two integers", lineno) from None
            if kind == "CARD":
                if not 0 <= a < k:
                    raise IngestionError(f"cluster index {a} out of range for k={k}", lineno)
                if a in card:
                    raise IngestionError(f"cluster {a} given twice", lineno)
                card[a] = (b, lineno)
                continue
            for idx in (a, b):
                if not 0 <= idx < n:
                    raise IngestionError(f"point index {idx} out of range for n={n}", lineno)
            if a == b:
                raise IngestionError(f"{kind} links point {a} to itself", lineno)
            (ml if kind == "ML" else cl).append((a, b))
    if card and len(card) != k:
        missing = min(set(range(k)) - set(card))
        last = max(line for _, line in card.values())
        raise IngestionError(f"CARD lines cover {len(card)} of {k} clusters "
                             f"(cluster {missing} missing)", last)
    u = tuple(card[j][0] for j in range(k)) if card else None
    cs = ConstraintSet(cardinalities=u, must_links=ml, cannot_links=cl)
    validate(cs, Shape(n, k))
    return cs


def gen_blobs(k: int, per_cluster: int, d: int, spread: float, separation: float,
              seed: int = 0):
    """Isotropic Gaussian blobs with centres at least ``separation`` apart.

    Returns ``(S, labels)`` with ``S`` the d x (k*per_cluster) point matrix.
    """
    if min(k, per_cluster, d) < 1:
        raise ValidationError("k, per_cluster and d must be >= 1")
    rng = np.random.default_rng(seed)
    box = max(separation, 1.0) * k
    centers = []
    for _ in range(10000):
        if len(centers) == k:
            break
        c = rng.uniform(0.0, box, size=d)
        if all(np.linalg.norm(c - o) >= separation for o in centers):
            centers.append(c)
    else:
        # rejection failed; fall back to points on a line
        centers = [np.eye(d)[0] * separation * j for j in range(k)]
    centers = np.array(centers)
    labels = np.repeat(np.arange(k), per_cluster)
    points = centers[labels] + spread * rng.standard_normal((labels.size, d))
    return points.T, labels


def _round(obj):
    if isinstance(obj, float):
        if not math.isfinite(obj):
            return None
        return float(f"{obj:.{FLOAT_DIGITS}g}")
    if isinstance(obj, dict):
        return {str(key): _round(val) for key, val in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _round(obj.tolist())
    if isinstance(obj, np.generic):
        return _round(obj.item())
    return obj


def serialize_report(report: dict) -> str:
    """Deterministic JSON: sorted keys, floats at 12 significant digits."""
    return json.dumps(_round(report), sort_keys=True, indent=2) + "\n"


def parse_report(text: str) -> dict:
    return json.loads(text)
