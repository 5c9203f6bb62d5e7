"""Cardinality, must-link and cannot-link constraints.

Pairs are stored unordered (smaller index first), sorted and de-duplicated,
so ``v`` and ``e`` always count distinct constraints.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ValidationError
from .operators import Shape, SelectionOperator, perm_t_apply, q_apply, selection_apply


def _normalise_pairs(pairs):
    out = set()
    for p in pairs:
        a, b = (int(t) for t in p)
        out.add((min(a, b), max(a, b)))
    return tuple(sorted(out))


@dataclass(frozen=True)
class ConstraintSet:
    cardinalities: Optional[tuple] = None
    must_links: tuple = ()
    cannot_links: tuple = ()

    def __post_init__(self):
        if self.cardinalities is not None:
            object.__setattr__(self, "cardinalities", tuple(int(c) for c in self.cardinalities))
        object.__setattr__(self, "must_links", _normalise_pairs(self.must_links))
        object.__setattr__(self, "cannot_links", _normalise_pairs(self.cannot_links))

    @property
    def v(self) -> int:
        return len(self.must_links)

    @property
    def e(self) -> int:
        return len(self.cannot_links)

    @property
    def u(self) -> Optional[np.ndarray]:
        if self.cardinalities is None:
            return None
        return np.asarray(self.cardinalities, dtype=float)

    def selectors(self):
        """Return ``(E1, E2, E3, E4)`` as :class:`SelectionOperator` objects."""
        return (SelectionOperator(self.must_links, 0), SelectionOperator(self.must_links, 1),
                SelectionOperator(self.cannot_links, 0), SelectionOperator(self.cannot_links, 1))

    def is_empty(self) -> bool:
        return self.cardinalities is None and not self.must_links and not self.cannot_links


@dataclass
class ValidationReport:
    warnings: list = field(default_factory=list)
    components: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.warnings


def mustlink_components(n: int, pairs) -> list:
    """Connected components (size >= 2) of the must-link graph, via union-find."""
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for a, b in pairs:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    groups = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return [g for g in groups.values() if len(g) > 1]


def validate(cs: ConstraintSet, shape: Shape) -> ValidationReport:
    """Check ``cs`` against ``shape``.

    Hard violations raise ValidationError naming the offending entry.
    Infeasibilities that only show up through must-link transitivity are
    returned as warnings.
    """
    n, k = shape.n, shape.k
    if cs.cardinalities is not None:
        u = cs.cardinalities
        if len(u) != k:
            raise ValidationError(f"expected {k} cardinalities, got {len(u)}")
        for j, uj in enumerate(u):
            if uj < 0:
                raise ValidationError(f"cardinality of cluster {j} is negative ({uj})")
        if sum(u) != n:
            raise ValidationError(f"cardinalities sum {sum(u)} ≠ n={n}")
    for kind, pairs in (("must-link", cs.must_links), ("cannot-link", cs.cannot_links)):
        for a, b in pairs:
            if a < 0 or b >= n:
                raise ValidationError(f"{kind} ({a}, {b}) has an index outside [0, {n})")
            if a == b:
                raise ValidationError(f"{kind} ({a}, {b}) links a point to itself")
    both = set(cs.must_links) & set(cs.cannot_links)
    if both:
        a, b = sorted(both)[0]
        raise ValidationError(f"pair ({a}, {b}) is both must-link and cannot-link")

    report = ValidationReport()
    report.components = mustlink_components(n, cs.must_links)
    where = {}
    for c, comp in enumerate(report.components):
        for i in comp:
            where[i] = c
    for a, b in cs.cannot_links:
        if a in where and where.get(a) == where.get(b):
            report.warnings.append(
                f"cannot-link ({a}, {b}) joins points forced together by must-link closure")
    if cs.cardinalities is not None and report.components:
        biggest = max(len(c) for c in report.components)
        if biggest > max(cs.cardinalities):
            report.warnings.append(
                f"must-link component of size {biggest} exceeds largest cardinality "
                f"{max(cs.cardinalities)}")
    return report


def mustlink_quadratic(x, cs: ConstraintSet, shape: Shape) -> float:
    """``x^T E1^T E2 x``: number of satisfied must-links for one-hot ``x``."""
    if not cs.must_links:
        return 0.0
    e1, e2, _, _ = cs.selectors()
    return float(selection_apply(e1, x, shape) @ selection_apply(e2, x, shape))


def cannotlink_quadratic(x, cs: ConstraintSet, shape: Shape) -> float:
    """``x^T E3^T E4 x``: number of violated cannot-links for one-hot ``x``."""
    if not cs.cannot_links:
        return 0.0
    _, _, e3, e4 = cs.selectors()
    return float(selection_apply(e3, x, shape) @ selection_apply(e4, x, shape))


def cardinality_residual(x, cs: ConstraintSet, shape: Shape) -> np.ndarray:
    """Cluster sizes minus their targets, ``Q P^T x - u``."""
    if cs.cardinalities is None:
        raise ValidationError("constraint set has no cardinalities")
    return q_apply(perm_t_apply(x, shape), shape) - cs.u


def satisfies(labels, cs: ConstraintSet, k: int) -> bool:
    """True when a hard labelling meets every constraint in ``cs``."""
    labels = np.asarray(labels)
    if cs.cardinalities is not None:
        if not np.array_equal(np.bincount(labels, minlength=k), cs.cardinalities):
            return False
    if any(labels[a] != labels[b] for a, b in cs.must_links):
        return False
    return not any(labels[a] == labels[b] for a, b in cs.cannot_links)
