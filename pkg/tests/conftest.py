"""Shared helpers: dense reference matrices and random instance generators."""

import numpy as np
import pytest

from ckmeans.constraints import (ConstraintSet, cannotlink_quadratic, mustlink_quadratic,
                                 validate)
from ckmeans.errors import ValidationError
from ckmeans.kmeans import to_assignment
from ckmeans.operators import Shape, selection_apply
from ckmeans.oracle import brute_force_solve


# -- dense counterparts of the matrix-free operators ---------------------------

def dense_psi_t(sh):
    M = np.zeros((sh.n, sh.nk))
    for i in range(sh.n):
        M[i, i * sh.k:(i + 1) * sh.k] = 1
    return M


def dense_perm(sh):
    # maps cluster-major (j*n + p) to point-major (p*k + j)
    M = np.zeros((sh.nk, sh.nk))
    for p in range(sh.n):
        for j in range(sh.k):
            M[p * sh.k + j, j * sh.n + p] = 1
    return M


def dense_c(sh):
    M = np.zeros((sh.nk, sh.nk))
    for i in range(sh.n):
        for l in range(sh.n):
            for j in range(sh.k):
                M[i * sh.k + j, l * sh.k + j] = 1
    return M


def dense_q(sh):
    M = np.zeros((sh.k, sh.nk))
    for j in range(sh.k):
        M[j, j * sh.n:(j + 1) * sh.n] = 1
    return M


def dense_lambda(sh, j):
    M = np.zeros((sh.n, sh.nk))
    M[:, j * sh.n:(j + 1) * sh.n] = np.eye(sh.n)
    return M


def dense_selection(pairs, side, sh):
    M = np.zeros((len(pairs) * sh.k, sh.nk))
    for c, pair in enumerate(pairs):
        a = pair[side]
        for j in range(sh.k):
            M[c * sh.k + j, a * sh.k + j] = 1
    return M


# -- random instances ---------------------------------------------------------

def random_pairs(rng, n, count):
    out = []
    for _ in range(count):
        a, b = rng.choice(n, 2, replace=False)
        out.append((int(a), int(b)))
    return out


def random_composition(rng, n, k):
    """Uniformly random positive integer vector of length k summing to n."""
    cuts = np.sort(rng.choice(np.arange(1, n), k - 1, replace=False))
    return tuple(int(t) for t in np.diff(np.r_[0, cuts, n]))


def make_instance(rng, kind="joint"):
    """Standard-normal points with random constraints; resampled until feasible.

    ``kind`` is ``"joint"`` (u, ML and CL), ``"card"`` (u only) or ``"pair"``
    (ML and CL only). Returns ``(S, k, cs, oracle_result)``.
    """
    while True:
        n = int(rng.integers(6, 10))
        k = int(rng.integers(2, 4))
        d = int(rng.integers(1, 3))
        S = rng.normal(size=(d, n))
        u, ml, cl = None, [], []
        if kind in ("joint", "card"):
            u = random_composition(rng, n, k)
        if kind in ("joint", "pair"):
            ml = random_pairs(rng, n, int(rng.integers(1, 4)))
            cl = random_pairs(rng, n, int(rng.integers(1, 4)))
        try:
            cs = ConstraintSet(u, ml, cl)
            validate(cs, Shape(n, k, d))
        except ValidationError:
            continue
        oracle = brute_force_solve(S, k, cs)
        if oracle.feasible_count:
            return S, k, cs, oracle


def random_state(rng, n, k, d=2, n_ml=2, n_cl=2, rho=None):
    """A solver state with every variable random (not necessarily feasible)."""
    from ckmeans.admm import SolverState

    sh = Shape(n, k, d)
    S = rng.normal(size=(d, n))
    cs = ConstraintSet(None if rng.random() < 0.3 else random_composition(rng, n, k),
                       random_pairs(rng, n, n_ml), random_pairs(rng, n, n_cl))
    cs = ConstraintSet(cs.cardinalities, cs.must_links,
                       [p for p in cs.cannot_links if p not in cs.must_links])
    nk = sh.nk
    r = rng.uniform(0.2, 2.0, size=9) if rho is None else np.full(9, rho)
    if cs.cardinalities is None:
        r[3] = 0.0
    if not cs.must_links:
        r[5] = r[6] = 0.0
    if not cs.cannot_links:
        r[7] = r[8] = 0.0
    vec = lambda size: rng.normal(size=size)  # noqa: E731
    state = SolverState(
        shape=sh, rho=r, x=rng.random(nk), w=rng.random(nk) / n,
        z1=rng.random(nk), z2=rng.random(nk), z3=rng.random(nk), z4=rng.random(nk),
        y1=vec(n), y2=vec(nk), y3=vec(nk), y4=vec(k), y5=vec(nk), y6=float(vec(1)[0]),
        y7=vec(nk), y8=float(vec(1)[0]), y9=vec(nk))
    return S, cs, state


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def four_points():
    return np.array([[0.0, 0.1, 10.0, 10.1]])


# -- dense augmented Lagrangian and finite differences -------------------------

def dense_lagrangian(state, S, cs):
    """Second, matrix-based evaluation of the augmented Lagrangian (no indicators)."""
    sh, r = state.shape, state.rho
    n, k = sh.n, sh.k
    x, w = state.x, state.w
    P = dense_perm(sh)
    E1, E2 = dense_selection(cs.must_links, 0, sh), dense_selection(cs.must_links, 1, sh)
    E3, E4 = dense_selection(cs.cannot_links, 0, sh), dense_selection(cs.cannot_links, 1, sh)
    u = np.zeros(k) if cs.cardinalities is None else np.array(cs.cardinalities, float)
    b = np.zeros(sh.nk)
    for i in range(n):
        for j in range(k):
            c = S @ (dense_lambda(sh, j) @ w)
            b[i * k + j] = np.sum((S[:, i] - c) ** 2)
    res1 = dense_psi_t(sh) @ x - 1
    res4 = dense_q(sh) @ P.T @ x - u
    res5 = x - np.diag(P @ w) @ dense_c(sh) @ x
    res6 = state.z3 @ E1.T @ E2 @ x - cs.v
    res8 = state.z4 @ E3.T @ E4 @ x
    total = b @ x
    total += state.y1 @ res1 + r[0] / 2 * res1 @ res1
    total += state.y2 @ (x - state.z1) + r[1] / 2 * np.sum((x - state.z1) ** 2)
    total += state.y3 @ (x - state.z2) + r[2] / 2 * np.sum((x - state.z2) ** 2)
    total += state.y4 @ res4 + r[3] / 2 * res4 @ res4
    total += state.y5 @ res5 + r[4] / 2 * res5 @ res5
    total += state.y6 * res6 + r[5] / 2 * res6 ** 2
    total += state.y7 @ (x - state.z3) + r[6] / 2 * np.sum((x - state.z3) ** 2)
    total += state.y8 * res8 + r[7] / 2 * res8 ** 2
    total += state.y9 @ (x - state.z4) + r[8] / 2 * np.sum((x - state.z4) ** 2)
    return float(total)


def fd_gradient(f, x, h=0.5):
    # exact for quadratics up to rounding, so a large step is fine
    g = np.zeros_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2 * h)
    return g


def fd_hessian_vector(f, x, v, h=0.5):
    return (fd_gradient(f, x + h * v) - fd_gradient(f, x - h * v)) / (2 * h)


def rel_err(a, b):
    scale = max(np.linalg.norm(b), 1e-300)
    return float(np.linalg.norm(np.asarray(a) - np.asarray(b)) / scale)


def finite_difference_errors(rng, n, k):
    """Relative errors of the x/w operators and right-hand sides on one random state.

    Returns ``(x_rhs, x_op, w_rhs, w_op)``. Each compares a matrix-free
    quantity with finite differences of the augmented Lagrangian.
    """
    from ckmeans.admm import augmented_lagrangian, w_operator, w_rhs, x_operator, x_rhs

    S, cs, state = random_state(rng, n, k, n_ml=int(rng.integers(0, 3)),
                                n_cl=int(rng.integers(0, 3)))

    def lx(x):
        s = state.copy()
        s.x = x
        return augmented_lagrangian(s, S, cs, check_indicators=False)

    def lw(w):
        s = state.copy()
        s.w = w
        return augmented_lagrangian(s, S, cs, check_indicators=False)

    nk = n * k
    v = rng.normal(size=nk)
    errs = (
        rel_err(x_rhs(state, S, cs), -fd_gradient(lx, np.zeros(nk))),
        rel_err(x_operator(state, S, cs)(v), fd_hessian_vector(lx, state.x, v)),
        rel_err(w_rhs(state, S), -fd_gradient(lw, np.zeros(nk))),
        rel_err(w_operator(state, S)(v), fd_hessian_vector(lw, state.w, v)),
    )
    return errs


def dense_from_matvec(matvec, size):
    return np.column_stack([matvec(e) for e in np.eye(size)])


# -- pair-count identities ---------------------------------------------------

def _pair_identity_lhs(x, cs, sh):
    e1, e2, e3, e4 = cs.selectors()
    d = selection_apply(e1, x, sh) - selection_apply(e2, x, sh)
    s = selection_apply(e3, x, sh) + selection_apply(e4, x, sh)
    return d @ d, s @ s


def check_pair_identities(labels, cs, sh):
    """Must-link and cannot-link count identities, in exact integer arithmetic."""
    x = to_assignment(labels, sh).astype(np.int64)
    ml_norm, cl_norm = _pair_identity_lhs(x, cs, sh)
    ml_q = int(mustlink_quadratic(x, cs, sh))
    cl_q = int(cannotlink_quadratic(x, cs, sh))
    ok = (int(ml_norm) == 2 * cs.v - 2 * ml_q and int(cl_norm) == 2 * cs.e + 2 * cl_q)
    ml_sat = all(labels[a] == labels[b] for a, b in cs.must_links)
    cl_sat = all(labels[a] != labels[b] for a, b in cs.cannot_links)
    ok &= (ml_q == cs.v) == ml_sat and (cl_q == 0) == cl_sat
    return ok


# -- acceptance report ----------------------------------------------------------

ACCEPTANCE_LINES = {}


def record_criterion(number, passed, detail):
    """Store (and print) the one-line verdict of an acceptance criterion."""
    line = f"criterion {number}: {'PASS' if passed else 'FAIL'} - {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[number])
