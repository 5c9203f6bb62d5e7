"""ADMM solver for K-means with cardinality, must-link and cannot-link constraints.

The binary assignment ``x`` is split into four copies: ``z1`` (box
``[0,1]``), ``z2`` (sphere ``||z - 1/2||^2 = nk/4``), ``z3`` (must-link
bilinear form) and ``z4`` (cannot-link bilinear form). One sweep updates
``x``, ``w``, ``z1..z4`` and then takes a dual ascent step on the nine
multipliers. Penalties are indexed ``rho[0..8]`` for the nine constraint
groups, in the order::

    0 one-hot rows        Psi^T x = 1
    1 box copy            x = z1
    2 sphere copy         x = z2
    3 cardinality         Q P^T x = u
    4 coupling            x = P w * C x
    5 must-link bilinear  z3^T E1^T E2 x = v
    6 must-link copy      x = z3
    7 cannot-link bilin.  z4^T E3^T E4 x = 0
    8 cannot-link copy    x = z4

Constraint families that are absent get penalty zero and their variables
are frozen (``z3 = x`` etc.), which removes them from every update.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Optional

import numpy as np

from . import kernels
from .constraints import (ConstraintSet, cannotlink_quadratic, cardinality_residual,
                          mustlink_quadratic, satisfies, validate)
from .errors import DimensionError, ValidationError
from .kmeans import align_to_sizes, lloyd, to_assignment
from .linalg import cg, rank_one_solve
from .objective import compute_B, coupling_weights, kmeans_objective, objective_value
from .operators import Shape, perm_apply

log = logging.getLogger(__name__)

__all__ = [
    "SolverConfig", "SolverState", "SolveResult", "penalties", "init_state",
    "augmented_lagrangian", "x_operator", "x_rhs", "update_x", "w_operator", "w_rhs",
    "update_w", "update_z1", "update_z2", "update_z3", "update_z4", "update_duals",
    "sweep", "has_converged", "run", "extract_solution", "run_sweep", "best_of",
]


@dataclass(frozen=True)
class SolverConfig:
    rho: float = 0.1
    cg_tol: float = 1e-8
    cg_max_iter: Optional[int] = None  # None -> 10 * n * k
    max_outer_iters: int = 2000
    conv_window: int = 10
    conv_std: float = 1e-5
    ridge_eps: float = 1e-9
    seed: int = 0
    kmeans_iters: int = 300
    normalize: Optional[float] = 0.003  # target mean squared deviation, None = off
    backend: str = "auto"  # "auto", "compiled" or "python"

    def __post_init__(self):
        if not self.rho > 0:
            raise ValidationError(f"rho must be positive, got {self.rho}")
        if not self.cg_tol > 0:
            raise ValidationError(f"cg_tol must be positive, got {self.cg_tol}")
        if self.conv_window < 2:
            raise ValidationError(f"conv_window must be >= 2, got {self.conv_window}")
        if self.max_outer_iters < 1:
            raise ValidationError("max_outer_iters must be >= 1")
        if self.normalize is not None and not self.normalize > 0:
            raise ValidationError(f"normalize must be positive or None, got {self.normalize}")
        if self.backend not in ("auto", "compiled", "python"):
            raise ValidationError(f"unknown backend {self.backend!r}")


@dataclass
class SolverState:
    shape: Shape
    rho: np.ndarray  # length 9, see module docstring
    x: np.ndarray
    w: np.ndarray
    z1: np.ndarray
    z2: np.ndarray
    z3: np.ndarray
    z4: np.ndarray
    y1: np.ndarray
    y2: np.ndarray
    y3: np.ndarray
    y4: np.ndarray
    y5: np.ndarray
    y6: float
    y7: np.ndarray
    y8: float
    y9: np.ndarray
    objective_trace: list = field(default_factory=list)
    iteration: int = 0
    cg_failures: int = 0

    def copy(self) -> "SolverState":
        arrays = {name: getattr(self, name).copy() for name in
                  ("rho", "x", "w", "z1", "z2", "z3", "z4", "y1", "y2", "y3", "y4",
                   "y5", "y7", "y9")}
        return replace(self, objective_trace=list(self.objective_trace), **arrays)


@dataclass
class SolveResult:
    labels: np.ndarray
    x_final: np.ndarray
    objective: float
    converged: bool
    iterations: int
    residuals: dict
    trace: list
    feasible: bool = True
    relaxed_objective: float = math.nan
    seed: Optional[int] = None
    rho: Optional[float] = None
    best_iteration: Optional[int] = None  # iterate returned (differs on non-convergence)

    def to_dict(self) -> dict:
        return {
            "labels": [int(t) for t in self.labels],
            "x_final": [float(t) for t in self.x_final],
            "objective": float(self.objective),
            "relaxed_objective": float(self.relaxed_objective),
            "converged": bool(self.converged),
            "feasible": bool(self.feasible),
            "iterations": int(self.iterations),
            "residuals": {key: float(val) for key, val in self.residuals.items()},
            "trace": [float(t) for t in self.trace],
            "seed": self.seed,
            "rho": self.rho,
            "best_iteration": self.best_iteration,
        }


def penalties(cfg: SolverConfig, cs: ConstraintSet) -> np.ndarray:
    """Uniform penalty ``cfg.rho`` with absent constraint families switched off."""
    rho = np.full(9, float(cfg.rho))
    if cs.cardinalities is None:
        rho[3] = 0.0
    if not cs.must_links:
        rho[5] = rho[6] = 0.0
    if not cs.cannot_links:
        rho[7] = rho[8] = 0.0
    return rho


# -- pairwise helpers ---------------------------------------------------------

def _pairs(pairs) -> np.ndarray:
    return np.asarray(pairs, dtype=np.intc).reshape(-1, 2)


def _gather(pairs, src, dst, vec, shape):
    # returns E_dst^T E_src vec: row pairs[:, dst] accumulates vec's row pairs[:, src]
    V = vec.reshape(shape.n, shape.k)
    out = np.zeros((shape.n, shape.k))
    if len(pairs):
        p = _pairs(pairs)
        np.add.at(out, p[:, dst], V[p[:, src]])
    return out.ravel()


def _bilinear(pairs, left, right, shape):
    # (E_first left)^T (E_second right)
    if not len(pairs):
        return 0.0
    p = _pairs(pairs)
    L = left.reshape(shape.n, shape.k)[p[:, 0]]
    R = right.reshape(shape.n, shape.k)[p[:, 1]]
    return float((L * R).sum())


def _u(cs: ConstraintSet, k: int) -> np.ndarray:
    return cs.u if cs.cardinalities is not None else np.zeros(k)


# -- initialisation -----------------------------------------------------------

def init_state(S, k: int, cs: ConstraintSet, cfg: SolverConfig, x_kmeans) -> SolverState:
    """Warm-start state: ``x = z1..z4 = x_kmeans``, normalised ``w``, zero duals."""
    S = np.asarray(S, dtype=float)
    shape = Shape(S.shape[1], k, S.shape[0])
    x = np.asarray(x_kmeans, dtype=float).copy()
    if x.shape != (shape.nk,):
        raise DimensionError(f"x_kmeans must have length {shape.nk}, got {x.shape}")
    w = coupling_weights(x, shape)
    nk = shape.nk
    state = SolverState(
        shape=shape, rho=penalties(cfg, cs), x=x, w=w,
        z1=x.copy(), z2=x.copy(), z3=x.copy(), z4=x.copy(),
        y1=np.zeros(shape.n), y2=np.zeros(nk), y3=np.zeros(nk), y4=np.zeros(k),
        y5=np.zeros(nk), y6=0.0, y7=np.zeros(nk), y8=0.0, y9=np.zeros(nk),
    )
    state.objective_trace.append(objective_value(S, x, w))
    return state


# -- augmented Lagrangian -----------------------------------------------------

def augmented_lagrangian(state: SolverState, S, cs: ConstraintSet,
                         check_indicators: bool = True, tol: float = 1e-9) -> float:
    """Value of the augmented Lagrangian at ``state``.

    The box and sphere indicator terms are zero when ``z1``/``z2`` are feasible
    within ``tol``; otherwise ``inf`` is returned. Pass
    ``check_indicators=False`` to drop them (they do not depend on x or w).
    """
    sh, r = state.shape, state.rho
    x, w = state.x, state.w
    if check_indicators:
        box = np.all(state.z1 >= -tol) and np.all(state.z1 <= 1 + tol)
        sphere = abs(np.sum((state.z2 - 0.5) ** 2) - sh.nk / 4.0) <= tol
        if not (box and sphere):
            return math.inf
    X = x.reshape(sh.n, sh.k)
    u = _u(cs, sh.k)
    res1 = X.sum(axis=1) - 1.0
    res4 = X.sum(axis=0) - u
    res5 = x - perm_apply(w, sh) * np.tile(X.sum(axis=0), sh.n)
    res6 = _bilinear(cs.must_links, state.z3, x, sh) - cs.v
    res8 = _bilinear(cs.cannot_links, state.z4, x, sh)
    total = objective_value(S, x, w)
    total += state.y1 @ res1 + r[0] / 2 * res1 @ res1
    for y, z, rho in ((state.y2, state.z1, r[1]), (state.y3, state.z2, r[2]),
                      (state.y7, state.z3, r[6]), (state.y9, state.z4, r[8])):
        d = x - z
        total += y @ d + rho / 2 * d @ d
    total += state.y4 @ res4 + r[3] / 2 * res4 @ res4
    total += state.y5 @ res5 + r[4] / 2 * res5 @ res5
    total += state.y6 * res6 + r[5] / 2 * res6 ** 2
    total += state.y8 * res8 + r[7] / 2 * res8 ** 2
    return float(total)


# -- x update -----------------------------------------------------------------

def x_operator(state: SolverState, S, cs: ConstraintSet):
    """Matrix-free left-hand operator of the x-subproblem (a callable)."""
    sh, r = state.shape, state.rho
    n, k = sh.n, sh.k
    pw = perm_apply(state.w, sh).reshape(n, k)
    a3 = _gather(cs.must_links, 0, 1, state.z3, sh)   # E2^T E1 z3
    a4 = _gather(cs.cannot_links, 0, 1, state.z4, sh)  # E4^T E3 z4
    diag = r[1] + r[2] + r[6] + r[8]

    def matvec(v):
        V = v.reshape(n, k)
        out = diag * V
        out += r[0] * V.sum(axis=1, keepdims=True)
        out += r[3] * V.sum(axis=0, keepdims=True)
        if r[4]:
            M = V - pw * V.sum(axis=0, keepdims=True)
            out += r[4] * (M - (pw * M).sum(axis=0, keepdims=True))
        out = out.ravel()
        if r[5]:
            out += r[5] * (a3 @ v) * a3
        if r[7]:
            out += r[7] * (a4 @ v) * a4
        return out

    return matvec


def x_rhs(state: SolverState, S, cs: ConstraintSet) -> np.ndarray:
    """Right-hand side of the x-subproblem, i.e. minus the gradient at x = 0."""
    sh, r = state.shape, state.rho
    n, k = sh.n, sh.k
    b = compute_B(S, state.w).ravel()
    pw = perm_apply(state.w, sh).reshape(n, k)
    a3 = _gather(cs.must_links, 0, 1, state.z3, sh)
    a4 = _gather(cs.cannot_links, 0, 1, state.z4, sh)
    u = _u(cs, k)
    Y5 = state.y5.reshape(n, k)
    g = (b.reshape(n, k)
         + (state.y1 - r[0])[:, None]
         + (state.y4 - r[3] * u)[None, :]
         + Y5 - (pw * Y5).sum(axis=0, keepdims=True)).ravel()
    g += state.y2 - r[1] * state.z1
    g += state.y3 - r[2] * state.z2
    g += state.y7 - r[6] * state.z3
    g += state.y9 - r[8] * state.z4
    g += (state.y6 - r[5] * cs.v) * a3 + state.y8 * a4
    return -g


def _cg_max(state, cfg):
    return cfg.cg_max_iter if cfg.cg_max_iter is not None else 10 * state.shape.nk


def update_x(state: SolverState, S, cs: ConstraintSet, cfg: SolverConfig) -> np.ndarray:
    """Minimise the augmented Lagrangian over x by conjugate gradient."""
    x, ok, _ = cg(x_operator(state, S, cs), x_rhs(state, S, cs), x0=state.x,
                  tol=cfg.cg_tol, maxiter=_cg_max(state, cfg))
    if not ok:
        state.cg_failures += 1
        log.debug("x-update CG did not converge at iteration %d", state.iteration)
    return x


# -- w update -----------------------------------------------------------------

def w_operator(state: SolverState, S, ridge: float = 0.0):
    """Block-diagonal left-hand operator of the w-subproblem (a callable)."""
    sh = state.shape
    n, k = sh.n, sh.k
    S = np.asarray(S, dtype=float)
    mass = state.x.reshape(n, k).sum(axis=0)
    scale = (state.rho[4] * mass ** 2 + ridge)[:, None]

    def matvec(v):
        V = v.reshape(k, n)
        return (2.0 * mass[:, None] * ((V @ S.T) @ S) + scale * V).ravel()

    return matvec


def w_rhs(state: SolverState, S) -> np.ndarray:
    sh = state.shape
    n, k = sh.n, sh.k
    S = np.asarray(S, dtype=float)
    X = state.x.reshape(n, k)
    mass = X.sum(axis=0)
    data = 2.0 * (X.T @ S.T) @ S  # block j: 2 S^T sum_i x_ij s_i
    coupling = mass[:, None] * (state.y5.reshape(n, k).T + state.rho[4] * X.T)
    return (data + coupling).ravel()


def update_w(state: SolverState, S, cfg: SolverConfig) -> np.ndarray:
    """Minimise the augmented Lagrangian over w by conjugate gradient."""
    w, ok, _ = cg(w_operator(state, S, cfg.ridge_eps), w_rhs(state, S), x0=state.w,
                  tol=cfg.cg_tol, maxiter=_cg_max(state, cfg))
    if not ok:
        state.cg_failures += 1
        log.debug("w-update CG did not converge at iteration %d", state.iteration)
    return w


# -- z updates ----------------------------------------------------------------

def update_z1(state: SolverState) -> np.ndarray:
    """Project ``x + y2/rho`` onto the box ``[0, 1]``."""
    return np.clip(state.x + state.y2 / state.rho[1], 0.0, 1.0)


@lru_cache(maxsize=64)
def _sphere_direction(seed: int, size: int) -> np.ndarray:
    d = np.random.default_rng(seed).standard_normal(size)
    d /= np.linalg.norm(d)
    d.flags.writeable = False
    return d


def project_sphere(v, direction=None) -> np.ndarray:
    """Project onto ``{a : ||a - 1/2||^2 = len(a)/4}``.

    At the centre the projection is set-valued; the input is then nudged by
    ``1e-8 * direction`` (a seeded unit vector by default).
    """
    v = np.asarray(v, dtype=float)
    shifted = v - 0.5
    norm = np.linalg.norm(shifted)
    if norm == 0.0:
        if direction is None:
            direction = _sphere_direction(0, v.size)
        shifted = 1e-8 * np.asarray(direction, dtype=float)
        norm = np.linalg.norm(shifted)
    return math.sqrt(v.size) / 2.0 * shifted / norm + 0.5


def update_z2(state: SolverState, direction=None) -> np.ndarray:
    """Project ``x + y3/rho`` onto the sphere through the binary vertices."""
    return project_sphere(state.x + state.y3 / state.rho[2], direction)


def update_z3(state: SolverState, cs: ConstraintSet) -> np.ndarray:
    """Closed-form solve of ``(rho6 a a^T + rho7 I) z3 = rhs``, ``a = E1^T E2 x``."""
    r6, r7 = state.rho[5], state.rho[6]
    a = _gather(cs.must_links, 1, 0, state.x, state.shape)
    rhs = state.y7 + r7 * state.x - state.y6 * a + r6 * cs.v * a
    return rank_one_solve(a, r6, r7, rhs)


def update_z4(state: SolverState, cs: ConstraintSet) -> np.ndarray:
    """Closed-form solve of ``(rho8 b b^T + rho9 I) z4 = rhs``, ``b = E3^T E4 x``."""
    r8, r9 = state.rho[7], state.rho[8]
    b = _gather(cs.cannot_links, 1, 0, state.x, state.shape)
    rhs = state.y9 + r9 * state.x - state.y8 * b
    return rank_one_solve(b, r8, r9, rhs)


# -- dual ascent --------------------------------------------------------------

def update_duals(state: SolverState, cs: ConstraintSet) -> dict:
    """Dual ascent step; returns the new multipliers keyed ``y1`` .. ``y9``."""
    sh, r = state.shape, state.rho
    x = state.x
    X = x.reshape(sh.n, sh.k)
    mass = X.sum(axis=0)
    out = {
        "y1": state.y1 + r[0] * (X.sum(axis=1) - 1.0),
        "y2": state.y2 + r[1] * (x - state.z1),
        "y3": state.y3 + r[2] * (x - state.z2),
        "y4": state.y4 + r[3] * (mass - _u(cs, sh.k)),
        "y5": state.y5 + r[4] * (x - perm_apply(state.w, sh) * np.tile(mass, sh.n)),
        "y6": state.y6 + r[5] * (_bilinear(cs.must_links, state.z3, x, sh) - cs.v),
        "y7": state.y7 + r[6] * (x - state.z3),
        "y8": state.y8 + r[7] * _bilinear(cs.cannot_links, state.z4, x, sh),
        "y9": state.y9 + r[8] * (x - state.z4),
    }
    return out


# -- one sweep ----------------------------------------------------------------

def _python_sweep(state: SolverState, S, cs: ConstraintSet, cfg: SolverConfig,
                  direction) -> float:
    state.x = update_x(state, S, cs, cfg)
    state.w = update_w(state, S, cfg)
    state.z1 = update_z1(state)
    state.z2 = update_z2(state, direction)
    state.z3 = update_z3(state, cs) if state.rho[6] else state.x.copy()
    state.z4 = update_z4(state, cs) if state.rho[8] else state.x.copy()
    for name, value in update_duals(state, cs).items():
        setattr(state, name, value)
    return objective_value(S, state.x, state.w)


def _compiled_sweep(state: SolverState, S, cs: ConstraintSet, cfg: SolverConfig,
                    direction) -> float:
    sh = state.shape
    yscal = np.array([state.y6, state.y8])
    obj, fails = kernels.compiled.sweep(
        np.ascontiguousarray(S, dtype=float), state.x, state.w,
        state.z1, state.z2, state.z3, state.z4,
        state.y1, state.y2, state.y3, state.y4, state.y5, state.y7, state.y9, yscal,
        state.rho, _u(cs, sh.k), _pairs(cs.must_links), _pairs(cs.cannot_links),
        sh.n, sh.k, float(cfg.cg_tol), int(_cg_max(state, cfg)), float(cfg.ridge_eps),
        direction)
    state.y6, state.y8 = float(yscal[0]), float(yscal[1])
    state.cg_failures += int(fails)
    return float(obj)


def _use_compiled(cfg: SolverConfig) -> bool:
    if cfg.backend == "python":
        return False
    if cfg.backend == "compiled" and kernels.compiled is None:
        raise RuntimeError("compiled kernels requested but not built")
    return kernels.compiled is not None


def sweep(state: SolverState, S, cs: ConstraintSet, cfg: SolverConfig) -> float:
    """One ADMM iteration (x, w, z1..z4, duals) in place; returns the new objective."""
    direction = _sphere_direction(cfg.seed, state.shape.nk)
    if _use_compiled(cfg):
        return _compiled_sweep(state, S, cs, cfg, direction)
    return _python_sweep(state, S, cs, cfg, direction)


# -- driver -------------------------------------------------------------------

def has_converged(trace, window: int = 10, tol: float = 1e-5) -> bool:
    """True once the last ``window`` objective values have std ``<= tol``."""
    if len(trace) < window:
        return False
    return float(np.std(trace[-window:])) <= tol


def extract_solution(state: SolverState, S, cs: ConstraintSet,
                     converged: bool = False) -> SolveResult:
    """Round ``x`` to labels (argmax per point, ties to the lowest cluster)."""
    sh = state.shape
    labels = np.argmax(state.x.reshape(sh.n, sh.k), axis=1)
    xr = to_assignment(labels, sh)
    consensus = max(float(np.max(np.abs(state.x - z)))
                    for z in (state.z1, state.z2, state.z3, state.z4))
    card = (float(np.max(np.abs(cardinality_residual(xr, cs, sh))))
            if cs.cardinalities is not None else 0.0)
    residuals = {
        "onehot": float(np.max(np.abs(state.x - xr))),
        "cardinality": card,
        "mustlink_gap": cs.v - mustlink_quadratic(xr, cs, sh),
        "cannotlink_value": cannotlink_quadratic(xr, cs, sh),
        "consensus": consensus,
        "mustlink_bilinear": _bilinear(cs.must_links, state.z3, state.x, sh) - cs.v,
        "cannotlink_bilinear": _bilinear(cs.cannot_links, state.z4, state.x, sh),
    }
    return SolveResult(
        labels=labels, x_final=state.x.copy(),
        objective=kmeans_objective(S, labels, sh.k), converged=converged,
        iterations=state.iteration, residuals=residuals,
        trace=list(state.objective_trace), feasible=satisfies(labels, cs, sh.k),
        relaxed_objective=state.objective_trace[-1],
    )


def normalise(S, target: Optional[float]):
    """Centre ``S`` and rescale it to mean squared deviation ``target``.

    Returns ``(S_work, factor)`` with objectives of ``S`` equal to
    ``factor`` times those of ``S_work``. Labels are unaffected.
    """
    S = np.asarray(S, dtype=float)
    if target is None:
        return S, 1.0
    centred = S - S.mean(axis=1, keepdims=True)
    spread = float((centred ** 2).sum(axis=0).mean())
    if spread == 0.0:
        return centred, 1.0
    factor = spread / target
    return centred / math.sqrt(factor), factor


def run(S, k: int, cs: ConstraintSet, cfg: SolverConfig = SolverConfig(),
        x_init=None, state_out: Optional[list] = None) -> SolveResult:
    """Solve one instance from a K-means warm start (or ``x_init``).

    The data are first centred and rescaled (``cfg.normalize``) so that the
    penalty ``cfg.rho`` is measured against a fixed data scale. The trace,
    and so the stopping rule, stays in the units of the caller's ``S``.
    Iterates until the trace settles or
    ``cfg.max_outer_iters`` sweeps have run. A converged run returns its
    final state. Otherwise the best iterate is returned with
    ``converged=False``: the sweep whose rounded labelling is feasible
    with the lowest objective, or the final state if none was feasible.
    The warm start itself is not eligible.
    """
    S_orig = np.asarray(S, dtype=float)
    shape = Shape(S_orig.shape[1], k, S_orig.shape[0])
    validate(cs, shape)
    S, scale = normalise(S_orig, cfg.normalize)
    if x_init is None:
        labels = lloyd(S_orig, k, seed=cfg.seed, max_iters=cfg.kmeans_iters).labels
        if cs.cardinalities is not None:
            labels = align_to_sizes(labels, cs.cardinalities)
        x_init = to_assignment(labels, shape)
    state = init_state(S, k, cs, cfg, x_init)
    state.objective_trace[0] *= scale
    converged = False
    best, best_key = None, None
    while state.iteration < cfg.max_outer_iters:
        obj = sweep(state, S, cs, cfg) * scale
        state.iteration += 1
        if not np.isfinite(obj):
            log.warning("objective became non-finite at iteration %d", state.iteration)
            break
        state.objective_trace.append(obj)
        if has_converged(state.objective_trace, cfg.conv_window, cfg.conv_std):
            converged = True
            break
        labels = np.argmax(state.x.reshape(shape.n, k), axis=1)
        if satisfies(labels, cs, k):
            key = kmeans_objective(S, labels, k)
            if best_key is None or key < best_key:
                best, best_key = state.copy(), key
    final = state
    if not converged and best is not None:
        best.cg_failures = state.cg_failures
        state = best
    if state.cg_failures:
        log.info("%d CG solves stopped before reaching tolerance", state.cg_failures)
    if state_out is not None:
        state_out.append(state)
    result = extract_solution(state, S, cs, converged)
    result.best_iteration = state.iteration
    result.iterations = final.iteration
    result.trace = list(final.objective_trace)
    result.objective = kmeans_objective(S_orig, result.labels, k)
    result.seed, result.rho = cfg.seed, cfg.rho
    return result


def best_of(results) -> SolveResult:
    """Pick the feasible result with the lowest objective.

    Ties go to converged runs first, then to the lowest seed and rho.
    """
    return min(results, key=lambda r: (not r.feasible, r.objective, not r.converged,
                                       r.seed, r.rho))


def run_sweep(S, k: int, cs: ConstraintSet, seeds, rhos, cfg: SolverConfig = SolverConfig(),
              workers: int = 1) -> list:
    """Run every (seed, rho) combination; results sorted by seed then rho."""
    jobs = [replace(cfg, seed=int(s), rho=float(r)) for s in sorted(seeds) for r in sorted(rhos)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda c: run(S, k, cs, c), jobs))
    return [run(S, k, cs, c) for c in jobs]
