# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels: one full ADMM sweep, and exhaustive assignment search.

Both mirror the numpy code in ``admm.py`` / ``oracle.py`` operation for
operation; array layouts are the same (point-major x, cluster-major w,
S stored d x n row-major). The GIL is released while they run.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs, INFINITY
from libc.stdlib cimport malloc, free
from libc.string cimport memcpy

cnp.import_array()

ctypedef void (*matvec_t)(void *ctx, const double *v, double *out) noexcept nogil


cdef struct XSys:
    int n
    int k
    const double *rho
    const double *pw
    const double *a3
    const double *a4
    double *colsum
    double *colsum2
    double *tmp


cdef struct WSys:
    int n
    int k
    int d
    const double *S
    const double *mass
    double rho5
    double ridge
    double *tmp_d


cdef double _dot(const double *a, const double *b, int N) noexcept nogil:
    cdef double s = 0.0
    cdef int i
    for i in range(N):
        s += a[i] * b[i]
    return s


cdef void x_matvec(void *ctx, const double *v, double *out) noexcept nogil:
    cdef XSys *s = <XSys *> ctx
    cdef int n = s.n, k = s.k, i, j, idx
    cdef const double *r = s.rho
    cdef double diag = r[1] + r[2] + r[6] + r[8]
    cdef double t
    for idx in range(n * k):
        out[idx] = diag * v[idx]
    if r[0] != 0.0:
        for i in range(n):
            t = 0.0
            for j in range(k):
                t += v[i * k + j]
            for j in range(k):
                out[i * k + j] += r[0] * t
    if r[3] != 0.0 or r[4] != 0.0:
        for j in range(k):
            s.colsum[j] = 0.0
        for i in range(n):
            for j in range(k):
                s.colsum[j] += v[i * k + j]
    if r[3] != 0.0:
        for i in range(n):
            for j in range(k):
                out[i * k + j] += r[3] * s.colsum[j]
    if r[4] != 0.0:
        for j in range(k):
            s.colsum2[j] = 0.0
        for i in range(n):
            for j in range(k):
                idx = i * k + j
                s.tmp[idx] = v[idx] - s.pw[idx] * s.colsum[j]
                s.colsum2[j] += s.pw[idx] * s.tmp[idx]
        for i in range(n):
            for j in range(k):
                idx = i * k + j
                out[idx] += r[4] * (s.tmp[idx] - s.colsum2[j])
    if r[5] != 0.0:
        t = r[5] * _dot(s.a3, v, n * k)
        for idx in range(n * k):
            out[idx] += t * s.a3[idx]
    if r[7] != 0.0:
        t = r[7] * _dot(s.a4, v, n * k)
        for idx in range(n * k):
            out[idx] += t * s.a4[idx]


cdef void w_matvec(void *ctx, const double *v, double *out) noexcept nogil:
    cdef WSys *s = <WSys *> ctx
    cdef int n = s.n, k = s.k, d = s.d, j, p, t
    cdef double acc, scale
    for j in range(k):
        for t in range(d):
            acc = 0.0
            for p in range(n):
                acc += s.S[t * n + p] * v[j * n + p]
            s.tmp_d[t] = acc
        scale = s.rho5 * s.mass[j] * s.mass[j] + s.ridge
        for p in range(n):
            acc = 0.0
            for t in range(d):
                acc += s.S[t * n + p] * s.tmp_d[t]
            out[j * n + p] = 2.0 * s.mass[j] * acc + scale * v[j * n + p]


cdef int cg(matvec_t matvec, void *ctx, const double *b, double *x, int N,
            double tol, int maxiter, double *r, double *p, double *Ap) noexcept nogil:
    """Conjugate gradient, warm-started from ``x``. Returns 1 on convergence."""
    cdef double bnorm2 = _dot(b, b, N), rs, rs_new, pAp, alpha, beta, thresh
    cdef int i, it
    if bnorm2 == 0.0:
        for i in range(N):
            x[i] = 0.0
        return 1
    thresh = tol * tol * bnorm2
    matvec(ctx, x, Ap)
    for i in range(N):
        r[i] = b[i] - Ap[i]
        p[i] = r[i]
    rs = _dot(r, r, N)
    if rs <= thresh:
        return 1
    for it in range(maxiter):
        matvec(ctx, p, Ap)
        pAp = _dot(p, Ap, N)
        if pAp <= 0.0:
            return 0
        alpha = rs / pAp
        for i in range(N):
            x[i] += alpha * p[i]
            r[i] -= alpha * Ap[i]
        rs_new = _dot(r, r, N)
        if rs_new <= thresh:
            return 1
        beta = rs_new / rs
        for i in range(N):
            p[i] = r[i] + beta * p[i]
        rs = rs_new
    return 0


cdef void distances(const double *S, const double *w, int n, int k, int d,
                    double *cent, double *b) noexcept nogil:
    # cent: k x d centroids; b: point-major squared distances
    cdef int i, j, t, p
    cdef double acc, diff
    for j in range(k):
        for t in range(d):
            acc = 0.0
            for p in range(n):
                acc += w[j * n + p] * S[t * n + p]
            cent[j * d + t] = acc
    for i in range(n):
        for j in range(k):
            acc = 0.0
            for t in range(d):
                diff = S[t * n + i] - cent[j * d + t]
                acc += diff * diff
            b[i * k + j] = acc


cdef void gather(const int *pairs, int m, int src, int dst, const double *vec,
                 int k, double *out, int nk) noexcept nogil:
    # out = E_dst^T E_src vec
    cdef int c, j, a, b
    for j in range(nk):
        out[j] = 0.0
    for c in range(m):
        a = pairs[2 * c + src]
        b = pairs[2 * c + dst]
        for j in range(k):
            out[b * k + j] += vec[a * k + j]


cdef double bilinear(const int *pairs, int m, const double *left, const double *right,
                     int k) noexcept nogil:
    cdef double s = 0.0
    cdef int c, j
    for c in range(m):
        for j in range(k):
            s += left[pairs[2 * c] * k + j] * right[pairs[2 * c + 1] * k + j]
    return s


cdef void rank_one(const double *a, double alpha, double beta, const double *rhs,
                   double *z, int N) noexcept nogil:
    cdef double ar = _dot(a, rhs, N), aa = _dot(a, a, N)
    cdef double coef = alpha * ar / (beta * (beta + alpha * aa))
    cdef int i
    for i in range(N):
        z[i] = rhs[i] / beta - coef * a[i]


def sweep(const double[:, ::1] S, double[::1] x, double[::1] w,
          double[::1] z1, double[::1] z2, double[::1] z3, double[::1] z4,
          double[::1] y1, double[::1] y2, double[::1] y3, double[::1] y4,
          double[::1] y5, double[::1] y7, double[::1] y9, double[::1] yscal,
          const double[::1] rho, const double[::1] u,
          const int[:, ::1] ml, const int[:, ::1] cl,
          int n, int k, double cg_tol, int cg_max_iter, double ridge,
          const double[::1] direction):
    """One ADMM sweep, updating every state array in place.

    ``yscal`` holds the two scalar multipliers ``(y6, y8)``. Returns
    ``(objective, cg_failures)`` where objective is ``sum x_ij B_ij(w)``.
    """
    cdef int nk = n * k, d = S.shape[0]
    cdef int nml = ml.shape[0], ncl = cl.shape[0]
    if x.shape[0] != nk or w.shape[0] != nk or S.shape[1] != n:
        raise ValueError("inconsistent dimensions")
    cdef double[::1] work = np.zeros(12 * nk + 4 * k + 2 * d + k * d + 8)
    cdef double *base = &work[0]
    cdef double *pw = base
    cdef double *a3 = base + nk
    cdef double *a4 = base + 2 * nk
    cdef double *bvec = base + 3 * nk
    cdef double *rhs = base + 4 * nk
    cdef double *r = base + 5 * nk
    cdef double *p = base + 6 * nk
    cdef double *Ap = base + 7 * nk
    cdef double *tmp = base + 8 * nk
    cdef double *av = base + 9 * nk
    cdef double *mass = base + 10 * nk
    cdef double *colsum = mass + k
    cdef double *colsum2 = colsum + k
    cdef double *rowtmp = colsum2 + k
    cdef double *tmp_d = rowtmp + k
    cdef double *cent = tmp_d + d
    cdef const int *mlp = &ml[0, 0] if nml > 0 else NULL
    cdef const int *clp = &cl[0, 0] if ncl > 0 else NULL
    cdef const double *rh = &rho[0]
    cdef double *X = &x[0]
    cdef double *W = &w[0]
    cdef double y6 = yscal[0], y8 = yscal[1]
    cdef double v = nml
    cdef int i, j, t, idx, fails = 0
    cdef double acc, nrm, rad, obj
    cdef XSys xs
    cdef WSys ws

    with nogil:
        # ---- x update
        for i in range(n):
            for j in range(k):
                pw[i * k + j] = W[j * n + i]
        if rh[5] != 0.0:
            gather(mlp, nml, 0, 1, &z3[0], k, a3, nk)
        if rh[7] != 0.0:
            gather(clp, ncl, 0, 1, &z4[0], k, a4, nk)
        distances(&S[0, 0], W, n, k, d, cent, bvec)
        for j in range(k):
            colsum[j] = 0.0
        for i in range(n):
            for j in range(k):
                colsum[j] += pw[i * k + j] * y5[i * k + j]
        for i in range(n):
            for j in range(k):
                idx = i * k + j
                acc = (bvec[idx] + (y1[i] - rh[0]) + (y4[j] - rh[3] * u[j])
                       + y5[idx] - colsum[j])
                acc += y2[idx] - rh[1] * z1[idx]
                acc += y3[idx] - rh[2] * z2[idx]
                acc += y7[idx] - rh[6] * z3[idx]
                acc += y9[idx] - rh[8] * z4[idx]
                if rh[5] != 0.0:
                    acc += (y6 - rh[5] * v) * a3[idx]
                if rh[7] != 0.0:
                    acc += y8 * a4[idx]
                rhs[idx] = -acc
        xs.n = n
        xs.k = k
        xs.rho = rh
        xs.pw = pw
        xs.a3 = a3
        xs.a4 = a4
        xs.colsum = colsum
        xs.colsum2 = colsum2
        xs.tmp = tmp
        if not cg(x_matvec, &xs, rhs, X, nk, cg_tol, cg_max_iter, r, p, Ap):
            fails += 1

        # ---- w update
        for j in range(k):
            mass[j] = 0.0
        for i in range(n):
            for j in range(k):
                mass[j] += X[i * k + j]
        for j in range(k):
            for t in range(d):
                acc = 0.0
                for i in range(n):
                    acc += X[i * k + j] * S[t, i]
                tmp_d[t] = acc
            for i in range(n):
                acc = 0.0
                for t in range(d):
                    acc += S[t, i] * tmp_d[t]
                rhs[j * n + i] = 2.0 * acc + mass[j] * (y5[i * k + j] + rh[4] * X[i * k + j])
        ws.n = n
        ws.k = k
        ws.d = d
        ws.S = &S[0, 0]
        ws.mass = mass
        ws.rho5 = rh[4]
        ws.ridge = ridge
        ws.tmp_d = tmp_d
        if not cg(w_matvec, &ws, rhs, W, nk, cg_tol, cg_max_iter, r, p, Ap):
            fails += 1

        # ---- z1: box, z2: sphere
        for idx in range(nk):
            acc = X[idx] + y2[idx] / rh[1]
            z1[idx] = 0.0 if acc < 0.0 else (1.0 if acc > 1.0 else acc)
        nrm = 0.0
        for idx in range(nk):
            tmp[idx] = X[idx] + y3[idx] / rh[2] - 0.5
            nrm += tmp[idx] * tmp[idx]
        nrm = sqrt(nrm)
        if nrm == 0.0:
            for idx in range(nk):
                tmp[idx] = 1e-8 * direction[idx]
            nrm = sqrt(_dot(tmp, tmp, nk))
        rad = sqrt(<double> nk) / 2.0
        for idx in range(nk):
            z2[idx] = rad * tmp[idx] / nrm + 0.5

        # ---- z3, z4: rank-one systems
        if rh[6] != 0.0:
            gather(mlp, nml, 1, 0, X, k, av, nk)
            for idx in range(nk):
                tmp[idx] = y7[idx] + rh[6] * X[idx] - y6 * av[idx] + rh[5] * v * av[idx]
            rank_one(av, rh[5], rh[6], tmp, &z3[0], nk)
        else:
            memcpy(&z3[0], X, nk * sizeof(double))
        if rh[8] != 0.0:
            gather(clp, ncl, 1, 0, X, k, av, nk)
            for idx in range(nk):
                tmp[idx] = y9[idx] + rh[8] * X[idx] - y8 * av[idx]
            rank_one(av, rh[7], rh[8], tmp, &z4[0], nk)
        else:
            memcpy(&z4[0], X, nk * sizeof(double))

        # ---- dual ascent
        for j in range(k):
            mass[j] = 0.0
        for i in range(n):
            acc = 0.0
            for j in range(k):
                acc += X[i * k + j]
                mass[j] += X[i * k + j]
            y1[i] += rh[0] * (acc - 1.0)
        for j in range(k):
            y4[j] += rh[3] * (mass[j] - u[j])
        for i in range(n):
            for j in range(k):
                idx = i * k + j
                y2[idx] += rh[1] * (X[idx] - z1[idx])
                y3[idx] += rh[2] * (X[idx] - z2[idx])
                y5[idx] += rh[4] * (X[idx] - W[j * n + i] * mass[j])
                y7[idx] += rh[6] * (X[idx] - z3[idx])
                y9[idx] += rh[8] * (X[idx] - z4[idx])
        y6 += rh[5] * (bilinear(mlp, nml, &z3[0], X, k) - v)
        y8 += rh[7] * bilinear(clp, ncl, &z4[0], X, k)

        # ---- objective at the new (x, w)
        distances(&S[0, 0], W, n, k, d, cent, bvec)
        obj = _dot(X, bvec, nk)

    yscal[0] = y6
    yscal[1] = y8
    return obj, fails


cdef double labelled_sse(const double *S, const int *lab, int n, int k, int d,
                         double *sums, int *counts) noexcept nogil:
    cdef int i, j, t
    cdef double total = 0.0, diff
    for j in range(k):
        counts[j] = 0
        for t in range(d):
            sums[j * d + t] = 0.0
    for i in range(n):
        counts[lab[i]] += 1
        for t in range(d):
            sums[lab[i] * d + t] += S[t * n + i]
    for j in range(k):
        if counts[j]:
            for t in range(d):
                sums[j * d + t] /= counts[j]
    for i in range(n):
        for t in range(d):
            diff = S[t * n + i] - sums[lab[i] * d + t]
            total += diff * diff
    return total


cdef int feasible(const int *lab, int n, int k, const int *u, int has_u,
                  const int *ml, int nml, const int *cl, int ncl, int *counts) noexcept nogil:
    cdef int c, j
    for c in range(nml):
        if lab[ml[2 * c]] != lab[ml[2 * c + 1]]:
            return 0
    for c in range(ncl):
        if lab[cl[2 * c]] == lab[cl[2 * c + 1]]:
            return 0
    if has_u:
        for j in range(k):
            counts[j] = 0
        for c in range(n):
            counts[lab[c]] += 1
        for j in range(k):
            if counts[j] != u[j]:
                return 0
    return 1


cdef int advance(int *lab, int n, int k) noexcept nogil:
    # lexicographic odometer, last position fastest; 0 when wrapped around
    cdef int pos = n - 1
    while pos >= 0:
        lab[pos] += 1
        if lab[pos] < k:
            return 1
        lab[pos] = 0
        pos -= 1
    return 0


def enumerate_best(const double[:, ::1] S, int k, const int[::1] u, bint has_u,
                   const int[:, ::1] ml, const int[:, ::1] cl, double tol):
    """Exhaustive search over all k**n labellings.

    Returns ``(best_labels, best_objective, feasible_count, optimal_count)``;
    ``best_labels`` is the lexicographically first labelling within ``tol``
    of the minimum, or None when nothing is feasible.
    """
    cdef int d = S.shape[0], n = S.shape[1]
    cdef int nml = ml.shape[0], ncl = cl.shape[0]
    cdef int[::1] lab = np.zeros(n, dtype=np.intc)
    cdef int[::1] best = np.zeros(n, dtype=np.intc)
    cdef int[::1] counts = np.zeros(k, dtype=np.intc)
    cdef double[::1] sums = np.zeros(k * d)
    cdef const int *mlp = &ml[0, 0] if nml > 0 else NULL
    cdef const int *clp = &cl[0, 0] if ncl > 0 else NULL
    cdef const int *up = &u[0] if has_u else NULL
    cdef long long nfeas = 0, nopt = 0
    cdef double fmin = INFINITY, f
    cdef int found = 0, more

    with nogil:
        more = 1
        while more:
            if feasible(&lab[0], n, k, up, has_u, mlp, nml, clp, ncl, &counts[0]):
                nfeas += 1
                f = labelled_sse(&S[0, 0], &lab[0], n, k, d, &sums[0], &counts[0])
                if f < fmin:
                    fmin = f
            more = advance(&lab[0], n, k)
        if nfeas > 0:
            for more in range(n):
                lab[more] = 0
            more = 1
            while more:
                if feasible(&lab[0], n, k, up, has_u, mlp, nml, clp, ncl, &counts[0]):
                    f = labelled_sse(&S[0, 0], &lab[0], n, k, d, &sums[0], &counts[0])
                    if f <= fmin + tol:
                        nopt += 1
                        if not found:
                            found = 1
                            memcpy(&best[0], &lab[0], n * sizeof(int))
                more = advance(&lab[0], n, k)

    if nfeas == 0:
        return None, INFINITY, 0, 0
    return np.asarray(best, dtype=np.intp).copy(), fmin, int(nfeas), int(nopt)
