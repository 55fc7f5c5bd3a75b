# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hull kernels; see ``_pykernels`` for the reference semantics."""

import numpy as np

from libc.math cimport fabs
from libc.stdlib cimport free, malloc

cdef double REL_TOL = 1e-14
cdef int MAX_WOLFE = 500
cdef double TINY = 1e-15


cdef int _solve(double* K, double* rhs, int n) noexcept nogil:
    """Gaussian elimination with partial pivoting, in place; 1 if singular."""
    cdef int i, j, r, piv
    cdef double best, f, tmp
    for i in range(n):
        piv = i
        best = fabs(K[i * n + i])
        for r in range(i + 1, n):
            if fabs(K[r * n + i]) > best:
                best = fabs(K[r * n + i])
                piv = r
        if best < 1e-300:
            return 1
        if piv != i:
            for j in range(n):
                tmp = K[i * n + j]
                K[i * n + j] = K[piv * n + j]
                K[piv * n + j] = tmp
            tmp = rhs[i]
            rhs[i] = rhs[piv]
            rhs[piv] = tmp
        for r in range(i + 1, n):
            f = K[r * n + i] / K[i * n + i]
            if f != 0.0:
                for j in range(i, n):
                    K[r * n + j] -= f * K[i * n + j]
                rhs[r] -= f * rhs[i]
    for i in range(n - 1, -1, -1):
        tmp = rhs[i]
        for j in range(i + 1, n):
            tmp -= K[i * n + j] * rhs[j]
        rhs[i] = tmp / K[i * n + i]
    return 0


cdef inline double _dot(const double* a, const double* b, int m) noexcept nogil:
    cdef double s = 0.0
    cdef int i
    for i in range(m):
        s += a[i] * b[i]
    return s


cdef double _wolfe(const double* Y, int n, int m, double* w, double* x,
                   int* S, double* lam, double* v, double* K, double* rhs) noexcept nogil:
    """Min-norm point of conv(rows of Y). Fills w (n) and x (m); returns FW gap."""
    cdef int i, a, b, s, j, it, ns, kk
    cdef double nrm, scale = 0.0, best, eps, d, theta, ratio, denom, total, xx
    cdef int j0 = 0
    cdef bint in_s, all_pos, any_keep, stop = False
    best = 1e308
    for i in range(n):
        nrm = _dot(Y + i * m, Y + i * m, m)
        if nrm > scale:
            scale = nrm
        if nrm < best:
            best = nrm
            j0 = i
    for i in range(n):
        w[i] = 0.0
    for i in range(m):
        x[i] = Y[j0 * m + i]
    if scale == 0.0:
        w[j0] = 1.0
        return 0.0
    eps = REL_TOL * scale
    S[0] = j0
    lam[0] = 1.0
    ns = 1
    for it in range(MAX_WOLFE):
        j = 0
        best = 1e308
        for i in range(n):
            d = _dot(Y + i * m, x, m)
            if d < best:
                best = d
                j = i
        if _dot(x, x, m) - best <= eps:
            break
        in_s = False
        for s in range(ns):
            if S[s] == j:
                in_s = True
        if in_s:
            break
        S[ns] = j
        lam[ns] = 0.0
        ns += 1
        while True:
            kk = ns + 1
            for a in range(ns):
                for b in range(ns):
                    K[a * kk + b] = _dot(Y + S[a] * m, Y + S[b] * m, m)
                K[a * kk + ns] = 1.0
                K[ns * kk + a] = 1.0
                rhs[a] = 0.0
            K[ns * kk + ns] = 0.0
            rhs[ns] = 1.0
            if _solve(K, rhs, kk):
                # affinely dependent support: keep current weights and stop
                stop = True
                break
            all_pos = True
            for a in range(ns):
                v[a] = rhs[a]
                if v[a] <= TINY:
                    all_pos = False
            if all_pos:
                for a in range(ns):
                    lam[a] = v[a]
                break
            theta = 1.0
            for a in range(ns):
                if v[a] <= TINY:
                    denom = lam[a] - v[a]
                    if denom > 0.0:
                        ratio = lam[a] / denom
                        if ratio < theta:
                            theta = ratio
            any_keep = False
            for a in range(ns):
                lam[a] = theta * v[a] + (1.0 - theta) * lam[a]
                if lam[a] > TINY:
                    any_keep = True
            if not any_keep:
                b = 0
                for a in range(ns):
                    if lam[a] > lam[b]:
                        b = a
                for a in range(ns):
                    lam[a] = 0.0
                lam[b] = 1.0
            b = 0
            total = 0.0
            for a in range(ns):
                if lam[a] > TINY:
                    S[b] = S[a]
                    lam[b] = lam[a]
                    total += lam[a]
                    b += 1
            ns = b
            for a in range(ns):
                lam[a] /= total
            if ns == 1:
                break
        for i in range(m):
            x[i] = 0.0
        for a in range(ns):
            for i in range(m):
                x[i] += lam[a] * Y[S[a] * m + i]
        if stop:
            break
    total = 0.0
    for a in range(ns):
        w[S[a]] += lam[a]
    for i in range(n):
        total += w[i]
    for i in range(n):
        w[i] /= total
    for i in range(m):
        x[i] = 0.0
    for a in range(n):
        if w[a] != 0.0:
            for i in range(m):
                x[i] += w[a] * Y[a * m + i]
    xx = _dot(x, x, m)
    best = 1e308
    for i in range(n):
        d = _dot(Y + i * m, x, m)
        if d < best:
            best = d
    d = xx - best
    return d if d > 0.0 else 0.0


cdef struct Work:
    double* Y
    int* S
    double* lam
    double* v
    double* K
    double* rhs


cdef int _alloc(Work* wk, int n, int m) noexcept nogil:
    wk.Y = <double*> malloc(n * m * sizeof(double))
    wk.S = <int*> malloc((n + 1) * sizeof(int))
    wk.lam = <double*> malloc((n + 1) * sizeof(double))
    wk.v = <double*> malloc((n + 1) * sizeof(double))
    wk.K = <double*> malloc((n + 2) * (n + 2) * sizeof(double))
    wk.rhs = <double*> malloc((n + 2) * sizeof(double))
    return wk.Y == NULL or wk.S == NULL or wk.lam == NULL or wk.v == NULL \
        or wk.K == NULL or wk.rhs == NULL


cdef void _release(Work* wk) noexcept nogil:
    free(wk.Y)
    free(wk.S)
    free(wk.lam)
    free(wk.v)
    free(wk.K)
    free(wk.rhs)


def nearest_in_hull(points, target):
    """Closest point of conv(points) to target: ``(x, weights, fw_gap)``."""
    cdef double[:, ::1] P = np.ascontiguousarray(points, dtype=np.float64)
    cdef double[::1] t = np.ascontiguousarray(target, dtype=np.float64)
    cdef int n = P.shape[0], m = P.shape[1], i, c
    out_w = np.zeros(n)
    out_x = np.zeros(m)
    cdef double[::1] w = out_w
    cdef double[::1] x = out_x
    cdef Work wk
    cdef double gap
    if _alloc(&wk, n, m):
        _release(&wk)
        raise MemoryError()
    with nogil:
        for i in range(n):
            for c in range(m):
                wk.Y[i * m + c] = P[i, c] - t[c]
        gap = _wolfe(wk.Y, n, m, &w[0], &x[0], wk.S, wk.lam, wk.v, wk.K, wk.rhs)
        for c in range(m):
            x[c] += t[c]
    _release(&wk)
    return out_x, out_w, gap


def common_point_gap(points, offsets, int max_iter=10000, double tol=1e-14):
    """Alternating minimisation; returns ``(gap, p, Q, W, iterations)``."""
    cdef double[:, ::1] P = np.ascontiguousarray(points, dtype=np.float64)
    cdef long long[::1] off = np.ascontiguousarray(offsets, dtype=np.int64)
    cdef int N = P.shape[0], m = P.shape[1], H = off.shape[0] - 1
    cdef int j, a, b, i, c, it = 0, nmax = 0
    out_Q = np.zeros((H, m))
    out_W = np.zeros(N)
    out_p = np.zeros(m)
    cdef double[:, ::1] Q = out_Q
    cdef double[::1] W = out_W
    cdef double[::1] p = out_p
    cdef double gap, new_gap, diff, fw
    cdef Work wk
    for j in range(H):
        if off[j + 1] - off[j] > nmax:
            nmax = <int>(off[j + 1] - off[j])
    if _alloc(&wk, nmax, m):
        _release(&wk)
        raise MemoryError()
    with nogil:
        for j in range(H):
            a = <int>off[j]
            b = <int>off[j + 1]
            for i in range(a, b):
                W[i] = 1.0 / (b - a)
            for c in range(m):
                Q[j, c] = 0.0
                for i in range(a, b):
                    Q[j, c] += W[i] * P[i, c]
        gap = _mean_gap(Q, p, H, m)
        while it < max_iter and gap > 0.0:
            it += 1
            for j in range(H):
                a = <int>off[j]
                b = <int>off[j + 1]
                for i in range(a, b):
                    for c in range(m):
                        wk.Y[(i - a) * m + c] = P[i, c] - p[c]
                fw = _wolfe(wk.Y, b - a, m, &W[a], &Q[j, 0], wk.S, wk.lam, wk.v,
                            wk.K, wk.rhs)
                for c in range(m):
                    Q[j, c] += p[c]
            new_gap = _mean_gap(Q, p, H, m)
            diff = gap - new_gap
            gap = new_gap
            if diff < tol:
                break
    _release(&wk)
    return gap, out_p, out_Q, out_W, it


cdef double _mean_gap(double[:, ::1] Q, double[::1] p, int H, int m) noexcept nogil:
    cdef int j, c
    cdef double s = 0.0, diff
    for c in range(m):
        p[c] = 0.0
        for j in range(H):
            p[c] += Q[j, c]
        p[c] /= H
    for j in range(H):
        for c in range(m):
            diff = Q[j, c] - p[c]
            s += diff * diff
    return s
