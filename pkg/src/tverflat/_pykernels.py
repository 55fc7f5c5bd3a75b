"""Pure-Python (numpy) versions of the compiled kernels in ``_ckernels.pyx``.

Both modules expose the same two functions with the same signatures and
return conventions; ``tverflat.kernels`` picks one at import time.
"""

import numpy as np

# Wolfe's stopping rule: FW gap below this fraction of the largest squared
# shifted-point norm.
WOLFE_REL_TOL = 1e-14
WOLFE_MAX_ITER = 500


def _affine_minimizer(Ys):
    """Weights v with sum 1 minimising ||Ys.T v||."""
    s = Ys.shape[0]
    K = np.empty((s + 1, s + 1))
    K[:s, :s] = Ys @ Ys.T
    K[:s, s] = 1.0
    K[s, :s] = 1.0
    K[s, s] = 0.0
    rhs = np.zeros(s + 1)
    rhs[s] = 1.0
    try:
        sol = np.linalg.solve(K, rhs)
    except np.linalg.LinAlgError:
        return None
    return sol[:s]


def nearest_in_hull(points, target):
    """Closest point of conv(points) to target.

    Returns ``(x, weights, fw_gap)`` where ``weights`` has one entry per input
    point and ``fw_gap`` is the Frank-Wolfe duality gap of ``||x - target||^2 / 2``
    at the returned point.
    """
    P = np.asarray(points, dtype=float)
    t = np.asarray(target, dtype=float)
    n = P.shape[0]
    Y = P - t
    norms = np.einsum("ij,ij->i", Y, Y)
    scale = norms.max()
    w = np.zeros(n)
    j0 = int(np.argmin(norms))
    S = [j0]
    lam = np.array([1.0])
    x = Y[j0].copy()
    if scale == 0.0:
        w[j0] = 1.0
        return P[j0].copy(), w, 0.0
    eps = WOLFE_REL_TOL * scale
    stop = False
    for _ in range(WOLFE_MAX_ITER):
        dots = Y @ x
        j = int(np.argmin(dots))
        if x @ x - dots[j] <= eps or j in S:
            break
        S.append(j)
        lam = np.append(lam, 0.0)
        while True:
            v = _affine_minimizer(Y[S])
            if v is None:
                # affinely dependent support: keep current weights and stop
                stop = True
                break
            if np.all(v > 1e-15):
                lam = v
                break
            mask = v <= 1e-15
            denom = lam[mask] - v[mask]
            with np.errstate(divide="ignore", invalid="ignore"):
                ratios = np.where(denom > 0, lam[mask] / denom, np.inf)
            theta = min(1.0, float(ratios.min()))
            lam = theta * v + (1.0 - theta) * lam
            keep = lam > 1e-15
            if not np.any(keep):
                b = int(np.argmax(lam))
                lam = np.zeros_like(lam)
                lam[b] = 1.0
                keep = lam > 1e-15
            S = [s for s, kp in zip(S, keep) if kp]
            lam = lam[keep]
            lam = lam / lam.sum()
            if len(S) == 1:
                break
        x = lam @ Y[S]
        if stop:
            break
    w[S] = lam
    w /= w.sum()
    x = w @ Y
    gap = float(x @ x - np.min(Y @ x))
    return x + t, w, max(gap, 0.0)


def common_point_gap(points, offsets, max_iter=10000, tol=1e-14):
    """Alternating minimisation of sum_j ||q_j - p||^2, q_j in hull j.

    ``points`` is the row-stack of all hull vertices and hull ``j`` is
    ``points[offsets[j]:offsets[j+1]]``. Returns
    ``(gap, p, Q, W, iterations)`` with ``Q`` the nearest hull points and
    ``W`` the concatenated convex weights.
    """
    P = np.asarray(points, dtype=float)
    off = np.asarray(offsets, dtype=np.int64)
    H = len(off) - 1
    m = P.shape[1]
    Q = np.empty((H, m))
    W = np.zeros(P.shape[0])
    for j in range(H):
        a, b = off[j], off[j + 1]
        W[a:b] = 1.0 / (b - a)
        Q[j] = W[a:b] @ P[a:b]
    p = Q.mean(axis=0)
    gap = float(np.sum((Q - p) ** 2))
    it = 0
    while it < max_iter and gap > 0.0:
        it += 1
        for j in range(H):
            a, b = off[j], off[j + 1]
            q, w, _ = nearest_in_hull(P[a:b], p)
            Q[j] = q
            W[a:b] = w
        p_new = Q.mean(axis=0)
        new_gap = float(np.sum((Q - p_new) ** 2))
        p = p_new
        decrease = gap - new_gap
        gap = new_gap
        if decrease < tol:
            break
    return gap, p, Q, W, it
