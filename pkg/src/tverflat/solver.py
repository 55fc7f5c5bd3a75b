"""Search for a direction complement L where all projected Radon points meet.

For a fixed (d-k)-dimensional subspace L, each projected set has d-k+2
points in a (d-k)-space and so a Radon partition. A k-flat meeting both part
hulls of every set is a fibre of the projection onto L at a point where all
those Radon points coincide. The strategies below search L for that.
"""

from __future__ import annotations

import itertools
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares, minimize

from .certificate import Certificate, Instance, canonical_parts, certificate_at, verify
from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import BudgetExceeded, IllConditioned, InvalidInstance, RankDeficient, TverflatError
from .feasibility import HullSystem, common_point_gap
from .geometry import (
    Subspace,
    _gram_schmidt,
    complement_basis,
    flat_from,
    orthonormalize,
    project,
)
from .radon import radon_partition

__all__ = [
    "SolverConfig",
    "FailureReport",
    "SolveFailed",
    "STRATEGIES",
    "objective_radon_trace",
    "random_subspace",
    "solve",
    "brute_oracle",
    "OracleResult",
    "all_bipartitions",
]

STRATEGIES = ("radon-trace", "enumerate", "sphere-sweep")
_PENALTY = 1e6


@dataclass(frozen=True)
class SolverConfig:
    strategy: str = "radon-trace"
    restarts: int = 64
    max_iters: int = 400
    tol_success: float = 1e-6
    seed: int = 42
    time_budget: float = 30.0
    threads: int = 1
    # try the other strategies when the chosen one runs dry
    fallback: bool = True

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if self.restarts < 1 or self.max_iters < 1 or self.threads < 1:
            raise ValueError("restarts, max_iters and threads must be positive")
        if not self.tol_success > 0:
            raise ValueError("tol_success must be positive")


@dataclass
class FailureReport:
    best_residual: float
    best_certificate: Certificate | None
    restarts: int
    strategy: str
    elapsed: float
    trace: list = field(default_factory=list)


class SolveFailed(TverflatError):
    def __init__(self, report: FailureReport):
        self.report = report
        super().__init__(
            f"no certificate within tolerance after {report.restarts} restarts "
            f"(best residual {report.best_residual:.3e})"
        )


# ---------------------------------------------------------------------------
# objective


def _radon_points(Y):
    """Radon points of a stack of point sets, shape (sets, m + 2, m) -> (sets, m)."""
    c = Y.mean(axis=1, keepdims=True)
    Z = Y - c
    scale = np.abs(Z).max(axis=(1, 2), keepdims=True)
    if np.any(scale == 0.0):
        raise IllConditioned("a projected set collapsed to one point")
    Z = Z / scale
    ones = np.ones(Z.shape[:2] + (1,))
    lifted = np.concatenate([ones, Z], axis=2).transpose(0, 2, 1)
    _, s, Vt = np.linalg.svd(lifted)
    if np.any(s[:, -1] <= DEFAULT_TOLERANCES.kernel_ambiguity * s[:, 0]):
        raise IllConditioned("projected dependence is ambiguous")
    lam = Vt[:, -1, :]
    pos = np.where(lam > 0, lam, 0.0)
    return np.einsum("sa,sam->sm", pos, Y) / pos.sum(axis=1, keepdims=True)


def objective_radon_trace(instance: Instance, L: Subspace,
                          tol: Tolerances = DEFAULT_TOLERANCES):
    """Spread of the projected Radon points at ``L``.

    Returns ``(value, radon_points, bipartitions)`` with value
    ``sum_i ||r_i - mean(r)||^2``; it is zero exactly at solutions.
    """
    m = instance.d - instance.k
    if L.dim != m:
        raise ValueError(f"L must have dimension {m}")
    points, parts = [], []
    for S in instance.sets:
        R = radon_partition(project(L, np.asarray(S, dtype=float)), tol)
        points.append(R.point)
        parts.append(canonical_parts(R.part_pos, R.part_neg))
    P = np.array(points, dtype=float)
    value = float(((P - P.mean(axis=0)) ** 2).sum())
    return value, P, tuple(parts)


def random_subspace(d: int, m: int, rng) -> Subspace:
    """Rotation-invariant random m-subspace of R^d."""
    while True:
        try:
            return orthonormalize(rng.standard_normal((m, d)))
        except RankDeficient:
            continue


class _Chart:
    """Chart of the Grassmannian about ``L0`` evaluating projected data."""

    def __init__(self, X, L0: Subspace):
        self.X = X
        self.L0 = L0
        self.C0 = complement_basis(L0)
        self.k = self.C0.dim
        self.m = L0.dim

    def basis(self, t):
        T = np.asarray(t, dtype=float).reshape(self.k, self.m)
        return _gram_schmidt(self.L0.basis + self.C0.basis @ T, DEFAULT_TOLERANCES)

    def subspace(self, t) -> Subspace:
        return Subspace(self.basis(t))

    def radon_residual(self, t):
        try:
            R = _radon_points(self.X @ self.basis(t))
        except (IllConditioned, RankDeficient, np.linalg.LinAlgError):
            return np.full(self.X.shape[0] * self.m, _PENALTY)
        return (R - R.mean(axis=0)).ravel()

    def radon_value(self, t):
        r = self.radon_residual(t)
        return float(r @ r)


def _normalised(instance: Instance):
    X = np.array([np.asarray(S, dtype=float) for S in instance.sets])
    c = X.reshape(-1, instance.d).mean(axis=0)
    s = np.abs(X - c).max()
    return (X - c) / (s if s > 0 else 1.0)


def _simplex(n, step):
    return np.vstack([np.zeros(n), step * np.eye(n)])


def _nelder_mead(fun, n, step, max_iters):
    res = minimize(
        fun,
        np.zeros(n),
        method="Nelder-Mead",
        options=dict(
            maxiter=max_iters,
            maxfev=2 * max_iters,
            xatol=1e-12,
            fatol=1e-24,
            initial_simplex=_simplex(n, step),
        ),
    )
    return res.x, float(res.fun)


def _polish_radon(X, L: Subspace, rounds: int = 3) -> tuple[Subspace, float]:
    """Levenberg-Marquardt on the Radon-point residual, re-centring the chart."""
    value = _Chart(X, L).radon_value(np.zeros(L.dim * (L.ambient_dim - L.dim)))
    for _ in range(rounds):
        chart = _Chart(X, L)
        n = chart.k * chart.m
        res = least_squares(chart.radon_residual, np.zeros(n), method="lm",
                            xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=200 * (n + 1))
        new_value = float(res.fun @ res.fun)
        if not new_value < value:
            break
        L, value = chart.subspace(res.x), new_value
        if value < 1e-28:
            break
    return L, value


# ---------------------------------------------------------------------------
# strategies; each task is a pure function of (instance, config, task index)


def _task_rng(seed: int, task: int):
    return np.random.default_rng([seed & 0xFFFFFFFFFFFFFFFF, task])


def _radon_trace_task(X, d, m, cfg: SolverConfig, task: int):
    rng = _task_rng(cfg.seed, task)
    L = random_subspace(d, m, rng)
    n = (d - m) * m
    chart = _Chart(X, L)
    value = chart.radon_value(np.zeros(n))
    step = 0.5
    for _ in range(8):
        t, v = _nelder_mead(chart.radon_value, n, step, cfg.max_iters)
        if v < value:
            L, value = chart.subspace(t), v
            chart = _Chart(X, L)
            step = max(0.25 * step, 1e-3)
        else:
            break
        if value < 1e-20:
            break
    if value < 1e-2:
        L, value = _polish_radon(X, L)
    return L, value


def _sphere_candidates(X, d: int, rng, count: int = 16):
    """Best grid directions for k = d - 1, where L is a line."""
    if d == 2:
        theta = np.arange(2048) * (2 * np.pi / 4096)
        U = np.stack([np.cos(theta), np.sin(theta)], axis=1)
    elif d == 3:
        az = np.arange(4096) * (2 * np.pi / 4096)
        pol = np.arange(1025) * (2 * np.pi / 4096)
        A, P = np.meshgrid(az, pol, indexing="ij")
        U = np.stack([np.sin(P) * np.cos(A), np.sin(P) * np.sin(A), np.cos(P)], axis=-1)
        U = U.reshape(-1, 3)
    else:
        U = rng.standard_normal((100_000, d))
        U /= np.linalg.norm(U, axis=1, keepdims=True)
    best_v = np.empty(0)
    best_u = np.empty((0, d))
    for chunk in np.array_split(U, max(1, len(U) // 200_000)):
        V = np.einsum("sad,nd->san", X, chunk)
        med = np.median(V, axis=1)
        val = ((med - med.mean(axis=0)) ** 2).sum(axis=0)
        best_v = np.concatenate([best_v, val])
        best_u = np.concatenate([best_u, chunk])
        keep = np.argsort(best_v, kind="stable")[: 8 * count]
        best_v, best_u = best_v[keep], best_u[keep]
    out = []
    for u in best_u:
        if all(abs(u @ w) < 1 - 1e-6 for w in out):
            out.append(u)
        if len(out) == count:
            break
    return out


def _certify(instance: Instance, L: Subspace, cfg: SolverConfig, meta):
    try:
        cert = certificate_at(instance.as_float(), L, meta=meta)
    except (IllConditioned, RankDeficient):
        return None
    return cert


def _run_tasks(fn, count: int, cfg: SolverConfig, deadline: float, stop_when):
    """Run ``fn(task)`` for task = 0, 1, ... in waves of ``cfg.threads``.

    Returns the results in task order up to and including the first
    accepted wave; within a wave the lowest accepted index wins, so serial
    and threaded runs agree.
    """
    results = []
    wave = max(1, cfg.threads)
    pool = ThreadPoolExecutor(max_workers=wave) if wave > 1 else None
    try:
        for start in range(0, count, wave):
            if time.monotonic() > deadline:
                break
            idx = range(start, min(count, start + wave))
            if pool is None:
                batch = [fn(i) for i in idx]
            else:
                batch = list(pool.map(fn, idx))
            results.extend(batch)
            if any(stop_when(r) for r in batch):
                break
    finally:
        if pool is not None:
            pool.shutdown(wait=True)
    return results


def _accepted(cert, cfg):
    return cert is not None and cert.residual <= cfg.tol_success


def _solve_radon_trace(instance, X, cfg, deadline, trace):
    d, m = instance.d, instance.m

    def task(i):
        try:
            L, value = _radon_trace_task(X, d, m, cfg, i)
        except (RankDeficient, np.linalg.LinAlgError) as err:
            trace.append(("radon-trace", i, f"error: {err}"))
            return None
        cert = _certify(instance, L, cfg, {"strategy": "radon-trace", "task": i})
        trace.append(("radon-trace", i, value if cert is None else cert.residual))
        return cert

    return _run_tasks(task, cfg.restarts, cfg, deadline, lambda c: _accepted(c, cfg))


def _solve_sphere(instance, X, cfg, deadline, trace):
    d = instance.d
    if instance.m != 1:
        raise ValueError("sphere-sweep needs k = d - 1")
    cands = _sphere_candidates(X, d, _task_rng(cfg.seed, 0))

    def task(i):
        L = orthonormalize([cands[i]])
        L, value = _polish_radon(X, L)
        cert = _certify(instance, L, cfg, {"strategy": "sphere-sweep", "task": i})
        trace.append(("sphere-sweep", i, value if cert is None else cert.residual))
        return cert

    return _run_tasks(task, len(cands), cfg, deadline, lambda c: _accepted(c, cfg))


def all_bipartitions(n: int):
    """All splits of ``range(n)`` into two nonempty parts, canonical order."""
    out = []
    for mask in range(1, 2 ** (n - 1)):
        b = tuple(i for i in range(1, n) if mask >> (i - 1) & 1)
        a = tuple(i for i in range(n) if i not in b)
        out.append((a, b))
    return out


def _projected_system(X, B, combo):
    Y = X @ B
    hulls = []
    for i, (a, b) in enumerate(combo):
        hulls.append(Y[i][list(a)])
        hulls.append(Y[i][list(b)])
    return HullSystem(B.shape[1], tuple(hulls))


def _gap_certificate(instance, X_orig, L: Subspace, combo, meta):
    B = L.basis
    res = common_point_gap(_projected_system(X_orig, B, combo), tol=0.0, max_iter=20000)
    weights = tuple(
        (res.weights[2 * i], res.weights[2 * i + 1]) for i in range(len(combo))
    )
    cert = Certificate(tuple(combo), flat_from(L, res.witness_point), weights, meta=meta)
    rep = verify(instance, cert)
    return Certificate(cert.bipartitions, cert.flat, cert.weights, rep.residual, meta)


def _solve_enumerate(instance, X, cfg, deadline, trace, first=None):
    d, m = instance.d, instance.m
    n_par = (d - m) * m
    combos = list(itertools.product(all_bipartitions(m + 2), repeat=instance.k + 1))
    if first is not None and first in combos:
        combos.remove(first)
        combos.insert(0, first)
    Xo = np.array([np.asarray(S, dtype=float) for S in instance.sets])
    starts = max(1, min(4, cfg.restarts))

    def task(ci):
        combo = combos[ci]
        best_L, best_v = None, math.inf
        for s in range(starts):
            rng = _task_rng(cfg.seed, ci * 1009 + s)
            L = random_subspace(d, m, rng)
            # gap in normalised coordinates
            value = common_point_gap(_projected_system(X, L.basis, combo)).gap
            step = 0.5
            for _ in range(10):
                chart = _Chart(X, L)
                fun = lambda t: common_point_gap(  # noqa: E731
                    _projected_system(X, chart.basis(t), combo)
                ).gap
                t, v = _nelder_mead(fun, n_par, step, cfg.max_iters)
                if v < value:
                    L, value = chart.subspace(t), v
                    step = max(0.25 * step, 1e-4)
                else:
                    break
                if value < 1e-26:
                    break
            if value < best_v:
                best_L, best_v = L, value
            if best_v < 1e-20 or time.monotonic() > deadline:
                break
        cert = _gap_certificate(instance, Xo, best_L, combo,
                                {"strategy": "enumerate", "task": ci})
        trace.append(("enumerate", ci, cert.residual))
        return cert

    return _run_tasks(task, len(combos), cfg, deadline, lambda c: _accepted(c, cfg))


def _solve_k0(instance: Instance) -> Certificate:
    L = Subspace.full(instance.d, exact=instance.exact)
    return certificate_at(instance, L, meta={"strategy": "radon"})


def _perturbed(instance: Instance, seed: int, eps: float) -> Instance:
    rng = _task_rng(seed, 2**31 - 1)
    sets = []
    for S in instance.sets:
        S = np.asarray(S, dtype=float)
        scale = max(1.0, float(np.abs(S).max()))
        sets.append(S + eps * scale * rng.standard_normal(S.shape))
    return Instance(instance.d, instance.k, tuple(sets))


def solve(instance: Instance, config: SolverConfig | None = None) -> Certificate:
    """Find a certificate for ``instance`` or raise :class:`SolveFailed`.

    The primary strategy runs first. With ``config.fallback`` the solver then
    retries radon-trace on a slightly perturbed copy (for degenerate inputs,
    re-certifying on the original points) and finally enumerates
    bipartitions.
    """
    cfg = config or SolverConfig()
    if not isinstance(instance, Instance):
        raise InvalidInstance("solve expects an Instance")
    t0 = time.monotonic()
    deadline = t0 + cfg.time_budget
    if instance.k == 0:
        cert = _solve_k0(instance)
        return cert

    X = _normalised(instance)
    trace: list = []
    tried: list = []

    def run(strategy):
        tried.append(strategy)
        if strategy == "radon-trace":
            return _solve_radon_trace(instance, X, cfg, deadline, trace)
        if strategy == "sphere-sweep":
            return _solve_sphere(instance, X, cfg, deadline, trace)
        return _solve_enumerate(instance, X, cfg, deadline, trace)

    plan = [cfg.strategy]
    if cfg.fallback:
        if instance.m == 1 and "sphere-sweep" not in plan:
            plan.append("sphere-sweep")
        # the radon objective is ambiguous everywhere for such sets
        plan.insert(0 if _flat_set(X, instance.m) else len(plan), "perturbed")
        if "enumerate" not in plan:
            plan.append("enumerate")

    candidates = []
    for strategy in plan:
        if time.monotonic() > deadline:
            break
        if strategy == "perturbed":
            results = _solve_perturbed(instance, cfg, deadline, trace)
        else:
            results = run(strategy)
        results = [c for c in results if c is not None]
        candidates.extend(results)
        winners = [c for c in results if _accepted(c, cfg)]
        if winners:
            cert = winners[0]
            cert.meta["restarts"] = len(trace)
            cert.meta["elapsed"] = time.monotonic() - t0
            return cert

    best = min(candidates, key=lambda c: c.residual, default=None)
    raise SolveFailed(
        FailureReport(
            best_residual=best.residual if best is not None else math.inf,
            best_certificate=best,
            restarts=len(trace),
            strategy="+".join(plan),
            elapsed=time.monotonic() - t0,
            trace=trace,
        )
    )


def _flat_set(X, m: int) -> bool:
    """True if some set has affine rank below m (so every projection is degenerate)."""
    for S in X:
        sv = np.linalg.svd(S - S.mean(axis=0), compute_uv=False)
        if sv[0] == 0.0 or np.count_nonzero(sv > 1e-9 * sv[0]) < m:
            return True
    return False


def _solve_perturbed(instance, cfg, deadline, trace):
    """Radon-trace on a jittered copy, then re-fit the found partitions exactly."""
    out = []
    for eps in (1e-9, 1e-7):
        if time.monotonic() > deadline:
            break
        pert = _perturbed(instance, cfg.seed, eps)
        Xp = _normalised(pert)
        sub = SolverConfig(strategy="radon-trace", restarts=max(8, cfg.restarts // 4),
                           max_iters=cfg.max_iters, tol_success=cfg.tol_success,
                           seed=cfg.seed, time_budget=cfg.time_budget, threads=cfg.threads,
                           fallback=False)
        results = _solve_radon_trace(pert, Xp, sub, deadline, trace)
        X = _normalised(instance)
        Xo = np.array([np.asarray(S, dtype=float) for S in instance.sets])
        for c in results:
            if c is None:
                continue
            combo = tuple(c.bipartitions)
            cert = _gap_certificate(instance, Xo, c.L, combo,
                                    {"strategy": "perturbed", "eps": eps})
            if not _accepted(cert, cfg):
                cert = _refit(instance, X, Xo, cert.L, combo, cfg)
            trace.append(("perturbed", eps, cert.residual))
            out.append(cert)
            if _accepted(cert, cfg):
                return out
    return out


def _refit(instance, X, Xo, L, combo, cfg):
    """Local minimisation of the feasibility gap for fixed bipartitions."""
    n_par = instance.k * instance.m
    value = common_point_gap(_projected_system(X, L.basis, combo)).gap
    step = 1e-3
    for _ in range(10):
        chart = _Chart(X, L)
        fun = lambda t: common_point_gap(  # noqa: E731
            _projected_system(X, chart.basis(t), combo)
        ).gap
        t, v = _nelder_mead(fun, n_par, step, cfg.max_iters)
        if v < value:
            L, value = chart.subspace(t), v
            step = max(0.25 * step, 1e-6)
        else:
            break
    return _gap_certificate(instance, Xo, L, combo, {"strategy": "perturbed-refit"})


# ---------------------------------------------------------------------------
# brute-force oracle


@dataclass(frozen=True, eq=False)
class OracleResult:
    bipartitions: tuple
    L: Subspace
    gap: float
    evaluated: int


def grassmann_grid(d: int, m: int, resolution: int):
    """Angle grid over Gr(d, m) for d <= 3 (plus the trivial m = d)."""
    if m == d:
        return [np.eye(d)]
    if d == 2 and m == 1:
        th = np.arange(resolution) * (np.pi / resolution)
        return [np.array([[np.cos(t)], [np.sin(t)]]) for t in th]
    if d == 3 and m in (1, 2):
        out = []
        n_pol = max(1, resolution // 4)
        for i in range(resolution):
            az = 2 * np.pi * i / resolution
            for j in range(n_pol + 1):
                pol = (np.pi / 2) * j / n_pol
                if j == 0 and i > 0:
                    continue
                u = np.array([np.sin(pol) * np.cos(az), np.sin(pol) * np.sin(az), np.cos(pol)])
                if m == 1:
                    out.append(u[:, None])
                else:
                    out.append(complement_basis(Subspace(u[:, None])).basis)
        return out
    raise BudgetExceeded(f"no grid for Gr({d}, {m})")


def brute_oracle(instance: Instance, grid_resolution: int = 1024) -> OracleResult:
    """Global best feasibility gap over all bipartitions and an angle grid of L.

    Desk scale only: ``d <= 3`` and ``d - k <= 2`` (any ``k = 0`` instance is
    allowed since the Grassmannian is then a point).
    """
    d, m = instance.d, instance.m
    if instance.k > 0 and (d > 3 or m > 2):
        raise BudgetExceeded("brute_oracle is limited to d <= 3, d - k <= 2")
    if instance.k == 0 and d > 4:
        raise BudgetExceeded("brute_oracle is limited to d <= 4 for k = 0")
    X = np.array([np.asarray(S, dtype=float) for S in instance.sets])
    combos = list(itertools.product(all_bipartitions(m + 2), repeat=instance.k + 1))
    best = (math.inf, None, None)
    count = 0
    for B in grassmann_grid(d, m, grid_resolution):
        for combo in combos:
            gap = common_point_gap(_projected_system(X, B, combo)).gap
            count += 1
            if gap < best[0]:
                best = (gap, combo, B)
    return OracleResult(best[1], Subspace(best[2]), float(best[0]), count)
