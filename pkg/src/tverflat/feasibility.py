"""Common points of convex hulls: a float merit function and an exact LP test."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import kernels
from .errors import DimensionMismatch
from .geometry import exact_array, is_exact

__all__ = [
    "HullSystem",
    "FeasibilityResult",
    "nearest_in_hull",
    "common_point_gap",
    "feasible_exact",
    "bland_phase_one",
]


@dataclass(frozen=True, eq=False)
class HullSystem:
    """A list of finite point sets in R^m, each standing for its convex hull."""

    ambient_dim: int
    hulls: tuple

    def __post_init__(self):
        hulls = tuple(self.hulls)
        for j, h in enumerate(hulls):
            if h.ndim != 2 or h.shape[0] == 0 or h.shape[1] != self.ambient_dim:
                raise DimensionMismatch(f"hull {j} has shape {h.shape}")
        object.__setattr__(self, "hulls", hulls)

    @classmethod
    def from_points(cls, hulls, exact: bool | None = None) -> HullSystem:
        """Build from nested lists; ``exact=None`` keeps float arrays float."""
        arrays = []
        for h in hulls:
            exact_h = _looks_exact(h) if exact is None else exact
            arrays.append(exact_array(h) if exact_h else np.asarray(h, dtype=float))
        if not arrays:
            raise DimensionMismatch("need at least one hull")
        arrays = [a.reshape(a.shape[0], -1) for a in arrays]
        return cls(arrays[0].shape[1], tuple(arrays))

    @property
    def exact(self) -> bool:
        return all(is_exact(h) for h in self.hulls)

    def packed(self):
        """(stacked float points, offsets) for the kernels."""
        pts = np.vstack([np.asarray(h, dtype=float) for h in self.hulls])
        off = np.cumsum([0] + [h.shape[0] for h in self.hulls]).astype(np.int64)
        return np.ascontiguousarray(pts), off

    def translated(self, t) -> HullSystem:
        return HullSystem(self.ambient_dim, tuple(h + t for h in self.hulls))


def _looks_exact(h) -> bool:
    if isinstance(h, np.ndarray) and h.dtype.kind == "f":
        return False
    flat = np.array(h, dtype=object).ravel()
    return not (flat.size and all(isinstance(v, (float, np.floating)) for v in flat))


@dataclass(frozen=True, eq=False)
class FeasibilityResult:
    """Nearest hull points ``nearest[j]`` around the free centre ``witness_point``.

    ``gap`` is ``sum_j ||nearest[j] - witness_point||^2``.
    """

    gap: float | Fraction
    witness_point: np.ndarray
    weights: list
    nearest: np.ndarray
    iterations: int = 0
    extra: dict = field(default_factory=dict)

    @property
    def residual(self) -> float:
        """Largest distance of a nearest hull point from the centre."""
        diff = np.asarray(self.nearest, dtype=float) - np.asarray(
            self.witness_point, dtype=float
        )
        return float(np.sqrt((diff**2).sum(axis=1)).max(initial=0.0))


def nearest_in_hull(points, target):
    """Point of conv(points) closest to ``target`` and its convex weights."""
    P = np.asarray(points, dtype=float)
    if P.ndim != 2 or P.shape[0] == 0:
        raise DimensionMismatch("points must be a nonempty (n, m) array")
    x, w, _ = kernels.nearest_in_hull(P, np.asarray(target, dtype=float))
    w = np.where(w < 0.0, 0.0, w)
    return x, w / w.sum()


def common_point_gap(system: HullSystem, max_iter: int = 10000,
                     tol: float = 1e-14) -> FeasibilityResult:
    """Minimise ``sum_j ||q_j - p||^2`` over ``q_j`` in hull ``j`` and free ``p``.

    Alternates ``p <- mean(q)`` with a nearest-point step per hull, stopping
    once an iteration decreases the objective by less than ``tol``.
    """
    pts, off = system.packed()
    gap, p, Q, W, it = kernels.common_point_gap(pts, off, max_iter, tol)
    weights = []
    for j in range(len(off) - 1):
        w = np.clip(W[off[j]:off[j + 1]], 0.0, None)
        weights.append(w / w.sum())
    return FeasibilityResult(float(gap), p, weights, Q, it)


# ---------------------------------------------------------------------------
# exact LP


def bland_phase_one(A, b):
    """Find ``x >= 0`` with ``A x = b`` over the rationals, or report none.

    Phase-one simplex on artificial variables with Bland's smallest-index
    rule for both entering and leaving choices. Returns the solution as a
    list of Fractions, or ``None`` when infeasible.
    """
    A = [[Fraction(v) for v in row] for row in A]
    b = [Fraction(v) for v in b]
    nrows = len(A)
    ncols = len(A[0]) if nrows else 0
    for r in range(nrows):
        if b[r] < 0:
            A[r] = [-v for v in A[r]]
            b[r] = -b[r]
    # tableau columns: original vars, then one artificial per row
    T = [A[r] + [Fraction(int(r == c)) for c in range(nrows)] + [b[r]]
         for r in range(nrows)]
    basis = [ncols + r for r in range(nrows)]
    total = ncols + nrows
    # reduced costs for minimising the artificial sum
    cost = [-sum(T[r][c] for r in range(nrows)) for c in range(ncols)]
    cost += [Fraction(0)] * nrows + [-sum(b)]
    while True:
        enter = next((c for c in range(total) if cost[c] < 0), None)
        if enter is None:
            break
        best = None
        leave = None
        for r in range(nrows):
            a = T[r][enter]
            if a > 0:
                ratio = T[r][total] / a
                if best is None or ratio < best or (ratio == best and basis[r] < basis[leave]):
                    best, leave = ratio, r
        if leave is None:  # cannot happen: phase one is bounded below by 0
            raise RuntimeError("unbounded phase-one problem")
        piv = T[leave][enter]
        T[leave] = [v / piv for v in T[leave]]
        for r in range(nrows):
            if r != leave and T[r][enter] != 0:
                f = T[r][enter]
                T[r] = [x - f * y for x, y in zip(T[r], T[leave])]
        f = cost[enter]
        cost = [x - f * y for x, y in zip(cost, T[leave])]
        basis[leave] = enter
    if cost[total] != 0:
        return None
    x = [Fraction(0)] * ncols
    for r, var in enumerate(basis):
        if var < ncols:
            x[var] = T[r][total]
    return x


def feasible_exact(system: HullSystem):
    """Exact test for a common point of all hulls.

    Returns ``(True, FeasibilityResult)`` with rational weights and witness,
    or ``(False, None)``.
    """
    hulls = [exact_array(h) for h in system.hulls]
    m = system.ambient_dim
    sizes = [h.shape[0] for h in hulls]
    starts = np.cumsum([0] + sizes)
    N = int(starts[-1])
    rows, rhs = [], []
    # sum_a w^j_a v^j_a - sum_a w^0_a v^0_a = 0 eliminates the free centre
    for j in range(1, len(hulls)):
        for c in range(m):
            row = [Fraction(0)] * N
            for a in range(sizes[j]):
                row[starts[j] + a] += hulls[j][a, c]
            for a in range(sizes[0]):
                row[a] -= hulls[0][a, c]
            rows.append(row)
            rhs.append(Fraction(0))
    for j in range(len(hulls)):
        row = [Fraction(0)] * N
        for a in range(sizes[j]):
            row[starts[j] + a] = Fraction(1)
        rows.append(row)
        rhs.append(Fraction(1))
    x = bland_phase_one(rows, rhs)
    if x is None:
        return False, None
    weights = [np.array(x[starts[j]:starts[j + 1]], dtype=object) for j in range(len(hulls))]
    nearest = np.array([w @ h for w, h in zip(weights, hulls)], dtype=object)
    p = nearest[0].copy()
    return True, FeasibilityResult(Fraction(0), p, weights, nearest)
