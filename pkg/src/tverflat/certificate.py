"""Instances, certificates and the independent certificate checker."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction

import numpy as np

from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import InvalidInstance, MalformedCertificate, RankDeficient
from .geometry import (
    Flat,
    Subspace,
    exact_array,
    exact_rank,
    exact_solve,
    flat_from,
    is_exact,
    project,
)
from .radon import radon_partition

__all__ = [
    "Instance",
    "Certificate",
    "VerifyReport",
    "canonical_parts",
    "certificate_at",
    "verify",
]


@dataclass(frozen=True, eq=False)
class Instance:
    """``k + 1`` point sets of ``d - k + 2`` points each in R^d."""

    d: int
    k: int
    sets: tuple

    def __post_init__(self):
        d, k = self.d, self.k
        if not (isinstance(d, int) and isinstance(k, int)) or d < 1 or not 0 <= k <= d - 1:
            raise InvalidInstance(f"need 0 <= k <= d - 1, got d={d}, k={k}")
        sets = []
        for data in self.sets:
            arr = data if isinstance(data, np.ndarray) else exact_array(data)
            if arr.ndim != 2 or arr.shape != (d - k + 2, d):
                raise InvalidInstance(
                    f"each set needs {d - k + 2} points in R^{d}, got shape {arr.shape}"
                )
            if arr.dtype != object and not np.all(np.isfinite(arr)):
                raise InvalidInstance("non-finite coordinate")
            arr = arr.copy()
            arr.setflags(write=False)
            sets.append(arr)
        if len(sets) != k + 1:
            raise InvalidInstance(f"need k + 1 = {k + 1} sets, got {len(sets)}")
        object.__setattr__(self, "sets", tuple(sets))

    @property
    def m(self) -> int:
        """Dimension of the direction complement L."""
        return self.d - self.k

    @property
    def exact(self) -> bool:
        return all(is_exact(s) for s in self.sets)

    def as_float(self) -> Instance:
        return Instance(self.d, self.k, tuple(np.asarray(s, dtype=float) for s in self.sets))

    def transformed(self, A, t) -> Instance:
        """Image under ``x -> A x + t`` (float)."""
        A = np.asarray(A, dtype=float)
        t = np.asarray(t, dtype=float)
        return Instance(
            self.d, self.k, tuple(np.asarray(s, dtype=float) @ A.T + t for s in self.sets)
        )


def canonical_parts(a, b):
    """Order two index sets so the one holding the smallest index comes first."""
    a, b = tuple(sorted(a)), tuple(sorted(b))
    return (a, b) if a[0] < b[0] else (b, a)


@dataclass(frozen=True, eq=False)
class Certificate:
    """A flat meeting both part hulls of every set, with convex weights.

    ``weights[i][j]`` lists the weights of the points ``bipartitions[i][j]``
    (in that order) whose projected combination equals ``flat.anchor``.
    """

    bipartitions: tuple
    flat: Flat
    weights: tuple
    residual: float = float("nan")
    meta: dict = field(default_factory=dict)

    @property
    def common_point(self) -> np.ndarray:
        return self.flat.anchor

    @property
    def L(self) -> Subspace:
        return self.flat.direction_complement

    @property
    def exact(self) -> bool:
        return self.flat.exact and all(is_exact(w) for pair in self.weights for w in pair)

    def covers_all(self, n: int) -> bool:
        """True when every set is fully partitioned (no omitted indices)."""
        return all(len(a) + len(b) == n for a, b in self.bipartitions)

    def completed(self, n: int) -> Certificate:
        """Assign omitted indices to the first part with weight zero."""
        parts, weights = [], []
        for (a, b), (wa, wb) in zip(self.bipartitions, self.weights):
            missing = [x for x in range(n) if x not in a and x not in b]
            zero = Fraction(0) if is_exact(wa) else 0.0
            pairs = sorted(list(zip(a, wa)) + [(x, zero) for x in missing])
            na = tuple(x for x, _ in pairs)
            nwa = np.array([w for _, w in pairs], dtype=wa.dtype)
            parts.append((na, b))
            weights.append((nwa, wb))
        return replace(self, bipartitions=tuple(parts), weights=tuple(weights))


def certificate_at(instance: Instance, L: Subspace, tol: Tolerances = DEFAULT_TOLERANCES,
                   meta: dict | None = None) -> Certificate:
    """Certificate read off the projected Radon partitions at ``L``.

    The common point is the mean of the projected Radon points; its residual
    is filled in by :func:`verify`.
    """
    parts, weights, points = [], [], []
    for S in instance.sets:
        Y = project(L, S)
        R = radon_partition(Y, tol)
        pa, pb = canonical_parts(R.part_pos, R.part_neg)
        wmap = dict(zip(R.part_pos, R.weights_pos))
        wmap.update(zip(R.part_neg, R.weights_neg))
        parts.append((pa, pb))
        wa = np.array([wmap[i] for i in pa], dtype=R.weights_pos.dtype)
        wb = np.array([wmap[i] for i in pb], dtype=R.weights_pos.dtype)
        weights.append((wa, wb))
        points.append(R.point)
    P = np.array(points, dtype=object if L.exact and instance.exact else float)
    p = P.sum(axis=0) / len(points)
    cert = Certificate(tuple(parts), flat_from(L, p), tuple(weights), meta=dict(meta or {}))
    rep = verify(instance, cert, tol.certificate_residual)
    return replace(cert, residual=rep.residual)


@dataclass(frozen=True)
class VerifyReport:
    accepted: bool
    exact: bool
    residual: float
    per_hull: tuple
    tol: float
    notes: tuple = ()

    @property
    def mode(self) -> str:
        return "exact" if self.exact else "approx"

    def lines(self):
        yield f"verdict: {'ACCEPT' if self.accepted else 'REJECT'}"
        yield f"mode: {self.mode}"
        yield f"residual: {self.residual:.6e}"
        yield f"tolerance: {self.tol:.6e}"
        for note in self.notes:
            yield f"note: {note}"


# float weights written to text are only nearly convex
_WEIGHT_SLACK = 1e-12
_SUM_SLACK = 1e-9


def _convex_exact(w):
    """Clamp tiny negatives and rescale to sum 1; report whether anything changed."""
    w = exact_array(w)
    if all(v >= 0 for v in w) and sum(w) == 1:
        return w, False
    w = np.array([max(v, 0) for v in w], dtype=object)
    return w / sum(w), True


def _structure_problems(instance: Instance, cert: Certificate, exact: bool,
                        tol: Tolerances) -> dict:
    problems = {}
    n = instance.m + 2
    if len(cert.bipartitions) != instance.k + 1:
        problems["bipartitions"] = f"expected {instance.k + 1} entries"
    if len(cert.weights) != len(cert.bipartitions):
        problems["weights"] = "one weight pair per bipartition required"
    L = cert.L
    if L.ambient_dim != instance.d or L.dim != instance.m:
        problems["flat.L"] = f"must be a {instance.m}-dim subspace of R^{instance.d}"
    elif exact or L.exact:
        if exact_rank(exact_array(L.basis)) != L.dim:
            problems["flat.L"] = "basis columns are linearly dependent"
    else:
        try:
            L.check(tol)
        except (RankDeficient, ValueError) as err:
            problems["flat.L"] = str(err)
    if len(cert.flat.anchor) != L.dim:
        problems["flat.anchor"] = "length must equal dim(L)"
    for i, parts in enumerate(cert.bipartitions):
        if len(parts) != 2:
            problems[f"bipartitions[{i}]"] = "need exactly two parts"
            continue
        a, b = parts
        if not a or not b:
            problems[f"bipartitions[{i}]"] = "parts must be nonempty"
        if set(a) & set(b):
            problems[f"bipartitions[{i}]"] = "parts must be disjoint"
        if len(set(a)) != len(a) or len(set(b)) != len(b):
            problems[f"bipartitions[{i}]"] = "repeated index"
        if any(not (isinstance(x, (int, np.integer)) and 0 <= x < n) for x in (*a, *b)):
            problems[f"bipartitions[{i}]"] = f"indices must lie in 0..{n - 1}"
        if i >= len(cert.weights):
            continue
        for j, (part, w) in enumerate(zip(parts, cert.weights[i])):
            key = f"weights[{i}][{j}]"
            if len(w) != len(part):
                problems[key] = "one weight per index required"
                continue
            wf = np.asarray(w, dtype=float)
            if np.any(wf < -_WEIGHT_SLACK) or not np.all(np.isfinite(wf)):
                problems[key] = f"negative weight (min {wf.min():.3g})"
            elif abs(wf.sum() - 1.0) > _SUM_SLACK:
                problems[key] = f"weights sum to {wf.sum():.12g}"
    return problems


def verify(instance: Instance, cert: Certificate,
           tol: float = DEFAULT_TOLERANCES.certificate_residual,
           exact: bool | None = None,
           tolerances: Tolerances = DEFAULT_TOLERANCES) -> VerifyReport:
    """Recompute a certificate from the raw points and judge it.

    With ``exact=None`` rational arithmetic is used iff the instance and all
    certificate fields are rational; ``exact=True`` converts floats to their
    exact rational values first. In exact arithmetic a residual of exactly
    zero is reported as exact acceptance. Raises :class:`MalformedCertificate`
    on structural defects.
    """
    if exact is None:
        exact = instance.exact and cert.exact
    problems = _structure_problems(instance, cert, exact, tolerances)
    if problems:
        raise MalformedCertificate(problems)

    L = cert.L
    notes = []
    if exact:
        B = exact_array(L.basis)
        G = B.T @ B
        p = exact_array(cert.flat.anchor)
        sets = [exact_array(S) for S in instance.sets]
        zero_all, renormalised = True, False
        per = []
        for S, parts, wpair in zip(sets, cert.bipartitions, cert.weights):
            for part, w in zip(parts, wpair):
                w, fixed = _convex_exact(w)
                renormalised |= fixed
                x = w @ S[list(part)]
                c = np.array(exact_solve(G, B.T @ x), dtype=object)
                diff = c - p
                sq = diff @ G @ diff
                zero_all &= bool(sq == 0)
                per.append(float(np.sqrt(float(sq))))
        residual = 0.0 if zero_all else max(per)
        accepted = zero_all or residual <= tol
        if renormalised:
            notes.append("weights renormalised to an exact convex combination")
        if not zero_all:
            notes.append("exact arithmetic, nonzero residual")
        # exact acceptance needs the certificate itself to be exactly right
        exact_ok = zero_all and not renormalised
        return VerifyReport(accepted, exact_ok, residual, tuple(per), tol, tuple(notes))

    B = np.asarray(L.basis, dtype=float)
    p = np.asarray(cert.flat.anchor, dtype=float)
    per = []
    for S, parts, wpair in zip(instance.sets, cert.bipartitions, cert.weights):
        S = np.asarray(S, dtype=float)
        for part, w in zip(parts, wpair):
            x = np.asarray(w, dtype=float) @ S[list(part)]
            per.append(float(np.linalg.norm(x @ B - p)))
    residual = max(per)
    return VerifyReport(residual <= tol, False, residual, tuple(per), tol)
