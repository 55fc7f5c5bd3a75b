"""Instance generators: the barycentre gadget, random and degenerate families."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .certificate import Certificate, Instance
from .errors import DegenerateSpec
from .geometry import Subspace, exact_array, exact_nullspace, exact_rank, flat_from, project

__all__ = [
    "GadgetSpec",
    "gen_gadget",
    "gen_random",
    "gen_degenerate",
    "DISTRIBUTIONS",
    "DEGENERACIES",
]

DISTRIBUTIONS = ("unit-cube", "gaussian")
DEGENERACIES = ("collinear-set", "repeated-point", "coplanar-all")

# random coordinates are multiples of this
_DYADIC = 2**20


@dataclass(frozen=True)
class GadgetSpec:
    """Parallel (d-k)-planes, each carrying a simplex and its barycentre.

    The planes are translates of the span W of the first ``d - k`` axes.
    ``offsets[i]`` (length d) places plane i; by default plane 0 passes
    through the origin and plane i >= 1 is shifted by the (d-k+i-1)-th axis.
    Simplex i is the standard simplex of W scaled by ``scale``, translated
    by ``offsets[i]`` and by ``shear * i`` along every W axis.
    """

    d: int
    k: int
    offsets: tuple | None = None
    scale: Fraction = Fraction(2)
    shear: Fraction = Fraction(1, 4)

    def plane_offsets(self):
        d, k = self.d, self.k
        m = d - k
        if self.offsets is not None:
            offs = [list(exact_array(o)) for o in self.offsets]
            if len(offs) != k + 1 or any(len(o) != d for o in offs):
                raise DegenerateSpec(f"need {k + 1} offsets of length {d}")
            return offs
        offs = [[Fraction(0)] * d for _ in range(k + 1)]
        for i in range(1, k + 1):
            offs[i][m + i - 1] = Fraction(1)
        return offs


def gen_gadget(spec: GadgetSpec) -> tuple[Instance, Certificate]:
    """Gadget instance and its known certificate, all in exact rationals.

    The only split of a simplex-plus-barycentre set with intersecting part
    hulls is {vertices} | {barycentre}, so the transversal is the flat
    through the k + 1 barycentres.
    """
    d, k = spec.d, spec.k
    if not 0 <= k <= d - 1:
        raise DegenerateSpec(f"need 0 <= k <= d - 1, got d={d}, k={k}")
    m = d - k
    scale = Fraction(spec.scale)
    shear = Fraction(spec.shear)
    if scale <= 0:
        raise DegenerateSpec("scale must be positive")
    offs = spec.plane_offsets()
    sets, bary = [], []
    for i, off in enumerate(offs):
        pts = []
        for j in range(m + 1):
            v = list(off)
            for c in range(m):
                v[c] += shear * i
            if j > 0:
                v[j - 1] += scale
            pts.append(v)
        b = [sum(p[c] for p in pts) / (m + 1) for c in range(d)]
        pts.append(b)
        sets.append(exact_array(pts))
        bary.append(b)
    diffs = [[bi[c] - bary[0][c] for c in range(d)] for bi in bary[1:]]
    if k > 0 and exact_rank(diffs) != k:
        raise DegenerateSpec("barycentres do not span a k-flat")
    W = [[Fraction(int(r == c)) for c in range(d)] for r in range(m)]
    if k > 0 and exact_rank(W + diffs) != d:
        raise DegenerateSpec("transversal direction meets the planes' direction")
    instance = Instance(d, k, tuple(sets))

    if k == 0:
        L = Subspace.full(d, exact=True)
    else:
        L = Subspace(exact_array(exact_nullspace(diffs)).T.copy())
    p = project(L, exact_array(bary[0]))
    parts = tuple((tuple(range(m + 1)), (m + 1,)) for _ in range(k + 1))
    w_vert = exact_array([Fraction(1, m + 1)] * (m + 1))
    weights = tuple((w_vert.copy(), exact_array([1])) for _ in range(k + 1))
    cert = Certificate(parts, flat_from(L, p), weights, residual=0.0,
                       meta={"strategy": "gadget"})
    return instance, cert


def _dyadic(values) -> np.ndarray:
    ints = np.rint(np.asarray(values) * _DYADIC).astype(np.int64)
    out = np.empty(ints.shape, dtype=object)
    for idx, v in np.ndenumerate(ints):
        out[idx] = Fraction(int(v), _DYADIC)
    return out


def gen_random(d: int, k: int, distribution: str = "unit-cube", seed: int = 0) -> Instance:
    """``k + 1`` sets of ``d - k + 2`` i.i.d. points with dyadic coordinates."""
    if not 0 <= k <= d - 1:
        raise ValueError(f"need 0 <= k <= d - 1, got d={d}, k={k}")
    rng = np.random.default_rng(seed)
    shape = (k + 1, d - k + 2, d)
    if distribution == "unit-cube":
        raw = rng.random(shape)
    elif distribution == "gaussian":
        raw = rng.standard_normal(shape)
    else:
        raise ValueError(f"unknown distribution {distribution!r}")
    coords = _dyadic(raw)
    return Instance(d, k, tuple(coords[i] for i in range(k + 1)))


def gen_degenerate(d: int, k: int, kind: str, seed: int = 0) -> Instance:
    """A random instance forced into one of :data:`DEGENERACIES`.

    ``collinear-set`` puts all of set 0 on one line; ``repeated-point``
    duplicates a point of set 0; ``coplanar-all`` puts every point on one
    affine hyperplane.
    """
    if not 0 <= k <= d - 1:
        raise ValueError(f"need 0 <= k <= d - 1, got d={d}, k={k}")
    rng = np.random.default_rng([seed, DEGENERACIES.index(kind) if kind in DEGENERACIES else 99])
    n = d - k + 2
    raw = rng.random((k + 1, n, d))
    if kind == "repeated-point":
        raw[0, 1] = raw[0, 0]
    elif kind == "collinear-set":
        pass  # built exactly below
    elif kind == "coplanar-all":
        # hyperplane through a random point spanned by d - 1 random directions
        base = rng.random(d)
        dirs = rng.standard_normal((d - 1, d))
        coef = rng.random((k + 1, n, d - 1))
        raw = base + coef @ dirs
    else:
        raise ValueError(f"unknown degeneracy {kind!r}")
    coords = _dyadic(raw)
    if kind == "repeated-point":
        coords[0, 1] = coords[0, 0]
    elif kind == "collinear-set":
        # rounding would break collinearity; rebuild exactly on the line
        a = _dyadic(raw[0, 0])
        b = _dyadic(raw[0, 1]) - a
        ts = [Fraction(int(v), 64) for v in rng.choice(np.arange(-64, 128), size=n, replace=False)]
        coords[0] = np.array([[a[c] + t * b[c] for c in range(d)] for t in ts], dtype=object)
    elif kind == "coplanar-all":
        base = _dyadic(base)
        dirs = _dyadic(dirs)
        coef = _dyadic(coef)
        coords = base + coef @ dirs
    return Instance(d, k, tuple(coords[i] for i in range(k + 1)))
