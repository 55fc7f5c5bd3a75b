"""Radon partitions from affine dependences, exact or in floating point."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import DimensionMismatch, IllConditioned
from .geometry import exact_array, exact_nullspace, is_exact

__all__ = ["AffineDependence", "RadonResult", "affine_dependence", "radon_partition"]


@dataclass(frozen=True, eq=False)
class AffineDependence:
    """Coefficients with sum 0 and weighted point sum 0.

    Normalised so the absolute values sum to 1 and the first nonzero
    coefficient is positive.
    """

    coefficients: np.ndarray

    @property
    def exact(self) -> bool:
        return is_exact(self.coefficients)


@dataclass(frozen=True, eq=False)
class RadonResult:
    part_pos: tuple[int, ...]
    part_neg: tuple[int, ...]
    zeros: tuple[int, ...]
    point: np.ndarray
    weights_pos: np.ndarray
    weights_neg: np.ndarray
    dependence: AffineDependence

    @property
    def parts(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        """The two parts, the one with the smaller first index first."""
        a, b = self.part_pos, self.part_neg
        return (a, b) if a[0] < b[0] else (b, a)


def _as_points(points):
    if is_exact(points):
        X = points
    elif isinstance(points, np.ndarray) and points.dtype.kind == "f":
        X = points
    else:
        # all-float lists stay float; anything else (ints, Fractions, strings) is exact
        arr = np.array(points, dtype=object)
        if arr.size and all(isinstance(v, (float, np.floating)) for v in arr.ravel()):
            X = arr.astype(float)
        else:
            X = exact_array(arr)
    if X.ndim != 2:
        raise DimensionMismatch("expected an (n, m) array of points")
    n, m = X.shape
    if n < m + 2:
        raise DimensionMismatch(f"need at least m + 2 = {m + 2} points, got {n}")
    return X


def _normalise(lam):
    total = sum(abs(v) for v in lam)
    lam = [v / total for v in lam]
    first = next(v for v in lam if v != 0)
    if first < 0:
        lam = [-v for v in lam]
    return lam


def affine_dependence(points, tol: Tolerances = DEFAULT_TOLERANCES) -> AffineDependence:
    """A nonzero affine dependence of ``n >= m + 2`` points in R^m.

    Exact inputs (object arrays of Fractions, or integer/rational lists) get the
    first kernel vector of the lifted matrix from :func:`exact_nullspace`.
    Float inputs use the smallest right singular vector and raise
    :class:`IllConditioned` unless the kernel is numerically one-dimensional.
    """
    X = _as_points(points)
    n, m = X.shape
    if is_exact(X):
        lifted = np.vstack([exact_array([[1] * n]), X.T])
        lam = _normalise(exact_nullspace(lifted)[0])
        return AffineDependence(np.array(lam, dtype=object))

    if n != m + 2:
        raise IllConditioned("float dependence needs exactly m + 2 points")
    # affine dependences are invariant under affine maps; normalise first
    Y = X - X.mean(axis=0)
    scale = np.abs(Y).max()
    if scale == 0.0:
        raise IllConditioned("all points coincide")
    lifted = np.vstack([np.ones(n), (Y / scale).T])
    _, s, Vt = np.linalg.svd(lifted)
    if s[-1] <= tol.kernel_ambiguity * s[0]:
        raise IllConditioned(
            f"kernel numerically ambiguous (singular value ratio {s[-1] / s[0]:.2e})"
        )
    lam = Vt[-1]
    lam = lam / np.abs(lam).sum()
    nz = np.flatnonzero(np.abs(lam) > tol.zero_coefficient)
    if lam[nz[0]] < 0:
        lam = -lam
    return AffineDependence(lam)


def radon_partition(points, tol: Tolerances = DEFAULT_TOLERANCES) -> RadonResult:
    """Split points by the sign of an affine dependence.

    Indices with a zero coefficient go to neither part; any superset of
    either part still contains the Radon point.
    """
    X = _as_points(points)
    dep = affine_dependence(X, tol)
    lam = dep.coefficients
    if dep.exact:
        pos = tuple(i for i, v in enumerate(lam) if v > 0)
        neg = tuple(i for i, v in enumerate(lam) if v < 0)
    else:
        pos = tuple(int(i) for i in np.flatnonzero(lam > tol.zero_coefficient))
        neg = tuple(int(i) for i in np.flatnonzero(lam < -tol.zero_coefficient))
    zeros = tuple(i for i in range(len(lam)) if i not in pos and i not in neg)
    wp = lam[list(pos)]
    wn = -lam[list(neg)]
    wp = wp / wp.sum()
    wn = wn / wn.sum()
    point = wp @ X[list(pos)]
    return RadonResult(pos, neg, zeros, point, wp, wn, dep)
