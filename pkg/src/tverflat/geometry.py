"""Points, subspaces and flats in two numeric modes.

Arrays of dtype ``object`` holding :class:`fractions.Fraction` entries are
*exact*; ``float64`` arrays are *float*. Every function here dispatches on
that distinction, so callers never pass a mode flag.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce

import numpy as np

from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import DimensionMismatch, RankDeficient

__all__ = [
    "to_fraction",
    "exact_array",
    "is_exact",
    "Subspace",
    "Flat",
    "orthonormalize",
    "span",
    "complement_basis",
    "project",
    "lift",
    "flat_from",
    "chart_retract",
    "exact_nullspace",
    "exact_solve",
    "exact_rank",
    "to_float_orthonormal",
    "projection_residual",
    "same_subspace",
    "subspace_distance",
]


# ---------------------------------------------------------------------------
# scalars


def to_fraction(value) -> Fraction:
    """Convert ``value`` to an exact rational.

    Strings may be ``"p/q"`` or decimal literals (``"0.1"`` is exactly 1/10);
    floats convert to their exact binary value.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (bool, np.bool_)):
        raise TypeError("booleans are not coordinates")
    if isinstance(value, (int, np.integer)):
        return Fraction(int(value))
    if isinstance(value, (float, np.floating)):
        if not math.isfinite(value):
            raise ValueError(f"non-finite coordinate {value!r}")
        return Fraction(float(value))
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot interpret {value!r} as a rational")


def exact_array(data) -> np.ndarray:
    """Object array of Fractions with the shape of ``data``."""
    arr = np.array(data, dtype=object)
    out = np.empty(arr.shape, dtype=object)
    for idx, v in np.ndenumerate(arr):
        out[idx] = to_fraction(v)
    return out


def is_exact(arr) -> bool:
    return isinstance(arr, np.ndarray) and arr.dtype == object


def _float_array(data) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("non-finite value in float-mode array")
    return arr


# ---------------------------------------------------------------------------
# exact elimination


def _rref(rows):
    """Reduced row echelon form over the rationals.

    Pivot columns are taken left to right; within a column the first row
    (top-down) with a nonzero entry is the pivot row. Returns the reduced
    rows and the list of pivot columns.
    """
    R = [list(r) for r in rows]
    nrows = len(R)
    ncols = len(R[0]) if nrows else 0
    pivots = []
    row = 0
    for col in range(ncols):
        if row >= nrows:
            break
        piv = next((r for r in range(row, nrows) if R[r][col] != 0), None)
        if piv is None:
            continue
        R[row], R[piv] = R[piv], R[row]
        inv = 1 / R[row][col]
        R[row] = [v * inv for v in R[row]]
        for r in range(nrows):
            if r != row and R[r][col] != 0:
                f = R[r][col]
                R[r] = [a - f * b for a, b in zip(R[r], R[row])]
        pivots.append(col)
        row += 1
    return R, pivots


def _primitive(vec):
    """Scale a rational vector to coprime integers, first nonzero positive."""
    dens = [v.denominator for v in vec if v != 0]
    lcm = reduce(lambda a, b: a * b // math.gcd(a, b), dens, 1)
    ints = [int(v * lcm) for v in vec]
    g = reduce(math.gcd, (abs(i) for i in ints), 0) or 1
    first = next(i for i in ints if i != 0)
    s = 1 if first > 0 else -1
    return [Fraction(s * i // g) for i in ints]


def exact_nullspace(M) -> list[list[Fraction]]:
    """Basis of the kernel of a rational matrix.

    One vector per non-pivot column of the RREF of ``M`` (in column order),
    each normalised to coprime integer entries whose first nonzero entry is
    positive. Output is a deterministic function of ``M``.
    """
    A = exact_array(M)
    if A.ndim != 2:
        raise DimensionMismatch("exact_nullspace expects a matrix")
    nrows, ncols = A.shape
    if nrows == 0:
        R, pivots = [], []
    else:
        R, pivots = _rref(A.tolist())
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for r, pc in enumerate(pivots):
            v[pc] = -R[r][f]
        basis.append(_primitive(v))
    return basis


def exact_rank(M) -> int:
    A = exact_array(M)
    if A.size == 0:
        return 0
    return len(_rref(A.tolist())[1])


def exact_solve(A, b) -> list[Fraction]:
    """Solve a square nonsingular rational system ``A x = b``."""
    A = exact_array(A)
    b = exact_array(b)
    n = A.shape[0]
    if A.shape != (n, n) or b.shape != (n,):
        raise DimensionMismatch("exact_solve expects square A and matching b")
    if n == 0:
        return []
    aug = [list(A[i]) + [b[i]] for i in range(n)]
    R, pivots = _rref(aug)
    if pivots != list(range(n)):
        raise RankDeficient("singular system")
    return [R[i][n] for i in range(n)]


# ---------------------------------------------------------------------------
# subspaces


@dataclass(frozen=True, eq=False)
class Subspace:
    """A linear subspace of R^d given by a d x m column basis.

    Float bases are orthonormal; exact bases need only be independent.
    Two ``Subspace`` objects are compared with :func:`same_subspace`, never
    by their bases.
    """

    basis: np.ndarray

    def __post_init__(self):
        B = self.basis
        if not isinstance(B, np.ndarray) or B.ndim != 2:
            raise DimensionMismatch("basis must be a 2-d array")
        B = B.copy()
        B.setflags(write=False)
        object.__setattr__(self, "basis", B)

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[0]

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @property
    def exact(self) -> bool:
        return is_exact(self.basis)

    def check(self, tol: Tolerances = DEFAULT_TOLERANCES) -> None:
        """Raise if the stored basis violates the mode invariant."""
        B = self.basis
        if self.exact:
            if exact_rank(B) != self.dim:
                raise RankDeficient("exact basis columns are dependent")
            return
        if not np.all(np.isfinite(B)):
            raise ValueError("non-finite basis entry")
        err = np.max(np.abs(B.T @ B - np.eye(self.dim)), initial=0.0)
        if err > tol.orthonormality:
            raise RankDeficient(f"basis not orthonormal (error {err:.3g})")

    @classmethod
    def full(cls, d: int, exact: bool = False) -> Subspace:
        if exact:
            return cls(exact_array(np.eye(d, dtype=int)))
        return cls(np.eye(d))

    def projector(self) -> np.ndarray:
        B = to_float_orthonormal(self).basis
        return B @ B.T


def _gram_schmidt(M: np.ndarray, tol: Tolerances) -> np.ndarray:
    """Orthonormalise the columns of ``M`` (modified Gram-Schmidt, twice)."""
    d, m = M.shape
    if m == 0:
        return np.zeros((d, 0))
    s = np.linalg.svd(M, compute_uv=False)
    if s[-1] == 0 or s[0] / s[-1] > tol.condition_number:
        raise RankDeficient(f"numerical rank below {m}")
    Q = np.array(M, dtype=float)
    for j in range(m):
        v = Q[:, j]
        for _ in range(2):
            for i in range(j):
                v = v - (Q[:, i] @ v) * Q[:, i]
        Q[:, j] = v / np.linalg.norm(v)
    return Q


def orthonormalize(vectors, tol: Tolerances = DEFAULT_TOLERANCES) -> Subspace:
    """Float orthonormal basis for the span of ``vectors`` (rows)."""
    V = _float_array(vectors)
    if V.ndim != 2:
        raise DimensionMismatch("expected a list of vectors")
    return Subspace(_gram_schmidt(V.T, tol))


def span(vectors) -> Subspace:
    """Exact subspace spanned by independent rational ``vectors`` (rows)."""
    V = exact_array(vectors)
    if V.ndim != 2:
        raise DimensionMismatch("expected a list of vectors")
    L = Subspace(V.T.copy())
    if exact_rank(L.basis) != L.dim:
        raise RankDeficient("vectors are linearly dependent")
    return L


def complement_basis(L: Subspace) -> Subspace:
    """Orthogonal complement of ``L`` in the same mode."""
    d = L.ambient_dim
    if L.exact:
        if L.dim == 0:
            return Subspace.full(d, exact=True)
        ker = exact_nullspace(L.basis.T)
        if not ker:
            return Subspace(np.empty((d, 0), dtype=object))
        return Subspace(exact_array(ker).T.copy())
    if L.dim == 0:
        return Subspace(np.eye(d))
    # the trailing left singular vectors span the complement
    U, _, _ = np.linalg.svd(L.basis, full_matrices=True)
    C = U[:, L.dim:]
    if C.shape[1]:
        C = _gram_schmidt(C - L.basis @ (L.basis.T @ C), DEFAULT_TOLERANCES)
    return Subspace(C)


def project(L: Subspace, x) -> np.ndarray:
    """Coordinates of the orthogonal projection of ``x`` in the basis of ``L``.

    ``x`` may be a single point (d,) or a stack of points (n, d).
    """
    B = L.basis
    exact = L.exact
    X = exact_array(x) if exact else _float_array(x)
    if X.shape[-1] != L.ambient_dim:
        raise DimensionMismatch(
            f"point of dimension {X.shape[-1]} vs ambient {L.ambient_dim}"
        )
    if not exact:
        return X @ B
    G = B.T @ B
    rhs = X @ B
    if X.ndim == 1:
        return np.array(exact_solve(G, rhs), dtype=object)
    return np.array([exact_solve(G, r) for r in rhs], dtype=object).reshape(
        X.shape[0], L.dim
    )


def lift(L: Subspace, coords) -> np.ndarray:
    """Point of R^d with coordinates ``coords`` in the basis of ``L``."""
    c = exact_array(coords) if L.exact else _float_array(coords)
    return L.basis @ c


def to_float_orthonormal(L: Subspace) -> Subspace:
    if not L.exact:
        return L
    B = np.array(L.basis, dtype=float)
    return Subspace(_gram_schmidt(B, DEFAULT_TOLERANCES))


def projection_residual(A: Subspace, B: Subspace) -> float:
    """Largest distance from a unit vector of one subspace to the other."""
    A = to_float_orthonormal(A)
    B = to_float_orthonormal(B)
    if A.ambient_dim != B.ambient_dim:
        raise DimensionMismatch("ambient dimensions differ")
    if A.dim != B.dim:
        return 1.0
    if A.dim == 0:
        return 0.0
    ra = A.basis - B.basis @ (B.basis.T @ A.basis)
    rb = B.basis - A.basis @ (A.basis.T @ B.basis)
    return float(max(np.linalg.norm(ra, 2), np.linalg.norm(rb, 2)))


def same_subspace(A: Subspace, B: Subspace, tol: Tolerances = DEFAULT_TOLERANCES) -> bool:
    return projection_residual(A, B) <= tol.subspace_equality


def subspace_distance(A: Subspace, B: Subspace) -> float:
    """Spectral norm of the difference of orthogonal projectors."""
    if A.ambient_dim != B.ambient_dim:
        raise DimensionMismatch("ambient dimensions differ")
    return float(np.linalg.norm(A.projector() - B.projector(), 2))


# ---------------------------------------------------------------------------
# flats


@dataclass(frozen=True, eq=False)
class Flat:
    """The affine flat ``{x : project(L, x) == anchor}``.

    ``L`` is the orthogonal complement of the flat's direction, so the flat
    has dimension ``d - dim(L)``.
    """

    direction_complement: Subspace
    anchor: np.ndarray

    @property
    def ambient_dim(self) -> int:
        return self.direction_complement.ambient_dim

    @property
    def dim(self) -> int:
        L = self.direction_complement
        return L.ambient_dim - L.dim

    @property
    def exact(self) -> bool:
        return self.direction_complement.exact and is_exact(self.anchor)

    def contains(self, x, tol: float = DEFAULT_TOLERANCES.certificate_residual) -> bool:
        c = project(self.direction_complement, x)
        if self.exact and is_exact(c):
            return bool(np.all(c == self.anchor))
        diff = np.asarray(c, dtype=float) - np.asarray(self.anchor, dtype=float)
        return float(np.linalg.norm(diff)) <= tol

    def point(self) -> np.ndarray:
        """The point of the flat closest to the origin."""
        return self.direction_complement.basis @ self.anchor


def flat_from(L: Subspace, p, k: int | None = None) -> Flat:
    """Flat of points whose projection onto ``L`` has coordinates ``p``."""
    if k is not None and L.dim != L.ambient_dim - k:
        raise DimensionMismatch(f"L must have dimension d - k = {L.ambient_dim - k}")
    anchor = exact_array(p) if L.exact else _float_array(p)
    if anchor.shape != (L.dim,):
        raise DimensionMismatch("anchor length must equal dim(L)")
    return Flat(L, anchor)


# ---------------------------------------------------------------------------
# Grassmannian chart


def chart_retract(L0: Subspace, T, C0: Subspace | None = None,
                  tol: Tolerances = DEFAULT_TOLERANCES) -> Subspace:
    """Point of the Grassmannian with chart coordinates ``T`` about ``L0``.

    ``T`` has shape (d - m, m) where m = dim(L0); the result spans
    ``B0 + C0 @ T`` with ``C0`` the complement basis of ``L0``.
    """
    L0 = to_float_orthonormal(L0)
    if C0 is None:
        C0 = complement_basis(L0)
    T = _float_array(T).reshape(C0.dim, L0.dim)
    return Subspace(_gram_schmidt(L0.basis + C0.basis @ T, tol))
