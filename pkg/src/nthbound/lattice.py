"""Free Mordell-Weil lattice with its canonical height pairing.

A lattice is stored by the Gram matrix of a fixed basis ``G_1..G_r``.
Vectors are integer (or real) coordinate arrays in that basis, so the
height of ``v`` is ``v @ gram @ v``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.linalg import cho_solve, solve_triangular

from .errors import (
    DimensionMismatch,
    NoConvergence,
    NotIsometry,
    NotPositiveDefinite,
    NotSymmetric,
    NotUnimodular,
    RankNotTwo,
)

PD_TOL = 1e-10
SYM_TOL = 5e-3
ISO_TOL = 1e-6


def _frozen(a):
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class QuadraticLattice:
    """Positive-definite Gram matrix together with its Cholesky factor.

    Build instances with :func:`validate_lattice`; the constructor does no
    checking of its own.
    """

    gram: np.ndarray
    chol: np.ndarray
    asymmetry: float = 0.0

    @property
    def rank(self) -> int:
        return self.gram.shape[0]

    def norm(self, v) -> float:
        """Canonical height of ``v``."""
        return pair(self, v, v)


@dataclass(frozen=True, eq=False)
class IsometryAction:
    """Integer matrix of an automorphism's pushforward on the lattice basis.

    ``group_identity`` marks the identity element of the automorphism group.
    It is distinct from ``is_identity``: a nontrivial automorphism may act
    as the identity matrix, and that is exactly the kernel case.
    """

    name: str
    matrix: np.ndarray
    is_identity: bool
    residual: float = 0.0
    group_identity: bool = False


def validate_lattice(gram, pd_tol: float = PD_TOL, sym_tol: float = SYM_TOL) -> QuadraticLattice:
    """Symmetrize ``gram``, check positive definiteness, cache the factor.

    The asymmetry residual ``max|M - M^T|`` is tolerated up to
    ``sym_tol * (1 + max|M|)`` and recorded on the result.
    """
    if pd_tol <= 0:
        raise ValueError("pd_tol must be positive")
    m = np.asarray(gram, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise DimensionMismatch(f"Gram matrix must be square and nonempty, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise NotPositiveDefinite("Gram matrix has non-finite entries")
    asym = float(np.max(np.abs(m - m.T)))
    scale = 1.0 + float(np.max(np.abs(m)))
    if asym > sym_tol * scale:
        raise NotSymmetric(f"Gram asymmetry {asym:.3g} exceeds {sym_tol:g} * {scale:.3g}")
    sym = (m + m.T) / 2.0
    try:
        chol = np.linalg.cholesky(sym)
    except np.linalg.LinAlgError:
        raise NotPositiveDefinite("Cholesky factorization failed: Gram matrix is not positive definite") from None
    pivots = np.diag(chol)
    bad = np.flatnonzero(pivots <= pd_tol)
    if bad.size:
        i = int(bad[0])
        raise NotPositiveDefinite(f"Cholesky pivot {i} is {pivots[i]:.3g} <= pd_tol={pd_tol:g}")
    return QuadraticLattice(gram=_frozen(sym), chol=_frozen(chol), asymmetry=asym)


def _vec(lat, v):
    v = np.asarray(v, dtype=float)
    if v.shape != (lat.rank,):
        raise DimensionMismatch(f"expected a vector of length {lat.rank}, got shape {v.shape}")
    return v


def pair(lat: QuadraticLattice, u, v) -> float:
    """Height pairing ``u^T gram v``."""
    return float(_vec(lat, u) @ lat.gram @ _vec(lat, v))


def _square(lat, a):
    a = np.asarray(a, dtype=float)
    if a.shape != (lat.rank, lat.rank):
        raise DimensionMismatch(f"expected a {lat.rank}x{lat.rank} matrix, got shape {a.shape}")
    return a


def adjoint(lat: QuadraticLattice, a) -> np.ndarray:
    """Adjoint of ``a`` for the height pairing: ``gram^-1 a^T gram``."""
    a = _square(lat, a)
    return cho_solve((lat.chol, True), a.T @ lat.gram)


def orthonormal_form(lat: QuadraticLattice, t) -> np.ndarray:
    """Matrix of ``t`` in an orthonormal frame, ``L^T t L^-T``.

    Symmetric exactly when ``t`` is self-adjoint for the pairing.
    """
    t = _square(lat, t)
    left = lat.chol.T @ t
    # (left @ L^-T)^T = L^-1 @ left^T
    return solve_triangular(lat.chol, left.T, lower=True).T


def _integer_matrix(a, r):
    arr = np.asarray(a)
    if arr.shape != (r, r):
        raise DimensionMismatch(f"expected a {r}x{r} matrix, got shape {arr.shape}")
    if arr.dtype.kind in "iu":
        return arr.astype(np.int64)
    f = arr.astype(float)
    if not np.all(np.isfinite(f)) or not np.array_equal(f, np.round(f)):
        raise NotUnimodular("automorphism matrix must have integer entries")
    return np.round(f).astype(np.int64)


def _int_det(m) -> int:
    # Bareiss fraction-free elimination; exact on Python ints.
    a = [[int(x) for x in row] for row in m]
    n = len(a)
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def check_isometry(
    lat: QuadraticLattice,
    a,
    iso_tol: float = ISO_TOL,
    name: str = "",
    group_identity: bool = False,
) -> IsometryAction:
    """Accept ``a`` iff it is unimodular and preserves the pairing.

    The residual ``max|A^T H A - H|`` must not exceed
    ``iso_tol * (1 + max|H|)``.
    """
    m = _integer_matrix(a, lat.rank)
    if abs(_int_det(m)) != 1:
        raise NotUnimodular(f"automorphism {name!r}: determinant is not +-1")
    mf = m.astype(float)
    residual = float(np.max(np.abs(mf.T @ lat.gram @ mf - lat.gram)))
    limit = iso_tol * (1.0 + float(np.max(np.abs(lat.gram))))
    if residual > limit:
        raise NotIsometry(f"automorphism {name!r}: isometry residual {residual:.3g} exceeds {limit:.3g}")
    return IsometryAction(
        name=name,
        matrix=_frozen(m),
        is_identity=bool(np.array_equal(m, np.eye(lat.rank, dtype=np.int64))),
        residual=residual,
        group_identity=group_identity,
    )


def exact_isometry(lat: QuadraticLattice, action: IsometryAction) -> bool:
    """Whether ``action.residual`` is at the level of rounding in ``A^T H A``."""
    a = np.abs(action.matrix.astype(float))
    row = float(np.max(a.sum(axis=1)))
    floor = 4.0 * lat.rank * np.finfo(float).eps * row * row * float(np.max(np.abs(lat.gram)))
    return action.residual <= floor


def integer_inverse(m):
    """Exact inverse of a unimodular integer matrix, or ``None`` if it cannot be certified."""
    m = np.asarray(m, dtype=np.int64)
    inv = np.round(np.linalg.inv(m.astype(float))).astype(np.int64)
    if np.array_equal(m @ inv, np.eye(m.shape[0], dtype=np.int64)):
        return inv
    return None


def compose(lat: QuadraticLattice, a: IsometryAction, b: IsometryAction, iso_tol: float = ISO_TOL) -> IsometryAction:
    """Isometry ``a . b`` (apply ``b`` first)."""
    return check_isometry(lat, a.matrix @ b.matrix, iso_tol, name=f"{a.name}*{b.name}")


def lagrange_reduce(lat: QuadraticLattice, max_iter: int = 10_000):
    """Lagrange-Gauss reduction of a rank-2 lattice.

    Returns ``(reduced, U)`` with ``reduced.gram == U^T gram U`` and
    ``2|H12| <= H11 <= H22``.  The sign of ``H12`` is left as found.

    The stored float entries are exact binary rationals, so the reduction
    runs in exact rational arithmetic and rounds once at the end.  Rounding
    is monotone, hence the inequalities survive it, and skewed input bases
    cost no accuracy in the reduced form.
    """
    if lat.rank != 2:
        raise RankNotTwo(f"Lagrange reduction needs rank 2, got {lat.rank}")
    a, b, c = (Fraction(float(lat.gram[i, j])) for i, j in ((0, 0), (0, 1), (1, 1)))
    u = [[1, 0], [0, 1]]  # columns are the current basis vectors
    for _ in range(max_iter):
        if a > c:
            a, c = c, a
            u = [[u[0][1], u[0][0]], [u[1][1], u[1][0]]]
            continue
        if 2 * abs(b) > a:
            q = math.floor(b / a + Fraction(1, 2))
            c = c - 2 * q * b + q * q * a
            b = b - q * a
            u = [[u[0][0], u[0][1] - q * u[0][0]], [u[1][0], u[1][1] - q * u[1][0]]]
            continue
        g = np.array([[float(a), float(b)], [float(b), float(c)]])
        reduced = QuadraticLattice(gram=_frozen(g), chol=_frozen(np.linalg.cholesky(g)), asymmetry=lat.asymmetry)
        return reduced, _frozen(np.array(u, dtype=np.int64))
    raise NoConvergence("Lagrange reduction did not terminate", residual=None)
