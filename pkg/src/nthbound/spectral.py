"""Symmetrized automorphism operators and their spectra.

For an isometry ``A`` of the height pairing, ``S = (A + A^dagger) / 2`` is
self-adjoint, and ``<v, S v> = <v, A v>`` for every ``v``.  Its smallest
eigenvalue is the worst cosine by which ``A`` turns a vector.  Spectra are
computed on the congruent symmetric matrix ``L^T S L^-T`` (``gram = L L^T``),
never on ``S`` itself, which is not symmetric in lattice coordinates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    InvalidMeasure,
    NoConvergence,
    NoNonIdentityAction,
    SupportIncludesIdentity,
    UnknownLabel,
)
from .lattice import (
    IsometryAction,
    QuadraticLattice,
    adjoint,
    exact_isometry,
    integer_inverse,
    orthonormal_form,
)

JACOBI_TOL = 1e-12
JACOBI_MAX_SWEEPS = 100
MEASURE_TOL = 1e-12


def eigen_sym(m, tol: float = JACOBI_TOL, max_sweeps: int = JACOBI_MAX_SWEEPS):
    """Eigen-decomposition of a real symmetric matrix by cyclic Jacobi.

    Sweeps over all pairs ``p < q`` until the off-diagonal Frobenius norm
    drops to ``tol * (1 + ||M||_F)``.

    Returns
    -------
    values : (n,) ndarray
        Eigenvalues in ascending order.
    vectors : (n, n) ndarray
        Orthonormal eigenvectors as columns, matching ``values``.
    """
    a = np.array(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    n = a.shape[0]
    # plain float lists: for the tiny matrices here this beats numpy slicing
    a = ((a + a.T) / 2.0).tolist()
    v = [[1.0 if i == j else 0.0 for j in range(n)] for i in range(n)]
    target = tol * (1.0 + math.sqrt(sum(x * x for row in a for x in row)))

    def off():
        return math.sqrt(sum(a[i][j] ** 2 for i in range(n) for j in range(n) if i != j))

    for _ in range(max_sweeps):
        if off() <= target:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p][q]
                if apq == 0.0:
                    continue
                theta = (a[q][q] - a[p][p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                for k in range(n):
                    akp, akq = a[k][p], a[k][q]
                    a[k][p] = c * akp - s * akq
                    a[k][q] = s * akp + c * akq
                rp, rq = a[p], a[q]
                for k in range(n):
                    apk, aqk = rp[k], rq[k]
                    rp[k] = c * apk - s * aqk
                    rq[k] = s * apk + c * aqk
                a[p][q] = a[q][p] = 0.0
                for k in range(n):
                    vp, vq = v[k][p], v[k][q]
                    v[k][p] = c * vp - s * vq
                    v[k][q] = s * vp + c * vq
    else:
        if off() > target:
            raise NoConvergence(f"Jacobi did not converge in {max_sweeps} sweeps", residual=off())
    values = np.array([a[i][i] for i in range(n)])
    order = np.argsort(values, kind="stable")
    return values[order], np.array(v).reshape(n, n)[:, order]


@dataclass(frozen=True, eq=False)
class SymmetrizedOperator:
    """Self-adjoint operator on V, in lattice coordinates and in an orthonormal frame."""

    label: str
    op: np.ndarray
    sym_form: np.ndarray
    spectrum: np.ndarray
    eigenvectors: np.ndarray
    group_identity: bool = False
    involution_residual: float | None = None

    @property
    def lambda_min(self) -> float:
        return float(self.spectrum[0])

    @property
    def min_eigenvector(self) -> np.ndarray:
        """Unit eigenvector for ``lambda_min`` in the orthonormal frame (first one on ties)."""
        return self.eigenvectors[:, 0]


def _frozen(a):
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


def _from_sym_form(label, op, sym_form, **extra):
    sym_form = (sym_form + sym_form.T) / 2.0
    values, vectors = eigen_sym(sym_form)
    return SymmetrizedOperator(
        label=label,
        op=_frozen(op),
        sym_form=_frozen(sym_form),
        spectrum=_frozen(values),
        eigenvectors=_frozen(vectors),
        **extra,
    )


def from_operator(lat: QuadraticLattice, t, label: str = "") -> SymmetrizedOperator:
    """Wrap an operator already self-adjoint for the pairing of ``lat``."""
    t = np.asarray(t, dtype=float)
    return _from_sym_form(label, t, orthonormal_form(lat, t))


def symmetrize(lat: QuadraticLattice, action: IsometryAction) -> SymmetrizedOperator:
    """``S = (A + A^dagger) / 2`` for an accepted isometry.

    When ``A`` preserves the Gram matrix to rounding, ``A^dagger`` is taken
    as the integer inverse of ``A``; otherwise it is ``H^-1 A^T H``.
    For an involution (``A^2 = I``) ``S`` should equal ``A``; the deviation
    ``max|S - A|`` is recorded as ``involution_residual``.  It is zero for
    exact isometries and of the order of the Gram noise otherwise.
    """
    a = action.matrix.astype(float)
    # an exact isometry has A^dagger = A^-1, which is an integer matrix;
    # the Cholesky route would lose digits in proportion to cond(H)
    a_inv = integer_inverse(action.matrix) if exact_isometry(lat, action) else None
    adj = a_inv.astype(float) if a_inv is not None else adjoint(lat, a)
    s = 0.5 * (a + adj)
    inv = None
    r = lat.rank
    if np.array_equal(action.matrix @ action.matrix, np.eye(r, dtype=action.matrix.dtype)):
        inv = float(np.max(np.abs(s - a)))
    return _from_sym_form(
        action.name, s, orthonormal_form(lat, s),
        group_identity=action.group_identity, involution_residual=inv,
    )


@dataclass(frozen=True)
class ProbabilityMeasure:
    """Finite probability measure keyed by automorphism label."""

    weights: Mapping[str, float]

    def __post_init__(self):
        w = {str(k): float(v) for k, v in self.weights.items()}
        for k, x in w.items():
            if not (-MEASURE_TOL <= x <= 1.0 + MEASURE_TOL) or math.isnan(x):
                raise InvalidMeasure(f"weight of {k!r} is {x}, outside [0, 1]")
        total = math.fsum(w.values())
        if abs(total - 1.0) > MEASURE_TOL:
            raise InvalidMeasure(f"weights sum to {total!r}, not 1")
        object.__setattr__(self, "weights", w)

    @classmethod
    def dirac(cls, label: str) -> "ProbabilityMeasure":
        return cls({label: 1.0})

    @classmethod
    def uniform(cls, labels: Sequence[str]) -> "ProbabilityMeasure":
        labels = list(labels)
        if not labels:
            raise InvalidMeasure("uniform measure needs at least one label")
        return cls.from_vector(labels, np.full(len(labels), 1.0 / len(labels)))

    @classmethod
    def from_vector(cls, labels: Sequence[str], x) -> "ProbabilityMeasure":
        """Build from a point of the simplex; renormalizes away rounding drift."""
        x = np.clip(np.asarray(x, dtype=float), 0.0, None)
        x = x / math.fsum(x)
        return cls(dict(zip(labels, x.tolist())))

    def support(self):
        return [k for k, x in self.weights.items() if x > 0.0]


def average(ops: Sequence[SymmetrizedOperator], mu: ProbabilityMeasure) -> SymmetrizedOperator:
    """``S_mu = sum mu(sigma) S_sigma``; its ``lambda_min`` is ``beta_mu``."""
    by_label = {}
    for o in ops:
        by_label.setdefault(o.label, o)
    shape = None
    op = sym = None
    for label in mu.support():
        if label not in by_label:
            raise UnknownLabel(f"measure puts weight on unknown automorphism {label!r}")
        o = by_label[label]
        if o.group_identity:
            raise SupportIncludesIdentity(f"measure puts weight on the identity automorphism {label!r}")
        if shape is None:
            shape = o.op.shape
            op = np.zeros(shape)
            sym = np.zeros(shape)
        elif o.op.shape != shape:
            raise DimensionMismatch("operators act on lattices of different rank")
        w = mu.weights[label]
        op = op + w * o.op
        sym = sym + w * o.sym_form
    if op is None:
        raise InvalidMeasure("measure has empty support")
    return _from_sym_form("mu", op, sym)


def alpha_h(lat: QuadraticLattice, actions: Sequence[IsometryAction]):
    """Best Dirac value ``max lambda_min(S_sigma)`` over non-identity automorphisms.

    Returns ``(alpha, label)``; ties go to the first label in input order.
    """
    best = None
    for a in actions:
        if a.group_identity:
            continue
        value = symmetrize(lat, a).lambda_min
        if best is None or value > best[0]:
            best = (value, a.name)
    if best is None:
        raise NoNonIdentityAction("no non-identity automorphism supplied")
    return best
