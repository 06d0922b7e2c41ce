"""All lattice vectors of height at most ``B`` (Fincke-Pohst).

With ``gram = L L^T`` the height of ``v`` is ``||L^T v||^2``.  Since
``L^T`` is upper triangular, coordinates are fixed from the last one
backwards, each confined to an interval determined by the height budget
left over from the coordinates already chosen.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BudgetExceeded
from .lattice import QuadraticLattice, lagrange_reduce

BOUNDARY_TOL = 1e-9
DEFAULT_CAP = 10**7
# extra room for the pruning intervals; the final test is the exact one
_PRUNE_SLACK = 1e-7


@dataclass(frozen=True)
class ShortVectorSet:
    """Short vectors up to sign, sorted by (height, coordinates).

    Each entry stands for the pair ``+-v``.  The zero vector appears only
    when requested.
    """

    bound: float
    vectors: tuple
    include_zero: bool

    @property
    def count_up_to_sign(self) -> int:
        return sum(1 for coords, _ in self.vectors if any(coords))

    @property
    def count_total(self) -> int:
        return 2 * self.count_up_to_sign + (1 if self.include_zero else 0)


def predicted_count(lat: QuadraticLattice, bound: float) -> float:
    """Gaussian-heuristic estimate of ``#{v : height(v) <= bound}``."""
    r = lat.rank
    det = float(np.prod(np.diag(lat.chol))) ** 2
    ball = math.pi ** (r / 2) / math.gamma(r / 2 + 1)
    return ball * bound ** (r / 2) / math.sqrt(det)


def _canonical(coords) -> bool:
    for x in coords:
        if x:
            return x > 0
    return False


def short_vectors(
    lat: QuadraticLattice,
    bound: float,
    include_zero: bool = False,
    cap: int = DEFAULT_CAP,
    reduce: bool = False,
) -> ShortVectorSet:
    """Enumerate every ``v`` with ``v^T gram v <= bound + 1e-9``.

    Parameters
    ----------
    lat : QuadraticLattice
    bound : float
        Height bound ``B >= 0``.
    include_zero : bool
        Whether to list the zero vector.
    cap : int
        Abort with ``BudgetExceeded`` if the predicted or actual number of
        vectors (counting both signs) exceeds this.
    reduce : bool
        For rank 2, enumerate in a Lagrange-reduced basis and map back.
        Output coordinates are always in the original basis.
    """
    if not bound >= 0:
        raise ValueError(f"bound must be nonnegative, got {bound}")
    if predicted_count(lat, bound) > cap:
        raise BudgetExceeded(
            f"about {predicted_count(lat, bound):.3g} vectors predicted below {bound}, cap is {cap}"
        )
    work, back = lat, None
    if reduce and lat.rank == 2:
        work, back = lagrange_reduce(lat)

    r = work.rank
    l = work.chol
    gram = lat.gram
    limit = bound + BOUNDARY_TOL
    prune = limit + _PRUNE_SLACK * (1.0 + limit)
    coords = [0] * r
    found = []
    total = 0

    def visit(i, remaining):
        nonlocal total
        # (L^T v)_i = L_ii v_i + sum_{j>i} L_ji v_j
        shift = sum(l[j, i] * coords[j] for j in range(i + 1, r)) / l[i, i]
        radius = math.sqrt(max(remaining, 0.0)) / l[i, i]
        lo = math.ceil(-shift - radius)
        hi = math.floor(-shift + radius)
        for x in range(lo, hi + 1):
            coords[i] = x
            used = (l[i, i] * (x + shift)) ** 2
            if i == 0:
                v = np.array(coords, dtype=np.int64)
                if back is not None:
                    v = back @ v
                height = float(v @ gram @ v)
                if height <= limit:
                    total += 1
                    if total > cap:
                        raise BudgetExceeded(f"more than {cap} vectors below {bound}")
                    found.append((tuple(int(t) for t in v), height))
            else:
                visit(i - 1, remaining - used)
        coords[i] = 0

    visit(r - 1, prune)
    keep = [(c, h) for c, h in found if _canonical(c) or (include_zero and not any(c))]
    keep.sort(key=lambda item: (item[1], item[0]))
    return ShortVectorSet(bound=float(bound), vectors=tuple(keep), include_zero=include_zero)
