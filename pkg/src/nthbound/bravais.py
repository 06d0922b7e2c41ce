"""Bravais type of a rank-2 lattice from its reduced Gram matrix.

All tests run on scale-free quantities

    c = |H12| / sqrt(H11 H22)        (absolute cosine of the basis angle)
    d = |H11 - H22| / max(H11, H22)  (relative diagonal mismatch)

so the answer does not change under scaling of the pairing or under a sign
flip of a basis vector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, NotReduced

REL_TOL = 5e-3

ORDERS = {"Oblique": 2, "Rectangular": 4, "Square": 8, "Hexagonal": 12}


@dataclass(frozen=True)
class BravaisType:
    kind: str
    order: int
    cosine: float
    margins: dict
    rel_tol: float
    notes: tuple = field(default=())


def classify(reduced_gram, rel_tol: float = REL_TOL) -> BravaisType:
    """Classify a Lagrange-reduced 2x2 Gram matrix.

    ``margins`` holds the distance of the input to each boundary of the
    decision tree: ``c`` (to orthogonal), ``|c - 1/2|`` (to hexagonal angle),
    ``d`` (to equal diagonal) and the relative slack of the reduction
    inequalities.  A kind is chosen when its margins are within ``rel_tol``.
    """
    h = np.asarray(reduced_gram, dtype=float)
    if h.shape != (2, 2):
        raise DimensionMismatch(f"Bravais classification needs a 2x2 Gram matrix, got {h.shape}")
    h11, h22 = float(h[0, 0]), float(h[1, 1])
    h12 = (float(h[0, 1]) + float(h[1, 0])) / 2.0
    if h11 <= 0 or h22 <= 0:
        raise NotReduced("diagonal entries must be positive")
    if 2.0 * abs(h12) - h11 > rel_tol * h11 or h11 - h22 > rel_tol * h22:
        raise NotReduced(
            f"Gram matrix is not reduced: need 2|H12| <= H11 <= H22, got H11={h11}, H22={h22}, H12={h12}"
        )

    cosine = h12 / math.sqrt(h11 * h22)
    c = abs(cosine)
    d = abs(h11 - h22) / max(h11, h22)
    slack = max(0.0, min(h11 - 2.0 * abs(h12), h22 - h11) / h22)
    margins = {
        "orthogonal": c,
        "hexagonal_angle": abs(c - 0.5),
        "equal_diagonal": d,
        "reduction_slack": slack,
    }

    if c <= rel_tol and d <= rel_tol:
        kind = "Square"
    elif c <= rel_tol:
        kind = "Rectangular"
    elif d <= rel_tol and abs(c - 0.5) <= rel_tol:
        kind = "Hexagonal"
    else:
        kind = "Oblique"

    notes = []
    for name in ("orthogonal", "hexagonal_angle", "equal_diagonal"):
        m = margins[name]
        if 0.5 * rel_tol <= m <= 2.0 * rel_tol:
            notes.append(f"near boundary: {name} margin {m:.3g} is within a factor 2 of rel_tol {rel_tol:g}")
    if kind == "Oblique" and d <= rel_tol:
        notes.append(
            "equal diagonal with 0 < |cosine| < 1/2: rhombic (centered rectangular) lattice, "
            "true point group order may be 4; conservative order 2 used"
        )
    return BravaisType(kind, ORDERS[kind], cosine, margins, rel_tol, tuple(notes))
