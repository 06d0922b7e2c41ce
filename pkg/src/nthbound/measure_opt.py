"""Choosing the averaging measure.

``f(mu) = lambda_min(sum_sigma mu_sigma S_sigma)`` is concave on the
probability simplex (a minimum of linear functions of ``mu``), so projected
supergradient ascent climbs it.  Any feasible ``mu`` gives a valid bound,
which is why the result is always re-certified from scratch and never taken
from the optimizer's running estimate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import NoNonIdentityAction
from .lattice import IsometryAction, QuadraticLattice
from .spectral import (
    ProbabilityMeasure,
    SymmetrizedOperator,
    average,
    eigen_sym,
    symmetrize,
)

DEFAULT_BUDGET = 2000
STEP = 0.1


def project_simplex(v) -> np.ndarray:
    """Euclidean projection of ``v`` onto ``{x : x >= 0, sum x = 1}``.

    Sort-and-threshold method of Duchi et al. (ICML 2008), O(n log n).
    """
    v = np.asarray(v, dtype=float)
    n = v.shape[0]
    u = np.sort(v)[::-1]
    css = np.cumsum(u)
    rho = np.nonzero(u * np.arange(1, n + 1) > (css - 1.0))[0][-1]
    theta = (css[rho] - 1.0) / (rho + 1.0)
    return np.maximum(v - theta, 0.0)


@dataclass
class OptimizationResult:
    mu_star: ProbabilityMeasure
    beta_star: float
    iterations: int
    dirac_best: float
    dirac_label: str
    trace: list = field(default_factory=list)


def certify_operators(ops: Sequence[SymmetrizedOperator], mu: ProbabilityMeasure) -> float:
    return average(ops, mu).lambda_min


def certify(lat: QuadraticLattice, actions: Sequence[IsometryAction], mu: ProbabilityMeasure) -> float:
    """``beta_mu`` rebuilt from the raw actions, independent of any optimizer state."""
    support = set(mu.support())
    ops = [symmetrize(lat, a) for a in actions if a.name in support]
    return certify_operators(ops, mu)


def _ascend(mats, x, budget, best, trace):
    """Run ``budget`` supergradient steps from ``x``; ``best`` is ``(value, x)``."""
    k, r, _ = mats.shape
    flat = mats.reshape(k, r * r)
    for t in range(1, budget + 1):
        values, vectors = eigen_sym((x @ flat).reshape(r, r))
        f = float(values[0])
        if f > best[0]:
            best = (f, x.copy())
        if trace is not None:
            trace.append((t, best[0]))
        u = vectors[:, 0]
        g = np.einsum("i,kij,j->k", u, mats, u)
        x = project_simplex(x + (STEP / math.sqrt(t)) * g)
    return best


def maximize_lambda_min(
    ops: Sequence[SymmetrizedOperator],
    budget: int = DEFAULT_BUDGET,
    restarts: int = 0,
    seed: int | None = None,
    keep_trace: bool = False,
) -> OptimizationResult:
    """Maximize ``lambda_min(S_mu)`` over measures on the non-identity operators.

    Starts from the uniform measure with step ``0.1/sqrt(t)``.  Every Dirac
    measure is evaluated first and competes for best-so-far, so the result
    never loses to the best single automorphism.  ``restarts`` extra runs
    start from Dirichlet(1) draws of ``numpy.random.default_rng(seed)``.
    """
    if budget < 1:
        raise ValueError("budget must be at least 1")
    ops = [o for o in ops if not o.group_identity]
    if not ops:
        raise NoNonIdentityAction("no non-identity automorphism supplied")
    labels = [o.label for o in ops]
    if len(set(labels)) != len(labels):
        raise ValueError("operator labels must be unique")
    mats = np.stack([o.sym_form for o in ops])
    k = len(ops)

    dirac_best, dirac_idx = -math.inf, 0
    for i, o in enumerate(ops):
        if o.lambda_min > dirac_best:
            dirac_best, dirac_idx = o.lambda_min, i
    start = np.zeros(k)
    start[dirac_idx] = 1.0
    best = (dirac_best, start)

    trace = [] if keep_trace else None
    iterations = 0
    if k > 1:
        best = _ascend(mats, np.full(k, 1.0 / k), budget, best, trace)
        iterations = budget
        if restarts:
            rng = np.random.default_rng(seed)
            for _ in range(restarts):
                cand = _ascend(mats, rng.dirichlet(np.ones(k)), budget, (-math.inf, None), None)
                if cand[0] > best[0] or (cand[0] == best[0] and tuple(cand[1]) < tuple(best[1])):
                    best = cand
                iterations += budget

    mu = ProbabilityMeasure.from_vector(labels, best[1])
    return OptimizationResult(
        mu_star=mu,
        beta_star=certify_operators(ops, mu),
        iterations=iterations,
        dirac_best=dirac_best,
        dirac_label=labels[dirac_idx],
        trace=trace or [],
    )


def optimize_mu(
    lat: QuadraticLattice,
    actions: Sequence[IsometryAction],
    budget: int = DEFAULT_BUDGET,
    restarts: int = 0,
    seed: int | None = None,
    keep_trace: bool = False,
) -> OptimizationResult:
    ops = [symmetrize(lat, a) for a in actions if not a.group_identity]
    return maximize_lambda_min(ops, budget, restarts=restarts, seed=seed, keep_trace=keep_trace)
