"""Height bounds for rational points from lattice data.

Three criteria are evaluated, each bounding ``h(j(P))`` by a multiple of
the gap-principle defect ``M(X)``:

* kernel:    some nontrivial automorphism acts trivially on the lattice,
             bound ``M / (2g - 2)``;
* Dirac:     ``alpha = max_sigma lambda_min(S_sigma) > 1/g``,
             bound ``M / (2(g alpha - 1))``;
* averaged:  ``beta = lambda_min(S_mu) > 1/g`` for an optimized measure,
             bound ``M / (2(g beta - 1))``.

All of them hold only for points whose stabilizer in the relevant group is
trivial.  That cannot be checked from lattice data, so every report says so.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Optional, Sequence

import numpy as np

from .bravais import REL_TOL, BravaisType, classify
from .enumeration import BOUNDARY_TOL, DEFAULT_CAP
from .errors import EqualVectors, InvalidComponent
from .lattice import (
    ISO_TOL,
    PD_TOL,
    SYM_TOL,
    IsometryAction,
    QuadraticLattice,
    check_isometry,
    lagrange_reduce,
    pair,
    validate_lattice,
)
from .measure_opt import DEFAULT_BUDGET, optimize_mu
from .spectral import alpha_h, symmetrize

if TYPE_CHECKING:
    from .datum import CurveDatum

SPECTRAL_MARGIN = 1e-9

STABILIZER_CAVEAT = (
    "bounds apply only to points P with trivial stabilizer in the group used "
    "(the automorphism kernel for the kernel criterion); stabilizers are not checked"
)
LOG_CONVENTION = "M(X) uses natural logarithms throughout"

KERNEL, AVERAGED, DIRAC, NONE = "Kernel", "Averaged", "Dirac", "NoneApplicable"
# tie order when two criteria give the same bound
_PRIORITY = {KERNEL: 0, DIRAC: 1, AVERAGED: 2}


@dataclass(frozen=True)
class MXComponents:
    """Ingredients of the gap-principle defect.

    ``bad_primes`` holds ``(phi, log_norm)`` pairs: the local intersection
    quantity at a prime and the natural log of that prime's norm.
    """

    genus: int
    field_degree: int
    delta_sum: float
    bad_primes: tuple = ()


def compute_mx(c: MXComponents) -> float:
    """Gap-principle defect ``M(X)``.

    ::

        (g-1)^2/3 * max(6, g+1) * delta_sum
          + 2(g+1) * sum(phi * log_norm)
          + 2 [K:Q] g (g-1)^2 (3 g log g + 16)
    """
    g, k = c.genus, c.field_degree
    if not isinstance(g, int) or g < 2:
        raise InvalidComponent(f"genus must be an integer >= 2, got {g!r}")
    if not isinstance(k, int) or k < 1:
        raise InvalidComponent(f"field degree must be an integer >= 1, got {k!r}")
    if not (math.isfinite(c.delta_sum) and c.delta_sum >= 0):
        raise InvalidComponent(f"delta_sum must be finite and nonnegative, got {c.delta_sum!r}")
    local = []
    for i, (phi, log_norm) in enumerate(c.bad_primes):
        if not (math.isfinite(phi) and phi >= 0):
            raise InvalidComponent(f"bad_primes[{i}].phi must be nonnegative, got {phi!r}")
        if not (math.isfinite(log_norm) and log_norm > 0):
            raise InvalidComponent(f"bad_primes[{i}].log_norm must be positive, got {log_norm!r}")
        local.append(phi * log_norm)
    archimedean = (g - 1) ** 2 / 3 * max(6, g + 1) * c.delta_sum
    nonarchimedean = 2 * (g + 1) * math.fsum(local)
    constant = 2 * k * g * (g - 1) ** 2 * (3 * g * math.log(g) + 16)
    return archimedean + nonarchimedean + constant


@dataclass(frozen=True)
class KernelEvidence:
    """Why the automorphism action on the lattice is known to be non-injective.

    ``route`` is the first route that fired (identity action before order
    counting); ``routes`` lists all that fired.
    """

    found: bool
    route: str
    witness: object = None
    kernel_lower_bound: Optional[int] = None
    routes: tuple = ()


def detect_kernel(
    actions: Sequence[IsometryAction],
    group_order: int,
    bravais: Optional[BravaisType] = None,
) -> KernelEvidence:
    routes = []
    witness = None
    for a in actions:
        if a.is_identity and not a.group_identity:
            routes.append("IdentityAction")
            witness = a.name
            break
    lower = None
    if bravais is not None and group_order > bravais.order:
        lower = -(-group_order // bravais.order)
        routes.append("OrderCounting")
        if witness is None:
            witness = (group_order, bravais.order)
    if not routes:
        return KernelEvidence(False, "None")
    return KernelEvidence(True, routes[0], witness, lower, tuple(routes))


def bound_kernel(mx: float, g: int) -> float:
    if g < 2:
        raise InvalidComponent(f"genus must be >= 2, got {g}")
    return mx / (2 * g - 2)


def bound_spectral(mx: float, g: int, beta: float) -> Optional[float]:
    """``mx / (2(g beta - 1))``, or ``None`` unless ``beta > 1/g``."""
    if g < 2:
        raise InvalidComponent(f"genus must be >= 2, got {g}")
    if not beta > 1.0 / g + SPECTRAL_MARGIN:
        return None
    return mx / (2 * (g * beta - 1))


def verify_gap(lat: QuadraticLattice, mx: float, p, q, genus: int):
    """Evaluate ``h(p) + h(q) - 2g<p, q>`` and test it against ``-mx``."""
    p = np.asarray(p)
    q = np.asarray(q)
    if p.shape == q.shape and np.array_equal(p, q):
        raise EqualVectors("the gap principle needs two distinct points")
    lhs = pair(lat, p, p) + pair(lat, q, q) - 2 * genus * pair(lat, p, q)
    return lhs, lhs >= -mx


@dataclass(frozen=True)
class Tolerances:
    pd_tol: float = PD_TOL
    sym_tol: float = SYM_TOL
    iso_tol: float = ISO_TOL
    bravais_tol: float = REL_TOL
    boundary_tol: float = BOUNDARY_TOL
    budget: int = DEFAULT_BUDGET
    restarts: int = 0
    seed: Optional[int] = None
    enum_cap: int = DEFAULT_CAP
    check_group_closure: bool = False


@dataclass
class BoundReport:
    label: str
    genus: int
    rank: int
    mx: Optional[float]
    criterion: str
    beta_or_alpha: Optional[float]
    bound_factor: Optional[float]
    bound: Optional[float]
    kernel: KernelEvidence
    bravais: Optional[BravaisType] = None
    reduction: Optional[np.ndarray] = None
    reduced_gram: Optional[np.ndarray] = None
    alpha: Optional[float] = None
    alpha_label: Optional[str] = None
    beta_star: Optional[float] = None
    mu_star: Optional[dict] = None
    optimizer_iterations: int = 0
    candidates: dict = field(default_factory=dict)
    spectra: dict = field(default_factory=dict)
    isometry_residuals: dict = field(default_factory=dict)
    gram_asymmetry: float = 0.0
    tolerances: Tolerances = field(default_factory=Tolerances)
    notes: list = field(default_factory=list)


def generated_image(actions: Sequence[IsometryAction]):
    """Closure of the action matrices (plus the identity) under multiplication."""
    r = actions[0].matrix.shape[0]
    gens = [a.matrix for a in actions]
    seen = {np.eye(r, dtype=np.int64).tobytes(): np.eye(r, dtype=np.int64)}
    frontier = list(seen.values())
    while frontier:
        nxt = []
        for m in frontier:
            for gmat in gens:
                p = m @ gmat
                key = p.tobytes()
                if key not in seen:
                    seen[key] = p
                    nxt.append(p)
                    if len(seen) > 100_000:
                        return None
        frontier = nxt
    return list(seen.values())


def best_bound(datum: "CurveDatum", tol: Tolerances = Tolerances()) -> BoundReport:
    """Run every criterion on ``datum`` and keep the smallest bound.

    The criterion is ``NoneApplicable`` when no hypothesis holds; validation
    errors propagate.
    """
    g = datum.genus
    notes = [STABILIZER_CAVEAT, LOG_CONVENTION]
    lat = validate_lattice(datum.gram, tol.pd_tol, tol.sym_tol)
    if lat.asymmetry > 0:
        notes.append(f"Gram matrix symmetrized; asymmetry residual {lat.asymmetry:.3g}")

    actions = [
        check_isometry(lat, a.matrix, tol.iso_tol, name=a.name, group_identity=a.identity)
        for a in datum.automorphisms
    ]
    residuals = {a.name: a.residual for a in actions}

    if tol.check_group_closure and actions:
        image = generated_image(actions)
        supplied = {a.matrix.tobytes() for a in actions} | {np.eye(lat.rank, dtype=np.int64).tobytes()}
        if image is None:
            notes.append("group closure: supplied matrices generate more than 100000 elements")
        else:
            closed = len(image) == len(supplied) and all(m.tobytes() in supplied for m in image)
            notes.append(
                f"group closure: supplied matrices {'are' if closed else 'are not'} closed under composition; "
                f"generated image has order {len(image)}"
            )
            if len(image) > datum.group_order:
                notes.append(
                    f"inconsistent data: generated image order {len(image)} exceeds group_order {datum.group_order}"
                )
    else:
        notes.append("group structure of the supplied automorphisms is trusted, not verified")

    bravais = reduction = reduced_gram = None
    if lat.rank == 2:
        reduced, reduction = lagrange_reduce(lat)
        reduced_gram = reduced.gram
        bravais = classify(reduced.gram, tol.bravais_tol)
        notes.extend(bravais.notes)

    kernel = detect_kernel(actions, datum.group_order, bravais)

    report = BoundReport(
        label=datum.label, genus=g, rank=lat.rank, mx=datum.mx, criterion=NONE,
        beta_or_alpha=None, bound_factor=None, bound=None, kernel=kernel,
        bravais=bravais, reduction=reduction, reduced_gram=reduced_gram,
        isometry_residuals=residuals, gram_asymmetry=lat.asymmetry,
        tolerances=tol, notes=notes,
    )

    candidates = {}
    values = {}
    if kernel.found:
        candidates[KERNEL] = bound_kernel(1.0, g)
        values[KERNEL] = 1.0

    if any(not a.group_identity for a in actions):
        report.spectra = {
            a.name: [float(x) for x in symmetrize(lat, a).spectrum] for a in actions if not a.group_identity
        }
        report.alpha, report.alpha_label = alpha_h(lat, actions)
        opt = optimize_mu(lat, actions, tol.budget, restarts=tol.restarts, seed=tol.seed)
        report.beta_star = opt.beta_star
        report.mu_star = dict(opt.mu_star.weights)
        report.optimizer_iterations = opt.iterations
        for name, value in ((DIRAC, report.alpha), (AVERAGED, report.beta_star)):
            factor = bound_spectral(1.0, g, value)
            if factor is not None:
                candidates[name] = factor
                values[name] = value
        if report.beta_star > report.alpha + 1e-9:
            notes.append(
                f"averaging improves the spectral constant: beta*={report.beta_star:.6g} > alpha={report.alpha:.6g}"
            )
    else:
        notes.append("no non-identity automorphism supplied; spectral criteria skipped")

    report.candidates = candidates
    if candidates:
        best = min(candidates, key=lambda k: (candidates[k], _PRIORITY[k]))
        report.criterion = best
        report.bound_factor = candidates[best]
        report.beta_or_alpha = values[best]
        if datum.mx is not None:
            if best == KERNEL:
                report.bound = bound_kernel(datum.mx, g)
            else:
                report.bound = bound_spectral(datum.mx, g, report.beta_or_alpha)
        else:
            notes.append(f"M(X) not supplied; bound is {report.bound_factor:.12g} * M(X)")

    if datum.generator_heights:
        for i, h in enumerate(datum.generator_heights):
            d = float(lat.gram[i, i])
            if abs(h - d) > 1e-12 * max(1.0, abs(d)):
                notes.append(
                    f"generator {i + 1}: reported height {h:g} differs from Gram diagonal {d:g} by {h - d:.3g}"
                )
    if datum.torsion_order > 1:
        notes.append(f"each lattice vector stands for {datum.torsion_order} classes modulo torsion")
    return report
