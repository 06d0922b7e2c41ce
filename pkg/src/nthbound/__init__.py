"""Effective height bounds for rational points on curves of genus >= 2,
computed from Mordell-Weil lattice data and automorphism actions."""

__version__ = "0.1.0"

from .bounds import (
    BoundReport,
    KernelEvidence,
    MXComponents,
    Tolerances,
    best_bound,
    bound_kernel,
    bound_spectral,
    compute_mx,
    detect_kernel,
    verify_gap,
)
from .bravais import BravaisType, classify
from .datum import CurveDatum, parse_datum
from .enumeration import ShortVectorSet, short_vectors
from .lattice import (
    IsometryAction,
    QuadraticLattice,
    adjoint,
    check_isometry,
    lagrange_reduce,
    pair,
    validate_lattice,
)
from .measure_opt import OptimizationResult, certify, optimize_mu
from .spectral import (
    ProbabilityMeasure,
    SymmetrizedOperator,
    alpha_h,
    average,
    eigen_sym,
    symmetrize,
)
