import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nthbound.errors import NoNonIdentityAction
from nthbound.lattice import check_isometry, validate_lattice
from nthbound.measure_opt import (
    certify,
    maximize_lambda_min,
    optimize_mu,
    project_simplex,
)
from nthbound.spectral import ProbabilityMeasure, average, from_operator
from oracles import random_lattice_with_isometries


def projectors():
    lat = validate_lattice(np.eye(2))
    return lat, [
        from_operator(lat, np.diag([0.0, 1.0]), label="T1"),
        from_operator(lat, np.diag([1.0, 0.0]), label="T2"),
    ]


def _random_symmetric_ops(rng, k, r):
    lat = validate_lattice(np.eye(r))
    ops = []
    for i in range(k):
        m = rng.normal(size=(r, r))
        ops.append(from_operator(lat, (m + m.T) / 2, label=f"s{i}"))
    return ops


@settings(max_examples=300, deadline=None)
@given(st.lists(st.floats(-10, 10), min_size=1, max_size=8))
def test_projection_lands_on_simplex(v):
    x = project_simplex(np.array(v))
    assert np.all(x >= 0)
    assert x.sum() == pytest.approx(1.0, abs=1e-12)


def test_projection_is_nearest_point(rng):
    # against brute-force minimization over a fine grid of the 2-simplex
    grid = [(a, b, 1 - a - b) for a in np.linspace(0, 1, 201) for b in np.linspace(0, 1, 201) if a + b <= 1 + 1e-12]
    grid = np.clip(np.array(grid), 0, None)
    for _ in range(20):
        v = rng.normal(size=3)
        x = project_simplex(v)
        best = grid[np.argmin(((grid - v) ** 2).sum(axis=1))]
        assert ((x - v) ** 2).sum() <= ((best - v) ** 2).sum() + 1e-12


def test_single_action_is_dirac():
    lat = validate_lattice([[2.0, 0.5], [0.5, 3.0]])
    act = check_isometry(lat, -np.eye(2, dtype=int), name="minus")
    res = optimize_mu(lat, [act])
    assert res.mu_star.weights == {"minus": 1.0}
    assert res.beta_star == pytest.approx(-1.0, abs=1e-12)


def test_two_projectors_reach_half():
    _, ops = projectors()
    res = maximize_lambda_min(ops)
    assert res.beta_star == pytest.approx(0.5, abs=1e-6)
    assert res.mu_star.weights["T1"] == pytest.approx(0.5, abs=1e-4)
    assert res.mu_star.weights["T2"] == pytest.approx(0.5, abs=1e-4)


def test_copies_of_one_operator():
    lat = validate_lattice(np.eye(2))
    m = np.array([[0.3, 0.2], [0.2, -0.4]])
    ops = [from_operator(lat, m, label=f"c{i}") for i in range(3)]
    res = maximize_lambda_min(ops)
    assert res.beta_star == pytest.approx(ops[0].lambda_min, abs=1e-12)


def test_needs_non_identity_action():
    lat = validate_lattice(np.eye(2))
    act = check_isometry(lat, np.eye(2, dtype=int), name="id", group_identity=True)
    with pytest.raises(NoNonIdentityAction):
        optimize_mu(lat, [act])


def test_certify_dirac_at_trivially_acting_automorphism(curve_lattice):
    act = check_isometry(curve_lattice, np.eye(2, dtype=int), name="sigma")
    assert certify(curve_lattice, [act], ProbabilityMeasure.dirac("sigma")) == pytest.approx(1.0, abs=1e-12)


def test_certify_minus_identity(unit_lattice):
    act = check_isometry(unit_lattice, -np.eye(2, dtype=int), name="m")
    assert certify(unit_lattice, [act], ProbabilityMeasure.uniform(["m"])) == -1.0


def test_certify_unequal_projector_weights():
    _, ops = projectors()
    assert average(ops, ProbabilityMeasure({"T1": 0.25, "T2": 0.75})).lambda_min == pytest.approx(0.25, abs=1e-15)


def test_concavity(rng):
    for _ in range(100):
        k, r = int(rng.integers(2, 5)), int(rng.integers(2, 5))
        ops = _random_symmetric_ops(rng, k, r)
        labels = [o.label for o in ops]
        m1 = ProbabilityMeasure.from_vector(labels, rng.dirichlet(np.ones(k)))
        m2 = ProbabilityMeasure.from_vector(labels, rng.dirichlet(np.ones(k)))
        t = rng.uniform()
        mix = ProbabilityMeasure.from_vector(
            labels, [t * m1.weights[l] + (1 - t) * m2.weights[l] for l in labels]
        )
        f = lambda mu: average(ops, mu).lambda_min
        assert f(mix) >= t * f(m1) + (1 - t) * f(m2) - 1e-9


def test_best_so_far_monotone_in_budget(rng):
    for _ in range(10):
        ops = _random_symmetric_ops(rng, 3, 3)
        values = [maximize_lambda_min(ops, budget=b).beta_star for b in (1, 10, 100, 500)]
        assert all(b >= a - 1e-12 for a, b in zip(values, values[1:]))


def test_trace_is_nondecreasing(rng):
    ops = _random_symmetric_ops(rng, 3, 3)
    res = maximize_lambda_min(ops, budget=200, keep_trace=True)
    betas = [b for _, b in res.trace]
    assert len(betas) == 200
    assert all(b >= a for a, b in zip(betas, betas[1:]))


def test_permutation_equivariance(rng):
    for _ in range(10):
        ops = _random_symmetric_ops(rng, 3, 3)
        a = maximize_lambda_min(ops, budget=300).beta_star
        b = maximize_lambda_min(ops[::-1], budget=300).beta_star
        assert a == pytest.approx(b, abs=1e-3)


def test_certify_reproduces_reported_beta(rng):
    for _ in range(10):
        gram, mats = random_lattice_with_isometries(rng, 3, count=3)
        lat = validate_lattice(gram)
        acts = [check_isometry(lat, m, name=f"a{i}") for i, m in enumerate(mats)]
        res = optimize_mu(lat, acts, budget=200)
        assert certify(lat, acts, res.mu_star) == res.beta_star


def test_convex_min_at_optimum(rng):
    for _ in range(10):
        ops = _random_symmetric_ops(rng, 4, 3)
        res = maximize_lambda_min(ops, budget=300)
        lower = sum(res.mu_star.weights[o.label] * o.lambda_min for o in ops)
        assert res.beta_star >= lower - 1e-9
        assert res.beta_star >= res.dirac_best - 1e-9


def test_restarts_are_seeded(rng):
    ops = _random_symmetric_ops(rng, 4, 3)
    a = maximize_lambda_min(ops, budget=100, restarts=3, seed=7)
    b = maximize_lambda_min(ops, budget=100, restarts=3, seed=7)
    assert a.mu_star == b.mu_star
    assert a.iterations == 400
    assert a.beta_star >= maximize_lambda_min(ops, budget=100).beta_star - 1e-12
