import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import FIXTURES, CURVE_GRAM
from nthbound.bounds import (
    AVERAGED,
    KERNEL,
    NONE,
    STABILIZER_CAVEAT,
    MXComponents,
    Tolerances,
    best_bound,
    bound_kernel,
    bound_spectral,
    compute_mx,
    detect_kernel,
    verify_gap,
)
from nthbound.bravais import classify
from nthbound.datum import Automorphism, CurveDatum, parse_datum
from nthbound.enumeration import short_vectors
from nthbound.errors import EqualVectors, InvalidComponent, NotIsometry
from nthbound.lattice import check_isometry
from oracles import mx_oracle


def datum(gram, autos, genus=2, group_order=2, mx=None, label="t"):
    gram = tuple(tuple(float(x) for x in row) for row in gram)
    return CurveDatum(
        label=label, genus=genus, field_degree=1, rank=len(gram), gram=gram,
        automorphisms=tuple(Automorphism(n, tuple(map(tuple, m))) for n, m in autos),
        group_order=group_order, mx_value=mx,
    )


# ---- M(X)

def test_mx_genus_two_constant_term():
    got = compute_mx(MXComponents(2, 1, 0.0))
    assert got == pytest.approx(4 * (6 * math.log(2) + 16), rel=1e-15)
    assert got == pytest.approx(80.6355, abs=1e-4)


def test_mx_delta_coefficient():
    base = compute_mx(MXComponents(2, 1, 0.0))
    assert compute_mx(MXComponents(2, 1, 1.0)) - base == pytest.approx(2.0, abs=1e-12)


def test_mx_bad_prime_coefficient():
    base = compute_mx(MXComponents(2, 1, 0.0))
    got = compute_mx(MXComponents(2, 1, 0.0, ((1.0, math.log(2)),)))
    assert got - base == pytest.approx(6 * math.log(2), abs=1e-12)


def test_mx_uses_max_six_g_plus_one():
    # for g >= 6 the archimedean coefficient switches to g + 1
    for g in (5, 6, 7):
        d = compute_mx(MXComponents(g, 1, 1.0)) - compute_mx(MXComponents(g, 1, 0.0))
        assert d == pytest.approx((g - 1) ** 2 / 3 * max(6, g + 1), rel=1e-12)


@pytest.mark.parametrize(
    "comp",
    [
        MXComponents(1, 1, 0.0),
        MXComponents(2, 0, 0.0),
        MXComponents(2, 1, -1.0),
        MXComponents(2, 1, float("nan")),
        MXComponents(2, 1, 0.0, ((-1.0, 1.0),)),
        MXComponents(2, 1, 0.0, ((1.0, 0.0),)),
    ],
)
def test_mx_invalid(comp):
    with pytest.raises(InvalidComponent):
        compute_mx(comp)


@settings(max_examples=200, deadline=None)
@given(
    st.integers(2, 12),
    st.integers(1, 6),
    st.floats(0, 100),
    st.lists(st.tuples(st.floats(0, 5), st.floats(0.1, 5)), max_size=4),
)
def test_mx_matches_oracle(g, k, delta, primes):
    got = compute_mx(MXComponents(g, k, delta, tuple(primes)))
    assert got == pytest.approx(mx_oracle(g, k, delta, primes), rel=1e-12)


# ---- kernel detection

def _curve_actions(lat):
    return [
        check_isometry(lat, np.eye(2, dtype=int), name="sigma"),
        check_isometry(lat, -np.eye(2, dtype=int), name="hyperelliptic"),
    ]


def test_kernel_identity_route(curve_lattice):
    ev = detect_kernel(_curve_actions(curve_lattice), group_order=4)
    assert ev.found and ev.route == "IdentityAction" and ev.witness == "sigma"


def test_kernel_both_routes(curve_lattice):
    ev = detect_kernel(_curve_actions(curve_lattice), group_order=4, bravais=classify(CURVE_GRAM))
    assert ev.found
    assert ev.routes == ("IdentityAction", "OrderCounting")
    assert ev.kernel_lower_bound == 2


def test_kernel_order_route_only(curve_lattice):
    actions = _curve_actions(curve_lattice)[1:]
    ev = detect_kernel(actions, group_order=4, bravais=classify(CURVE_GRAM))
    assert ev.found and ev.route == "OrderCounting"
    assert ev.witness == (4, 2)
    assert ev.kernel_lower_bound == 2


def test_kernel_order_not_strict(curve_lattice):
    actions = _curve_actions(curve_lattice)[1:]
    ev = detect_kernel(actions, group_order=2, bravais=classify(CURVE_GRAM))
    assert not ev.found and ev.route == "None"


def test_group_identity_is_not_a_kernel_witness(curve_lattice):
    a = check_isometry(curve_lattice, np.eye(2, dtype=int), name="id", group_identity=True)
    assert not detect_kernel([a], group_order=2).found


def test_kernel_lower_bound_rounds_up(unit_lattice):
    a = check_isometry(unit_lattice, -np.eye(2, dtype=int), name="m")
    ev = detect_kernel([a], group_order=9, bravais=classify(np.eye(2)))
    assert ev.kernel_lower_bound == 2


# ---- bound formulas

def test_bound_kernel_examples():
    assert bound_kernel(10.0, 2) == 5.0
    assert bound_kernel(8.0, 3) == 2.0
    assert bound_kernel(80.6355, 2) == pytest.approx(40.3178, abs=1e-4)


def test_bound_spectral_examples():
    assert bound_spectral(7.0, 2, 1.0) == bound_kernel(7.0, 2)
    assert bound_spectral(1.0, 2, 0.5) is None
    assert bound_spectral(1.0, 2, 0.75) == pytest.approx(1.0, abs=1e-15)
    assert bound_spectral(1.0, 3, 1 / 3 + 1e-10) is None


@settings(max_examples=200, deadline=None)
@given(st.integers(2, 20), st.floats(1e-3, 1e6), st.floats(0, 1), st.floats(0, 1))
def test_bound_spectral_monotone(g, mx, s, t):
    lo = 1.0 / g + 1e-6
    b1, b2 = sorted((lo + s * (1 - lo), lo + t * (1 - lo)))
    if b1 == b2:
        return
    assert bound_spectral(mx, g, b1) > bound_spectral(mx, g, b2)
    assert bound_spectral(2 * mx, g, b1) > bound_spectral(mx, g, b1)


# ---- gap principle

def test_verify_gap_curve_basis(curve_lattice):
    lhs, ok = verify_gap(curve_lattice, 0.0, [1, 0], [0, 1], genus=2)
    assert lhs == pytest.approx(2.116 + 3.324 + 4 * 0.913, abs=1e-12)
    assert lhs == pytest.approx(9.092, abs=1e-12)
    assert ok


def test_verify_gap_orthogonal(unit_lattice):
    lhs, ok = verify_gap(unit_lattice, 0.0, [1, 0], [0, 1], genus=3)
    assert lhs == 2.0 and ok


def test_verify_gap_equal_heights(unit_lattice):
    # equal heights h: the check reads 2g<p,q> - 2h <= mx
    p, q = [1, 1], [1, 0]
    lhs, ok = verify_gap(unit_lattice, 1.0, p, q, genus=2)
    assert lhs == pytest.approx(2 + 1 - 4 * 1)
    assert ok
    assert not verify_gap(unit_lattice, 0.5, p, q, genus=2)[1]


def test_verify_gap_equal_vectors(unit_lattice):
    with pytest.raises(EqualVectors):
        verify_gap(unit_lattice, 1.0, [1, 0], [1, 0], genus=2)


def test_verify_gap_on_curve_short_vectors(curve_lattice):
    # M(X) for genus 2 over Q is at least its constant term, whatever the
    # delta and bad-prime inputs; every pair of short vectors must pass.
    floor = compute_mx(MXComponents(2, 1, 0.0))
    s = short_vectors(curve_lattice, 12.0)
    vecs = [c for c, _ in s.vectors]
    vecs += [tuple(-x for x in c) for c in vecs]
    worst = np.inf
    for p in vecs:
        for q in vecs:
            if p != q:
                lhs, ok = verify_gap(curve_lattice, floor, p, q, genus=2)
                assert ok
                worst = min(worst, lhs)
    # with mx = 0 the check is genuinely informative: some pairs fail it
    assert worst < 0


# ---- best_bound

def test_best_bound_curve_fixture():
    r = best_bound(parse_datum(FIXTURES / "196098.datum"))
    assert r.criterion == KERNEL
    assert r.bound_factor == 0.5
    assert r.bound is None
    assert r.bravais.kind == "Oblique" and r.bravais.order == 2
    assert set(r.kernel.routes) == {"IdentityAction", "OrderCounting"}
    assert STABILIZER_CAVEAT in r.notes
    assert any("2.117" in n for n in r.notes)


def test_best_bound_minus_one_only():
    r = best_bound(datum(np.eye(2) * 1.5 + [[0, 0.2], [0.2, 0]], [("m", -np.eye(2, dtype=int))], group_order=2))
    assert r.alpha == pytest.approx(-1.0)
    assert not r.kernel.found
    assert r.criterion == NONE
    assert r.bound is None and r.bound_factor is None


def test_best_bound_kernel_genus_five():
    r = best_bound(datum(np.eye(2) * [1, 2], [("s", np.eye(2, dtype=int))], genus=5, mx=8.0))
    assert r.criterion == KERNEL
    assert r.bound == 1.0


def test_best_bound_averaged_fixture():
    r = best_bound(parse_datum(FIXTURES / "averaging.datum"))
    assert r.criterion == AVERAGED
    assert r.beta_or_alpha == pytest.approx(0.5, abs=1e-6)
    assert r.bound == pytest.approx(6.0, rel=1e-5)


def test_best_bound_kernel_wins_ties():
    # identity-acting automorphism gives beta = 1, the same factor as the kernel route
    r = best_bound(datum(np.eye(2), [("s", np.eye(2, dtype=int))], genus=3, mx=4.0))
    assert r.candidates[KERNEL] == pytest.approx(r.candidates["Dirac"])
    assert r.criterion == KERNEL


def test_best_bound_rejects_non_isometry():
    with pytest.raises(NotIsometry):
        best_bound(datum(np.eye(2), [("shear", [[1, 1], [0, 1]])]))


def test_best_bound_group_closure_note():
    d = datum(np.eye(2), [("r", [[0, -1], [1, 0]])], group_order=4)
    r = best_bound(d, Tolerances(check_group_closure=True))
    assert any("order 4" in n for n in r.notes)
    r = best_bound(d)
    assert any("trusted" in n for n in r.notes)
