from fractions import Fraction
from itertools import permutations, product

import numpy as np

import pytest
from hypothesis import given, settings, strategies as st

from unitheta.fock import ExactScalar, FockError
from unitheta.schrodinger import (
    GaussianPolynomial as GP, apply_D, bridge_to_fock, check_polyexpl, compute_P,
    laguerre_coefficients, laguerre_identity_check, laguerre_identity_sides, power_formula,
)
from unitheta.special import laguerre_coeffs

INV_PI = ExactScalar(1, 0, -1)


def mono(c, z=(), zb=(), p=1):
    return GP.monomial(p, c, z=z, zb=zb)


# D operators -----------------------------------------------------------------

def test_D_on_gaussian():
    assert apply_D(GP.one(1), 1) == mono(ExactScalar(2), zb=[1])
    assert apply_D(GP.one(1), 1, conjugated=True) == mono(ExactScalar(2), z=[1])


def test_D_Dbar_on_gaussian():
    want = mono(ExactScalar(4), z=[1], zb=[1]) - mono(INV_PI * 2)
    assert apply_D(apply_D(GP.one(1), 1, conjugated=True), 1) == want


def test_D_index_range():
    with pytest.raises(FockError):
        apply_D(GP.one(1), 2)


gp_terms = st.lists(
    st.tuples(st.integers(-3, 3), st.lists(st.integers(1, 2), max_size=2),
              st.lists(st.integers(1, 2), max_size=2)),
    min_size=1, max_size=4,
)


def build(terms, p=2):
    # each D raises deg - 2 * (power of pi) by one, so inputs are kept
    # homogeneous in that grading: pi^((deg - parity) / 2) on every term
    out = GP(p)
    parity = (len(terms[0][1]) + len(terms[0][2])) % 2
    for c, z, zb in terms:
        deg = len(z) + len(zb)
        if deg % 2 != parity:
            zb = zb + [1]
            deg += 1
        out = out + GP.monomial(p, ExactScalar(c, 0, (deg - parity) // 2), z=z, zb=zb)
    return out


@settings(max_examples=50, deadline=None)
@given(gp_terms, st.integers(1, 2), st.integers(1, 2), st.booleans(), st.booleans())
def test_D_operators_commute(terms, a, b, ca, cb):
    f = build(terms)
    assert apply_D(apply_D(f, a, ca), b, cb) == apply_D(apply_D(f, b, cb), a, ca)


def test_D_refuses_mixed_pi_grading():
    from unitheta.fock import PiHomogeneityError

    f = GP.one(1) + mono(ExactScalar(1), z=[1], zb=[1])
    with pytest.raises(PiHomogeneityError):
        apply_D(apply_D(f, 1), 1)


# closed form and Laguerre ----------------------------------------------------

def test_power_formula_examples():
    assert power_formula(1, 1, 1) == mono(ExactScalar(4), z=[1], zb=[1]) - mono(INV_PI * 2)
    assert power_formula(2, 0, 1) == mono(ExactScalar(4), zb=[1, 1])


def _iterate(l, k):
    f = GP.one(1)
    for _ in range(k):
        f = apply_D(f, 1, conjugated=True)
    for _ in range(l):
        f = apply_D(f, 1)
    return f


@pytest.mark.parametrize("l,k", [(l, k) for l in range(9) for k in range(9) if l + k <= 8])
def test_power_formula_matches_iteration(l, k):
    assert power_formula(l, k, 1) == _iterate(l, k)


def test_laguerre_coefficients_independent():
    # two separate constructions of L_k
    for k in range(8):
        assert laguerre_coefficients(k) == laguerre_coeffs(k)
    assert laguerre_coefficients(2) == [1, -2, Fraction(1, 2)]


@pytest.mark.parametrize("k", range(6))
def test_laguerre_identity(k):
    assert laguerre_identity_check(k)


def test_laguerre_l2_matches_power_formula():
    lhs, rhs = laguerre_identity_sides(2)
    assert rhs == power_formula(2, 2, 1)
    # front constant 2^2 2! / pi^2 = 8 / pi^2
    assert rhs.constant_term() == ExactScalar(8, 0, -2)


@pytest.mark.parametrize("k", range(6))
def test_laguerre_printed_sign(k):
    # the printed (1/pi)^k front agrees only for even k
    assert laguerre_identity_check(k, literal_sign=True) == (k % 2 == 0)


# P polynomials ---------------------------------------------------------------

def test_P_q1_is_one():
    assert compute_P(2, 1, (), ()) == GP.one(2)


def test_P_q2():
    want = mono(ExactScalar(4), z=[1], zb=[1]) - mono(INV_PI * 2)
    assert compute_P(1, 2, (1,), (1,)) == want


def test_P_q3_constant_term():
    assert compute_P(1, 3, (1, 1), (1, 1)).constant_term() == ExactScalar(8, 0, -2)


def test_P_mismatch_constant_zero():
    assert compute_P(2, 2, (1,), (2,)).constant_term() == ExactScalar()


def test_P_13_leading():
    P = compute_P(1, 3, (1, 1), (1, 1))
    assert P.homogeneous(4) == mono(ExactScalar(16), z=[1, 1], zb=[1, 1])


def test_P_argument_errors():
    with pytest.raises(FockError):
        compute_P(2, 3, (1,), (1, 1))
    with pytest.raises(FockError):
        compute_P(2, 2, (3,), (1,))


@pytest.mark.parametrize("p,q", [(p, q) for p in range(1, 4) for q in range(1, 4)])
def test_polyexpl(p, q):
    rep = check_polyexpl(p, q)
    assert rep.holds, rep.failures
    assert rep.pairs == p ** (2 * (q - 1))


def test_polyexpl_22_pair_count():
    assert check_polyexpl(2, 2).pairs == 4


@pytest.mark.parametrize("al,be", [((1, 2), (2, 3)), ((1, 1), (3, 2)), ((3, 1), (1, 2))])
def test_P_permutation_symmetry(al, be):
    P = compute_P(3, 3, al, be)
    for pa in permutations(al):
        for pb in permutations(be):
            assert compute_P(3, 3, pa, pb) == P


@settings(max_examples=30, deadline=None)
@given(st.integers(-4, 4), st.integers(-4, 4), st.integers(0, 3))
def test_homogeneous_scaling(a, b, ell):
    w = ExactScalar(a, b)
    P = compute_P(2, 3, (1, 2), (2, 1))
    comp = P.homogeneous(2 * ell)
    norm2 = ExactScalar(a * a + b * b)
    assert comp.substitute_scale(w) == comp.scale(norm2 ** ell)


@pytest.mark.parametrize("al,be", [(a, b) for a in product((1, 2), repeat=2) for b in product((1, 2), repeat=2)])
def test_single_coordinate_values(al, be):
    # at x = z_1 v_1 the top component survives only for all-ones indices,
    # the full P only when every other index has matching multiplicities
    x = np.array([0.7 + 0.2j, 0.0])
    P = compute_P(2, 3, al, be)
    top = P.homogeneous(4).compile().eval(x)
    full = P.compile().eval(x)
    ones = set(al) == set(be) == {1}
    assert (abs(top) > 1e-12) == ones
    matched = al.count(2) == be.count(2)
    assert (abs(full) > 1e-12) == matched


# bridge ----------------------------------------------------------------------

@pytest.mark.parametrize("p,q", [(1, 1), (1, 2), (2, 1), (2, 2)])
def test_bridge(p, q):
    rep = bridge_to_fock(p, q)
    assert rep.phi_ok and rep.psi_ok
