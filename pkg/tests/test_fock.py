import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from unitheta.fock import (
    DPRIME, I, ONE, PI, PRIME, ExactScalar, FockError, FockForm, FockVariable,
    PiHomogeneityError, Signature, omega_basis_forms, partial_derivative, poly_mul,
    random_form, wedge, zp, zpp,
)

S11 = Signature(1, 1)
S22 = Signature(2, 2)


def xi(sig, kind, a, mu):
    return FockForm.xi(sig, kind, a, mu)


# ExactScalar -----------------------------------------------------------------

def test_scalar_zero_normalises_pi_power():
    assert ExactScalar(0, 0, 5) == ExactScalar()
    assert ExactScalar(0, 0, 5).pi_pow == 0


def test_scalar_gaussian_norm():
    a = ExactScalar(2, 1)
    b = ExactScalar(2, -1)
    assert a * b == ExactScalar(5)


def test_scalar_mixed_pi_sum_raises():
    with pytest.raises(PiHomogeneityError):
        ONE + PI


def test_scalar_inverse():
    x = ExactScalar(Fraction(3, 7), Fraction(-2, 5), 3)
    assert x * x.inverse() == ONE


def test_complex_float_refused():
    with pytest.raises(TypeError):
        ExactScalar.of(1j)


# wedge / poly_mul ------------------------------------------------------------

def test_wedge_repeat_is_zero():
    a = xi(S11, PRIME, 1, 2)
    assert wedge(a, a).is_zero()


def test_wedge_degree_one_anticommutes():
    a = xi(S11, PRIME, 1, 2)
    b = xi(S11, DPRIME, 1, 2)
    assert wedge(a, b) == -wedge(b, a)


def test_wedge_scalar_factors_commute():
    a = FockForm.monomial(S11, ONE, [zpp(S11, 1)], [(PRIME, 1, 2)])
    b = FockForm.monomial(S11, ONE, [zp(S11, 1)], [(DPRIME, 1, 2)])
    want = FockForm.monomial(S11, ONE, [zpp(S11, 1), zp(S11, 1)], [(PRIME, 1, 2), (DPRIME, 1, 2)])
    assert wedge(a, b) == want


def test_wedge_signature_mismatch():
    with pytest.raises(FockError):
        wedge(FockForm.scalar(S11, 1), FockForm.scalar(S22, 1))


def test_poly_mul_examples():
    z = FockForm.var(S11, zpp(S11, 1))
    assert poly_mul(z, z) == FockForm.monomial(S11, ONE, [zpp(S11, 1)] * 2, [])
    a = FockForm.var(S11, zp(S11, 2), PI)
    b = FockForm.var(S11, zpp(S11, 2), PI.inverse())
    prod = poly_mul(a, b)
    assert prod == FockForm.monomial(S11, ONE, [zp(S11, 2), zpp(S11, 2)], [])
    assert prod.pi_powers() == (0,)
    c = poly_mul(FockForm.scalar(S11, ExactScalar(2, 1)), FockForm.scalar(S11, ExactScalar(2, -1)))
    assert c == FockForm.scalar(S11, 5)


# derivatives -----------------------------------------------------------------

def test_partial_examples():
    u = zpp(S11, 1)
    sq = FockForm.monomial(S11, ONE, [u, u], [])
    assert partial_derivative(sq, u) == FockForm.var(S11, u, ExactScalar(2))
    assert partial_derivative(FockForm.var(S11, zp(S11, 1)), u).is_zero()
    f = FockForm.monomial(S11, ONE, [u, zp(S11, 2)], [(PRIME, 1, 2)])
    assert partial_derivative(f, u) == FockForm.monomial(S11, ONE, [zp(S11, 2)], [(PRIME, 1, 2)])


def test_inadmissible_variable():
    with pytest.raises(FockError):
        FockVariable(1, 1, PRIME).check(S11)


# omega basis -----------------------------------------------------------------

def test_omega_q1():
    want = wedge(xi(S11, PRIME, 1, 2), xi(S11, DPRIME, 1, 2))
    assert omega_basis_forms(1, 1, (1,), (1,)) == want


def test_omega_hatted_q1_is_one():
    assert omega_basis_forms(1, 1, (), (), hatted=True) == FockForm.scalar(S11, 1)


def test_omega_22_reference_interleaving():
    parts = [xi(S22, PRIME, 1, 3), xi(S22, DPRIME, 1, 3), xi(S22, PRIME, 2, 4), xi(S22, DPRIME, 1, 4)]
    w = parts[0]
    for x in parts[1:]:
        w = wedge(w, x)
    assert omega_basis_forms(2, 2, (1, 2), (1, 1)) == -w


def test_omega_index_range():
    with pytest.raises(FockError):
        omega_basis_forms(2, 2, (1, 3), (1, 1))
    with pytest.raises(FockError):
        omega_basis_forms(2, 2, (1,), (1, 1))


def test_text_format_is_canonical():
    f = FockForm.monomial(S11, ExactScalar(0, Fraction(-1, 8), -2), [zpp(S11, 1), zp(S11, 1)],
                          [(PRIME, 1, 2), (DPRIME, 1, 2)])
    assert f.to_text() == "-1/8i * pi^-2 * z''[1,1]*z'[1,2] * xi'[1,2]^xi''[1,2]"


# properties ------------------------------------------------------------------

sigs = st.sampled_from([Signature(1, 1), Signature(2, 1), Signature(1, 2), Signature(2, 2)])
seeds = st.integers(0, 2**32 - 1)


def _forms(sig, seed, k=3):
    rng = random.Random(seed)
    return [random_form(sig, rng, n_terms=3, max_gens=2, max_deg=2) for _ in range(k)]


@settings(max_examples=60, deadline=None)
@given(sigs, seeds)
def test_wedge_associative(sig, seed):
    a, b, c = _forms(sig, seed)
    assert wedge(wedge(a, b), c) == wedge(a, wedge(b, c))


@settings(max_examples=60, deadline=None)
@given(sigs, seeds)
def test_graded_commutative(sig, seed):
    a, b = _forms(sig, seed, 2)
    for (da, ea) in a.bidegrees():
        for (db, eb) in b.bidegrees():
            x, y = a.component(da, ea), b.component(db, eb)
            sign = -1 if ((da + ea) * (db + eb)) % 2 else 1
            assert wedge(x, y) == wedge(y, x).scale(ExactScalar(sign))


@settings(max_examples=60, deadline=None)
@given(sigs, seeds, st.data())
def test_partials_commute(sig, seed, data):
    (f,) = _forms(sig, seed, 1)
    vs = sig.variables()
    u = data.draw(st.sampled_from(vs))
    v = data.draw(st.sampled_from(vs))
    assert partial_derivative(partial_derivative(f, u), v) == partial_derivative(partial_derivative(f, v), u)


@settings(max_examples=60, deadline=None)
@given(sigs, seeds)
def test_no_zero_coefficients_stored(sig, seed):
    a, b, c = _forms(sig, seed)
    for f in (a + b, a - a, wedge(a, b), poly_mul(b, c), a.scale(I)):
        assert all(not coeff.is_zero for _, coeff in f)
    assert (a - a).is_zero() and len(a - a) == 0


@settings(max_examples=40, deadline=None)
@given(sigs, seeds)
def test_distributive(sig, seed):
    a, b, c = _forms(sig, seed)
    assert wedge(a, b + c) == wedge(a, b) + wedge(a, c)
    assert poly_mul(a + b, c) == poly_mul(a, c) + poly_mul(b, c)
