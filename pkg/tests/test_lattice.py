import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from unitheta.green import DomainPoint
from unitheta.lattice import (
    HermitianLattice, ImagQuadField, LatticeError, WeilRepFinite, box_oracle, enumerate_vectors,
    weil_rep_apply,
)


def lat(disc, entries):
    return HermitianLattice.diagonal(disc, entries)


def offdiag():
    F = ImagQuadField(-4)
    # [[2, omega], [conj omega, -2]]
    return HermitianLattice(F, [[(2, 0), (0, 1)], [F.conj((Fraction(0), Fraction(1))), (-2, 0)]])


LATTICES = {
    "i1": lambda: lat(-4, [1]),
    "w1": lambda: lat(-3, [1]),
    "i11": lambda: lat(-4, [1, -1]),
    "w11": lambda: lat(-3, [1, -1]),
    "off": offdiag,
    "i1m1m1": lambda: lat(-4, [1, -1, -1]),
}


# field -----------------------------------------------------------------------

def test_field_generators():
    F = ImagQuadField(-4)
    assert F.omega == pytest.approx(-2 + 1j)
    assert F.delta == pytest.approx(2j)
    G = ImagQuadField(-3)
    assert G.omega == pytest.approx((-3 + 1j * math.sqrt(3)) / 2)
    assert G.delta.imag > 0


@pytest.mark.parametrize("d", [-1, -8 * 4, 5, -12])
def test_field_rejects_nonfundamental(d):
    with pytest.raises(LatticeError):
        ImagQuadField(d)


# validation ------------------------------------------------------------------

def test_rejects_nonhermitian():
    F = ImagQuadField(-4)
    with pytest.raises(LatticeError):
        HermitianLattice(F, [[(1, 0), (0, 1)], [(0, 1), (-1, 0)]])


def test_rejects_singular():
    with pytest.raises(LatticeError):
        lat(-4, [1, 0])


def test_rejects_wrong_signature():
    F = ImagQuadField(-4)
    with pytest.raises(LatticeError):
        HermitianLattice(F, [[(1, 0), (0, 0)], [(0, 0), (-1, 0)]], signature=(2, 0))


def test_rejects_non_integral():
    F = ImagQuadField(-4)
    with pytest.raises(LatticeError):
        HermitianLattice(F, [[(Fraction(1, 2), 0)]])


def test_json_roundtrip(tmp_path):
    L = offdiag()
    p = tmp_path / "l.json"
    p.write_text(json.dumps(L.to_json()))
    M = HermitianLattice.load(str(p))
    assert M.gram == L.gram and M.signature == L.signature


# dual lattice / discriminant -------------------------------------------------

def test_dual_of_gaussian_integers():
    L = lat(-4, [1])
    D = L.discriminant_group
    assert D.order == 4
    # L# = (1/delta) O_F with delta = 2i: 1/(2i) lies in L# but not in L
    F = L.field
    x = 1 / F.delta
    a, b = np.linalg.solve(np.array([[1, F.omega.real], [0, F.omega.imag]]), [x.real, x.imag])
    h = [Fraction(a).limit_denominator(8), Fraction(b).limit_denominator(8)]
    assert D.index(h) != 0


def test_discriminant_orders():
    assert lat(-4, [1, -1]).discriminant_group.order == 16
    inv = lat(-4, [1, -1]).discriminant_group.invariants
    assert all(4 % d == 0 for d in inv)
    assert lat(-3, [1]).discriminant_group.order == 3


@pytest.mark.parametrize("name", LATTICES)
def test_order_is_trace_determinant(name):
    L = LATTICES[name]()
    det = abs(round(np.linalg.det(np.array(L.trace_gram, dtype=float))))
    assert L.discriminant_group.order == det
    assert math.prod(L.discriminant_group.invariants) == det


def test_trivial_coset_first():
    D = lat(-4, [1, -1]).discriminant_group
    assert not any(D.reps[0]) and D.value(0) == 0


@pytest.mark.parametrize("name", LATTICES)
def test_dual_pairs_integrally(name):
    L = LATTICES[name]()
    B = np.array(L.dual_basis, dtype=object)
    T = L.trace_gram
    N = len(T)
    for j in range(N):
        for i in range(N):
            s = sum(Fraction(T[i][k]) * B[k][j] for k in range(N))
            assert s.denominator == 1


# Weil representation ---------------------------------------------------------

@pytest.mark.parametrize("name", LATTICES)
def test_weil_unitary_and_relations(name):
    L = LATTICES[name]()
    W = WeilRepFinite(L)
    n = W.group.order
    S = W.S_matrix
    T = np.diag(W.T_diag)
    assert np.allclose(S @ S.conj().T, np.eye(n), atol=1e-12)
    assert np.allclose(np.abs(W.T_diag), 1, atol=1e-15)
    S2 = S @ S
    assert np.allclose(np.linalg.matrix_power(S @ T, 3), S2, atol=1e-11)
    S4 = S2 @ S2
    assert np.allclose(S4, S4[0, 0] * np.eye(n), atol=1e-12)
    rng = np.random.default_rng(0)
    v = rng.normal(size=n) + 1j * rng.normal(size=n)
    assert np.allclose(W.apply_word(["S"] * 8, v), v, atol=1e-12)


@pytest.mark.parametrize("name", LATTICES)
def test_dual_is_conjugate(name):
    L = LATTICES[name]()
    W, V = WeilRepFinite(L), WeilRepFinite(L, dual=True)
    assert np.allclose(V.S_matrix, W.S_matrix.conj())
    assert np.allclose(V.T_diag, W.T_diag.conj())


def test_printed_s_constant_breaks_braid_relation():
    L = lat(-4, [1, -1, -1])  # p - q odd
    W = WeilRepFinite(L)  # default exponent q - p = 1
    S, T = W.S_matrix, np.diag(W.T_diag)
    W2 = WeilRepFinite(L, s_phase_exponent=1 - 2)
    S2, T2 = W2.S_matrix, np.diag(W2.T_diag)
    assert np.allclose(np.linalg.matrix_power(S @ T, 3), S @ S)
    assert not np.allclose(np.linalg.matrix_power(S2 @ T2, 3), S2 @ S2)


@pytest.mark.parametrize("name", ["i11", "w11", "i1m1m1"])
def test_vectorised_s_matches_pairing(name):
    L = LATTICES[name]()
    W = WeilRepFinite(L)
    D = W.group
    c = W.S_matrix[0, 0]
    for mu in range(D.order):
        for h in range(0, D.order, 3):
            want = c * np.exp(-2j * np.pi * float(2 * D.pairing(mu, h)))
            assert abs(W.S_matrix[mu, h] - want) < 1e-12


def test_weil_examples():
    L = lat(-4, [1, -1])
    W = WeilRepFinite(L)
    n = W.group.order
    e0 = np.zeros(n, complex)
    e0[0] = 1
    assert np.allclose(weil_rep_apply(W, "T", e0), e0)
    assert np.allclose(weil_rep_apply(W, "S", e0), np.ones(n) / math.sqrt(n))
    with pytest.raises(LatticeError):
        weil_rep_apply(W, "S", np.ones(n + 1))
    with pytest.raises(LatticeError):
        weil_rep_apply(W, "U", e0)


# enumeration -----------------------------------------------------------------

def test_enumerate_positive_definite():
    L = lat(-4, [1])
    E = enumerate_vectors(L, [0, 0], 1, np.eye(1), 10)
    got = {(round(v.real), round(v.imag)) for v in E.vectors[:, 0]}
    assert got == {(1, 0), (-1, 0), (0, 1), (0, -1)} and E.count == 4
    E2 = enumerate_vectors(L, [0, 0], 2, np.eye(1), 10)
    assert E2.count == 4
    assert np.allclose(np.abs(E2.vectors[:, 0]) ** 2, 2)
    assert enumerate_vectors(L, [0, 0], -2, np.eye(1), 50).count == 0


def test_enumerate_indefinite_base_point():
    L = lat(-4, [1, -1])
    z = DomainPoint.base(1, 1)
    E = enumerate_vectors(L, [0] * 4, 0, z.ginv, 10)
    assert E.coords == box_oracle(L, [0] * 4, 0, z.ginv, 10)
    assert E.count > 1


def test_enumeration_is_lexicographic():
    L = lat(-4, [1, -1])
    z = DomainPoint.random(1, 1, np.random.default_rng(3))
    E = enumerate_vectors(L, [0] * 4, None, z.ginv, 15)
    rows = [tuple(r) for r in E.numerators.tolist()]
    assert rows == sorted(rows) and len(set(rows)) == len(rows)


def _check_complete(L, z, bound, data):
    ginv = z.ginv if z is not None else np.eye(L.n)
    D = L.discriminant_group
    h = D.reps[data.draw(st.integers(0, D.order - 1))]
    for two_m in (None, L.norm(h), L.norm(h) + 2):
        assert enumerate_vectors(L, h, two_m, ginv, bound).coords == box_oracle(L, h, two_m, ginv, bound)


RANK_LE_2 = sorted(n for n in LATTICES if n != "i1m1m1")


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(RANK_LE_2), st.integers(0, 10**6), st.floats(1, 50), st.data())
def test_enumeration_complete(name, seed, bound, data):
    L = LATTICES[name]()
    p, q = L.signature
    z = DomainPoint.random(p, q, np.random.default_rng(seed), 0.4) if q else None
    _check_complete(L, z, bound, data)


@settings(max_examples=6, deadline=None)
@given(st.integers(0, 10**6), st.floats(1, 4), st.data())
def test_enumeration_complete_rank3(seed, bound, data):
    # the oracle box grows like B^3 times the majorant eccentricity, so small B only
    L = LATTICES["i1m1m1"]()
    z = DomainPoint.random(1, 2, np.random.default_rng(seed), 0.3)
    _check_complete(L, z, bound, data)


@settings(max_examples=20, deadline=None)
@given(st.sampled_from(["i11", "w11", "off"]), st.integers(0, 10**6), st.data())
def test_negation_symmetry(name, seed, data):
    L = LATTICES[name]()
    z = DomainPoint.random(1, 1, np.random.default_rng(seed))
    D = L.discriminant_group
    i = data.draw(st.integers(0, D.order - 1))
    h, mh = D.reps[i], D.reps[D.neg(i)]
    a = enumerate_vectors(L, h, None, z.ginv, 12)
    b = enumerate_vectors(L, mh, None, z.ginv, 12)
    neg = sorted(tuple(-x for x in c) for c in a.coords)
    assert neg == sorted(b.coords)
    assert sorted(a.norms) == sorted(b.norms)


@pytest.mark.parametrize("workers", [2, 4, 8])
def test_sharding_is_bit_identical(workers):
    L = lat(-4, [1, -1, -1])
    z = DomainPoint.random(1, 2, np.random.default_rng(11))
    a = enumerate_vectors(L, [0] * 6, None, z.ginv, 12)
    b = enumerate_vectors(L, [0] * 6, None, z.ginv, 12, workers=workers)
    assert np.array_equal(a.numerators, b.numerators)
    assert a.vectors.tobytes() == b.vectors.tobytes()


def test_exact_norm_filter():
    L = offdiag()
    z = DomainPoint.random(1, 1, np.random.default_rng(5))
    E = enumerate_vectors(L, [0] * 4, None, z.ginv, 25)
    for c, n in zip(E.coords, E.norms):
        assert L.norm(c) == n
    for two_m in set(E.norms):
        F = enumerate_vectors(L, [0] * 4, two_m, z.ginv, 25)
        assert all(n == two_m for n in F.norms)
