"""Weil representation operators in the Fock model (lambda = 2 pi i).

Covers the action of u(p,q) and u(r,s) basis elements on FockForms, the
exterior differentials del and delbar, the lowering operator L, the forms
phi_KM and psi, and exact checks of the identities they satisfy.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Tuple

from .fock import (
    DPRIME,
    I,
    ONE,
    PI,
    PRIME,
    ExactScalar,
    FockError,
    FockForm,
    FockVariable,
    Signature,
    _accumulate,
    _check_gen,
    _merge_ext,
    _wrap,
    canonical_ext,
    euler_operator,
    gen,
    left_ext,
    multi_indices,
    multiply_vars,
    omega_basis_forms,
    partial_derivative,
    second_partial,
    zp,
    zpp,
)

LAMBDA = ExactScalar(0, 2, 1)  # 2 pi i

FAMILIES_G = ("Zp_k", "Zpp_k", "Zp_pplus", "Zpp_pminus")
FAMILIES_GPRIME = ("Kprime_ab", "Kprime_uv", "Pprime_plus", "Pprime_minus")


@dataclass(frozen=True)
class LieBasisElement:
    family: str
    indices: Tuple[int, int]

    def check(self, sig: Signature) -> None:
        i, j = self.indices
        p, m, r, n = sig.p, sig.m, sig.r, sig.r + sig.s
        pos = lambda x: 1 <= x <= p
        neg = lambda x: p < x <= m
        first = lambda x: 1 <= x <= r
        second = lambda x: r < x <= n
        ok = {
            "Zp_k": (pos(i) and pos(j)) or (neg(i) and neg(j)),
            "Zpp_k": (pos(i) and pos(j)) or (neg(i) and neg(j)),
            "Zp_pplus": pos(i) and neg(j),
            "Zpp_pminus": pos(i) and neg(j),
            "Kprime_ab": first(i) and first(j),
            "Kprime_uv": second(i) and second(j),
            "Pprime_plus": first(i) and second(j),
            "Pprime_minus": first(i) and second(j),
        }.get(self.family)
        if ok is None:
            raise FockError(f"unknown family {self.family!r}")
        if not ok:
            raise FockError(f"indices {self.indices} invalid for {self.family} on {sig}")


def _v(sig: Signature, i: int, w: int) -> FockVariable:
    from .fock import admissible_kind

    return FockVariable(i, w, admissible_kind(sig, i, w))


def _first(sig: Signature) -> range:
    return range(1, sig.r + 1)


def _second(sig: Signature) -> range:
    return range(sig.r + 1, sig.r + sig.s + 1)


def _zp_k(sig: Signature, i: int, j: int, f: FockForm) -> FockForm:
    """omega(Z'_{ij}) for i, j both positive or both negative indices."""
    out = FockForm(sig)
    half_rs = Fraction(sig.r - sig.s, 2)
    if i <= sig.p:
        for a in _first(sig):
            out = out - euler_operator(f, _v(sig, i, a), _v(sig, j, a))
        for u in _second(sig):
            out = out + euler_operator(f, _v(sig, j, u), _v(sig, i, u))
    else:
        for a in _first(sig):
            out = out - euler_operator(f, _v(sig, j, a), _v(sig, i, a))
        for u in _second(sig):
            out = out + euler_operator(f, _v(sig, i, u), _v(sig, j, u))
    if i == j and half_rs:
        out = out - f.scale(ExactScalar(half_rs))
    return out


def act_g(elem: LieBasisElement, f: FockForm) -> FockForm:
    """Weil action of a u(p,q) basis element on the polynomial part of f."""
    sig = f.sig
    if elem.family not in FAMILIES_G:
        raise FockError(f"{elem.family} is not a u(p,q) family")
    elem.check(sig)
    i, j = elem.indices
    two_i_lam = ExactScalar(0, 2) * LAMBDA
    inv = two_i_lam.inverse()
    if elem.family == "Zp_k":
        return _zp_k(sig, i, j, f)
    if elem.family == "Zpp_k":
        return -_zp_k(sig, j, i, f)
    out = FockForm(sig)
    alpha, mu = i, j
    if elem.family == "Zp_pplus":
        for a in _first(sig):
            out = out + multiply_vars(f, (_v(sig, alpha, a), _v(sig, mu, a)), -inv)
        for u in _second(sig):
            out = out + second_partial(f, _v(sig, alpha, u), _v(sig, mu, u)).scale(two_i_lam)
    else:
        for a in _first(sig):
            out = out + second_partial(f, _v(sig, alpha, a), _v(sig, mu, a)).scale(two_i_lam)
        for u in _second(sig):
            out = out + multiply_vars(f, (_v(sig, alpha, u), _v(sig, mu, u)), -inv)
    return out


def act_gprime(elem: LieBasisElement, f: FockForm) -> FockForm:
    """Weil action of a u(r,s) basis element on the polynomial part of f."""
    sig = f.sig
    if elem.family not in FAMILIES_GPRIME:
        raise FockError(f"{elem.family} is not a u(r,s) family")
    elem.check(sig)
    x, y = elem.indices
    two_i = ExactScalar(0, 2)
    out = FockForm(sig)
    if elem.family in ("Kprime_ab", "Kprime_uv"):
        if elem.family == "Kprime_ab":
            for al in sig.alphas():
                out = out + euler_operator(f, _v(sig, al, y), _v(sig, al, x))
            for mu in sig.mus():
                out = out - euler_operator(f, _v(sig, mu, x), _v(sig, mu, y))
        else:
            for al in sig.alphas():
                out = out + euler_operator(f, _v(sig, al, x), _v(sig, al, y))
            for mu in sig.mus():
                out = out - euler_operator(f, _v(sig, mu, y), _v(sig, mu, x))
        out = out.scale(two_i)
        if x == y and sig.p != sig.q:
            out = out + f.scale(ExactScalar(0, sig.p - sig.q))
        return out
    a, u = x, y
    four_lam = LAMBDA * 4
    inv_lam = LAMBDA.inverse()
    if elem.family == "Pprime_plus":
        for al in sig.alphas():
            out = out + multiply_vars(f, (_v(sig, al, a), _v(sig, al, u)), inv_lam)
        for mu in sig.mus():
            out = out + second_partial(f, _v(sig, mu, a), _v(sig, mu, u)).scale(four_lam)
    else:
        for al in sig.alphas():
            out = out - second_partial(f, _v(sig, al, a), _v(sig, al, u)).scale(four_lam)
        for mu in sig.mus():
            out = out - multiply_vars(f, (_v(sig, mu, a), _v(sig, mu, u)), inv_lam)
    return out


def _need11(f: FockForm) -> Signature:
    if (f.sig.r, f.sig.s) != (1, 1):
        raise FockError(f"needs r = s = 1, got {f.sig}")
    return f.sig


def weight_operator(f: FockForm) -> FockForm:
    """omega of (1/2)(w1 o w1 + w2 o w2), the generator of k'."""
    sig = _need11(f)
    a = act_gprime(LieBasisElement("Kprime_ab", (1, 1)), f)
    b = act_gprime(LieBasisElement("Kprime_uv", (2, 2)), f)
    return (a + b).scale(ExactScalar(Fraction(1, 2)))


def lowering_L(f: FockForm) -> FockForm:
    """L = -(i/2) omega(w1 o w2 + i w1 o w2 i)."""
    _need11(f)
    g = act_gprime(LieBasisElement("Pprime_minus", (1, 2)), f)
    return g.scale(ExactScalar(0, Fraction(-1, 2)))


def lowering_L_explicit(f: FockForm) -> FockForm:
    """-4 pi sum_gamma d^2/dz''_gamma dz'_gamma + (1/4 pi) sum_mu z''_mu z'_mu."""
    sig = _need11(f)
    out = FockForm(sig)
    for g in sig.alphas():
        out = out + second_partial(f, zpp(sig, g), zp(sig, g)).scale(PI * -4)
    for mu in sig.mus():
        out = out + multiply_vars(f, (zpp(sig, mu), zp(sig, mu)), PI.inverse() * Fraction(1, 4))
    return out


def _d_operator(f: FockForm, bar: bool) -> FockForm:
    sig = _need11(f)
    quarter_inv_pi = PI.inverse() * Fraction(1, 4)
    minus_4pi = PI * -4
    out = FockForm(sig)
    for al in sig.alphas():
        for mu in sig.mus():
            if not bar:
                g = multiply_vars(f, (zpp(sig, al), zp(sig, mu)), quarter_inv_pi)
                g = g + second_partial(f, zp(sig, al), zpp(sig, mu)).scale(minus_4pi)
                out = out + left_ext(g, PRIME, al, mu)
            else:
                g = multiply_vars(f, (zp(sig, al), zpp(sig, mu)), quarter_inv_pi)
                g = g + second_partial(f, zpp(sig, al), zp(sig, mu)).scale(minus_4pi)
                out = out + left_ext(g, DPRIME, al, mu)
    return out


def del_(f: FockForm) -> FockForm:
    return _d_operator(f, bar=False)


def delbar(f: FockForm) -> FockForm:
    return _d_operator(f, bar=True)


def _sgn(n: int) -> int:
    return -1 if n % 2 else 1


def build_phi_prime(p: int, q: int) -> FockForm:
    """phi_KM with all constants dropped."""
    sig = Signature(p, q)
    out = FockForm(sig)
    for al in multi_indices(p, q):
        for be in multi_indices(p, q):
            omega = omega_basis_forms(p, q, al, be)
            vs = [zpp(sig, a) for a in al] + [zp(sig, b) for b in be]
            out = out + multiply_vars(omega, vs)
    return out


def _hat_separated(p: int, q: int, al, be) -> FockForm:
    """Sum over j of the separated (all xi' then all xi'') wedge with slot p+j omitted."""
    sig = Signature(p, q)
    out = FockForm(sig)
    for j in range(1, q + 1):
        slots = [p + t for t in range(1, q + 1) if t != j]
        factors = [(PRIME, a, mu) for a, mu in zip(al, slots)]
        factors += [(DPRIME, b, mu) for b, mu in zip(be, slots)]
        out = out + FockForm.monomial(sig, ONE, (), factors)
    return out


def build_psi_prime(p: int, q: int) -> FockForm:
    """psi with constants dropped, wedges written in separated order."""
    sig = Signature(p, q)
    out = FockForm(sig)
    for al in multi_indices(p, q - 1):
        for be in multi_indices(p, q - 1):
            vs = [zpp(sig, a) for a in al] + [zp(sig, b) for b in be]
            out = out + multiply_vars(_hat_separated(p, q, al, be), vs)
    return out


def build_phi_km(p: int, q: int) -> FockForm:
    if p < 1 or q < 1:
        raise FockError("p, q must be positive")
    c = ExactScalar(Fraction(_sgn(q), 2 ** (3 * q)), 0, -2 * q)
    return build_phi_prime(p, q).scale(c)


def build_psi(p: int, q: int) -> FockForm:
    if p < 1 or q < 1:
        raise FockError("p, q must be positive")
    sig = Signature(p, q)
    c = ExactScalar(0, Fraction(2, 2 ** (3 * (q - 1))), -2 * (q - 1))
    out = FockForm(sig)
    for al in multi_indices(p, q - 1):
        for be in multi_indices(p, q - 1):
            vs = [zpp(sig, a) for a in al] + [zp(sig, b) for b in be]
            out = out + multiply_vars(omega_basis_forms(p, q, al, be, hatted=True), vs)
    return out.scale(c)


def dc(f: FockForm) -> FockForm:
    """d^c = (del - delbar) / (4 pi i)."""
    return (del_(f) - delbar(f)).scale((PI * ExactScalar(0, 4)).inverse())


def ddc(f: FockForm) -> FockForm:
    """d d^c = -(1/(4 pi i)) del delbar."""
    return del_(delbar(f)).scale(-(PI * ExactScalar(0, 4)).inverse())


def dc_psi_fock(p: int, q: int) -> FockForm:
    return dc(build_psi(p, q))


def dc_psi_displays(p: int, q: int) -> Tuple[FockForm, FockForm]:
    """Hand expansions of del psi and delbar psi, term by term.

    Constant i / (2^(3q-2) pi^(2q-1)), xi' block written before the xi''
    block. With this wedge order the pair equals (-1)^(q-1) (del psi,
    delbar psi) exactly; see verify_dc_displays.
    """
    sig = Signature(p, q)
    c = ExactScalar(0, Fraction(1, 2 ** (3 * q - 2)), -(2 * q - 1))
    d1 = FockForm(sig)
    d2 = FockForm(sig)
    for al in multi_indices(p, q - 1):
        for be in multi_indices(p, q - 1):
            base = [zpp(sig, a) for a in al] + [zp(sig, b) for b in be]
            for g in sig.alphas():
                for j in range(1, q + 1):
                    slots = [p + t for t in range(1, q + 1) if t != j]
                    # xi' factors: alpha entries in their slots plus gamma at p+j
                    prim = sorted([(mu, a) for a, mu in zip(al, slots)] + [(p + j, g)])
                    f1 = [(PRIME, a, mu) for mu, a in prim]
                    f1 += [(DPRIME, b, mu) for b, mu in zip(be, slots)]
                    d1 = d1 + FockForm.monomial(
                        sig, c * _sgn(j - 1), base + [zpp(sig, g), zp(sig, p + j)], f1
                    )
                    dpr = sorted([(mu, b) for b, mu in zip(be, slots)] + [(p + j, g)])
                    f2 = [(PRIME, a, mu) for a, mu in zip(al, slots)]
                    f2 += [(DPRIME, b, mu) for mu, b in dpr]
                    d2 = d2 + FockForm.monomial(
                        sig, c * _sgn(q + j), base + [zp(sig, g), zpp(sig, p + j)], f2
                    )
    return d1, d2


# k-action on exterior generators ---------------------------------------


def _k_on_generator(elem: LieBasisElement, g: Tuple[int, int, int], p: int):
    """Image of one generator under Z'_{ij}; list of (coeff, generator)."""
    i, j = elem.indices
    mu0, kind, a0 = g
    if elem.family != "Zp_k":
        raise FockError("exterior k-action implemented for Zp_k")
    out = []
    if i <= p:
        # Z'_{alpha beta}
        if kind == 0 and a0 == i:
            out.append((1, (mu0, 0, j)))
        if kind == 1 and a0 == j:
            out.append((-1, (mu0, 1, i)))
    else:
        # Z'_{mu nu}
        if kind == 0 and mu0 == j:
            out.append((-1, (i, 0, a0)))
        if kind == 1 and mu0 == i:
            out.append((1, (j, 1, a0)))
    return out


def k_action_ext(elem: LieBasisElement, f: FockForm) -> FockForm:
    """Derivation extension of the k-action to exterior monomials."""
    elem.check(f.sig)
    out: Dict = {}
    for (e, pm), c in f.terms.items():
        for pos, g in enumerate(e):
            for k, ng in _k_on_generator(elem, g, f.sig.p):
                new = list(e)
                new[pos] = ng
                sign, ne = canonical_ext(new)
                if sign:
                    _accumulate(out, (ne, pm), c * (sign * k))
    return _wrap(f.sig, out)


def k_action(elem: LieBasisElement, f: FockForm) -> FockForm:
    """Full k-action: Weil action on coefficients plus action on the wedge."""
    return act_g(elem, f) + k_action_ext(elem, f)


def k_basis(p: int, q: int) -> List[LieBasisElement]:
    m = p + q
    out = [LieBasisElement("Zp_k", (a, b)) for a in range(1, p + 1) for b in range(1, p + 1)]
    out += [LieBasisElement("Zp_k", (a, b)) for a in range(p + 1, m + 1) for b in range(p + 1, m + 1)]
    return out


# reports ----------------------------------------------------------------


@dataclass
class IdentityReport:
    name: str
    p: int
    q: int
    holds: bool
    terms_lhs: int
    terms_rhs: int
    residual: FockForm = field(repr=False, default=None)

    def line(self) -> str:
        status = "OK" if self.holds else "FAIL"
        return (
            f"({self.p},{self.q}) identity={self.name} status={status} "
            f"terms_lhs={self.terms_lhs} terms_rhs={self.terms_rhs}"
        )


def verify_main_identity(p: int, q: int) -> IdentityReport:
    """L phi'_KM == (-1)^{q-1} 4 pi del delbar psi'."""
    lhs = lowering_L(build_phi_prime(p, q))
    rhs = del_(delbar(build_psi_prime(p, q))).scale(PI * (4 * _sgn(q - 1)))
    res = lhs - rhs
    return IdentityReport("main", p, q, res.is_zero(), len(lhs), len(rhs), res)


def verify_lddc(p: int, q: int) -> IdentityReport:
    """omega(L) phi_KM == (-1)^(q-1) d d^c psi with all constants."""
    lhs = lowering_L(build_phi_km(p, q))
    rhs = ddc(build_psi(p, q)).scale(ExactScalar(_sgn(q - 1)))
    res = lhs - rhs
    return IdentityReport("lddc", p, q, res.is_zero(), len(lhs), len(rhs), res)


def verify_dc_displays(p: int, q: int) -> IdentityReport:
    d1, d2 = dc_psi_displays(p, q)
    psi = build_psi(p, q)
    s = ExactScalar(_sgn(q - 1))
    res = (d1 - del_(psi).scale(s)) + (d2 - delbar(psi).scale(s))
    return IdentityReport("dc", p, q, res.is_zero(), len(d1), len(d2), res)


def verify_weights(p: int, q: int) -> IdentityReport:
    phi = build_phi_km(p, q)
    psi = build_psi(p, q)
    r1 = weight_operator(phi) - phi.scale(ExactScalar(0, p + q))
    r2 = weight_operator(psi) - psi.scale(ExactScalar(0, p + q - 2))
    res = r1 + r2
    return IdentityReport("weights", p, q, r1.is_zero() and r2.is_zero(), len(phi), len(psi), res)


def verify_k_invariance(p: int, q: int, form: str = "psi") -> IdentityReport:
    f = build_psi(p, q) if form == "psi" else build_phi_km(p, q)
    res = FockForm(f.sig)
    ok = True
    for z in k_basis(p, q):
        r = k_action(z, f)
        if not r.is_zero():
            ok = False
            res = res + r
    return IdentityReport("kinv", p, q, ok, len(f), 0, res)


def verify_euler_counts(p: int, q: int) -> bool:
    sig = Signature(p, q)
    psi = build_psi(p, q)
    a = FockForm(sig)
    b = FockForm(sig)
    for al in sig.alphas():
        a = a + euler_operator(psi, zpp(sig, al), zpp(sig, al))
        b = b + euler_operator(psi, zp(sig, al), zp(sig, al))
    target = psi.scale(q - 1)
    return a == target and b == target


IDENTITIES = {
    "main": verify_main_identity,
    "kinv": verify_k_invariance,
    "weights": verify_weights,
}
# cross-checks outside the three families; only run when named
EXTRA_IDENTITIES = {
    "lddc": verify_lddc,
    "dc": verify_dc_displays,
}
