"""Schrodinger-model side: the operators D_alpha, Dbar_alpha acting on
polynomials times the standard Gaussian phi_0 = exp(-pi |z|^2).

Polynomials live in the commuting indeterminates z_1..z_p, zb_1..zb_p, where
zb stands for the complex conjugate coordinate.  Conventions:

    D_alpha    = zb_alpha - (1/pi) d/dz_alpha
    Dbar_alpha = z_alpha  - (1/pi) d/dzb_alpha

so D_alpha phi_0 = 2 zb_alpha phi_0 and Dbar_alpha phi_0 = 2 z_alpha phi_0.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, factorial
from typing import Dict, Iterable, List, Sequence, Tuple

import numpy as np

from .fock import ONE, ZERO, ExactScalar, FockError, FockForm, Signature, multi_indices, multiply_vars, zp, zpp

Mono = Tuple[int, ...]


def _inv_pi(n: int = 1) -> ExactScalar:
    return ExactScalar(1, 0, -n)


class GaussianPolynomial:
    """Exact polynomial P in z, zb standing for P * phi_0."""

    __slots__ = ("p", "terms")

    def __init__(self, p: int, terms: Dict[Mono, ExactScalar] = None):
        self.p = p
        self.terms: Dict[Mono, ExactScalar] = {}
        for k, c in (terms or {}).items():
            if len(k) != 2 * p:
                raise FockError("monomial length must be 2p")
            if not c.is_zero:
                self.terms[k] = c

    @classmethod
    def one(cls, p: int) -> "GaussianPolynomial":
        return cls(p, {(0,) * (2 * p): ONE})

    @classmethod
    def monomial(cls, p: int, c, z: Sequence[int] = (), zb: Sequence[int] = ()) -> "GaussianPolynomial":
        """c * prod z_{i} for i in z * prod zb_{j} for j in zb (1-based, repeats allowed)."""
        e = [0] * (2 * p)
        for i in z:
            e[i - 1] += 1
        for j in zb:
            e[p + j - 1] += 1
        c = c if isinstance(c, ExactScalar) else ExactScalar.of(c)
        return cls(p, {tuple(e): c})

    def __eq__(self, other) -> bool:
        return isinstance(other, GaussianPolynomial) and self.p == other.p and self.terms == other.terms

    def __add__(self, other: "GaussianPolynomial") -> "GaussianPolynomial":
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out.get(k, ZERO) + c
        return GaussianPolynomial(self.p, out)

    def __neg__(self):
        return GaussianPolynomial(self.p, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "GaussianPolynomial":
        c = c if isinstance(c, ExactScalar) else ExactScalar.of(c)
        return GaussianPolynomial(self.p, {k: v * c for k, v in self.terms.items()})

    def __mul__(self, other: "GaussianPolynomial") -> "GaussianPolynomial":
        out: Dict[Mono, ExactScalar] = {}
        for k1, c1 in self.terms.items():
            for k2, c2 in other.terms.items():
                k = tuple(a + b for a, b in zip(k1, k2))
                out[k] = out.get(k, ZERO) + c1 * c2
        return GaussianPolynomial(self.p, out)

    def mul_var(self, idx: int) -> "GaussianPolynomial":
        out = {}
        for k, c in self.terms.items():
            e = list(k)
            e[idx] += 1
            out[tuple(e)] = c
        return GaussianPolynomial(self.p, out)

    def diff(self, idx: int) -> "GaussianPolynomial":
        out: Dict[Mono, ExactScalar] = {}
        for k, c in self.terms.items():
            if k[idx]:
                e = list(k)
                e[idx] -= 1
                out[tuple(e)] = out.get(tuple(e), ZERO) + c * k[idx]
        return GaussianPolynomial(self.p, out)

    def degree(self) -> int:
        return max((sum(k) for k in self.terms), default=-1)

    def homogeneous(self, d: int) -> "GaussianPolynomial":
        return GaussianPolynomial(self.p, {k: c for k, c in self.terms.items() if sum(k) == d})

    def components(self) -> Dict[int, "GaussianPolynomial"]:
        """Homogeneous pieces keyed by half the total degree (the index l of P_{;2l})."""
        out: Dict[int, GaussianPolynomial] = {}
        for d in sorted({sum(k) for k in self.terms}):
            if d % 2:
                raise ValueError("odd-degree component")
            out[d // 2] = self.homogeneous(d)
        return out

    def constant_term(self) -> ExactScalar:
        return self.terms.get((0,) * (2 * self.p), ZERO)

    def substitute_scale(self, w: ExactScalar) -> "GaussianPolynomial":
        """P(w x): z -> w z and zb -> conj(w) zb, for a Gaussian rational w."""
        wb = w.conjugate()
        out = {}
        for k, c in self.terms.items():
            out[k] = c * w ** sum(k[: self.p]) * wb ** sum(k[self.p:])
        return GaussianPolynomial(self.p, out)

    def to_text(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for k in sorted(self.terms, key=lambda e: (-sum(e), tuple(-x for x in e))):
            c = self.terms[k]
            mono = []
            for i, e in enumerate(k):
                if e:
                    name = f"z{i + 1}" if i < self.p else f"zb{i - self.p + 1}"
                    mono.append(name + (f"^{e}" if e > 1 else ""))
            parts.append(f"({c.to_text()})" + ("*" + "*".join(mono) if mono else ""))
        return " + ".join(parts)

    def compile(self) -> "CompiledPoly":
        return CompiledPoly.from_poly(self)

    def __repr__(self):
        return f"GaussianPolynomial(p={self.p}, {self.to_text()})"


@dataclass
class CompiledPoly:
    """Float evaluator for a GaussianPolynomial, split by homogeneous degree."""

    p: int
    coeffs: np.ndarray
    exps: np.ndarray
    degrees: np.ndarray

    @classmethod
    def from_poly(cls, P: GaussianPolynomial) -> "CompiledPoly":
        keys = sorted(P.terms)
        coeffs = np.array([complex(P.terms[k]) for k in keys], dtype=complex)
        exps = np.array(keys, dtype=int).reshape(len(keys), 2 * P.p)
        return cls(P.p, coeffs, exps, exps.sum(axis=1) if len(keys) else np.zeros(0, int))

    def monomials(self, x: np.ndarray) -> np.ndarray:
        """Values of each monomial at the point with z = x[:p], zb = conj(x[:p])."""
        x = np.asarray(x, dtype=complex)[: self.p]
        vals = np.concatenate([x, np.conj(x)])
        return np.prod(vals[None, :] ** self.exps, axis=1)

    def eval(self, x: np.ndarray) -> complex:
        return complex(np.dot(self.coeffs, self.monomials(x)))

    def eval_components(self, x: np.ndarray, max_half_degree: int) -> np.ndarray:
        """Array c[l] = P_{;2l}(x) for l = 0..max_half_degree."""
        mon = self.monomials(x) * self.coeffs
        out = np.zeros(max_half_degree + 1, dtype=complex)
        for d, v in zip(self.degrees, mon):
            if d % 2:
                raise ValueError("odd-degree monomial in an even polynomial")
            out[d // 2] += v
        return out


def apply_D(f: GaussianPolynomial, alpha: int, conjugated: bool = False) -> GaussianPolynomial:
    """D_alpha (or Dbar_alpha) applied to f * phi_0, returned as a polynomial."""
    if not 1 <= alpha <= f.p:
        raise FockError(f"alpha={alpha} out of range 1..{f.p}")
    zi = alpha - 1
    zbi = f.p + alpha - 1
    mul_idx, diff_idx = (zi, zbi) if conjugated else (zbi, zi)
    return f.mul_var(mul_idx).scale(2) - f.diff(diff_idx).scale(_inv_pi())


def apply_word(p: int, alphas: Iterable[int], betas: Iterable[int]) -> GaussianPolynomial:
    f = GaussianPolynomial.one(p)
    for b in betas:
        f = apply_D(f, b, conjugated=True)
    for a in alphas:
        f = apply_D(f, a)
    return f


def power_formula(l: int, k: int, alpha: int, p: int = None) -> GaussianPolynomial:
    """Closed form of D_alpha^l Dbar_alpha^k phi_0 / phi_0."""
    if l < 0 or k < 0:
        raise FockError("exponents must be nonnegative")
    p = p or alpha
    out = GaussianPolynomial(p)
    for m in range(l + 1):
        for n in range(min(m, k) + 1):
            c = Fraction(2 ** k * comb(l, m) * comb(m, n) * factorial(k), factorial(k - n))
            c *= (-1) ** n
            out = out + GaussianPolynomial.monomial(
                p, ExactScalar(c, 0, -n), z=[alpha] * (k - n), zb=[alpha] * (l - n)
            )
    return out


def laguerre_coefficients(k: int) -> List[Fraction]:
    """Coefficients of L_k(t) from (e^t/k!) (d/dt)^k (e^{-t} t^k), computed by
    differentiating the product e^{-t} * poly symbolically."""
    # represent g(t) = e^{-t} * sum a_j t^j by the list a
    a = [Fraction(0)] * k + [Fraction(1)]
    for _ in range(k):
        # d/dt (e^{-t} A(t)) = e^{-t} (A' - A)
        deriv = [Fraction(j) * a[j] for j in range(1, len(a))] + [Fraction(0)]
        a = [deriv[j] - a[j] for j in range(len(a))]
    return [x / factorial(k) for x in a]


def laguerre_identity_sides(k: int, alpha: int = 1, p: int = None, literal_sign: bool = False):
    """Both sides of (D Dbar)^k phi_0 = c^k 2^k k! L_k(2 pi |z|^2) phi_0.

    With ``literal_sign`` c = 1/pi, otherwise c = -1/pi.
    """
    p = p or alpha
    lhs = GaussianPolynomial.one(p)
    for _ in range(k):
        lhs = apply_D(apply_D(lhs, alpha, conjugated=True), alpha)
    c = ExactScalar(1 if literal_sign else -1, 0, -1)
    front = c ** k * (2 ** k * factorial(k))
    rhs = GaussianPolynomial(p)
    for j, a in enumerate(laguerre_coefficients(k)):
        # (2 pi z zb)^j
        rhs = rhs + GaussianPolynomial.monomial(
            p, front * ExactScalar(a * 2 ** j, 0, j), z=[alpha] * j, zb=[alpha] * j
        )
    return lhs, rhs


def laguerre_identity_check(k: int, alpha: int = 1, literal_sign: bool = False) -> bool:
    lhs, rhs = laguerre_identity_sides(k, alpha, literal_sign=literal_sign)
    return lhs == rhs


def compute_P(p: int, q: int, alphas: Sequence[int], betas: Sequence[int]) -> GaussianPolynomial:
    """P_{alphas, betas} = D_alphas Dbar_betas phi_0 / phi_0."""
    if len(alphas) != q - 1 or len(betas) != q - 1:
        raise FockError(f"multi-indices must have length {q - 1}")
    for a in tuple(alphas) + tuple(betas):
        if not 1 <= a <= p:
            raise FockError(f"index {a} out of range 1..{p}")
    return apply_word(p, alphas, betas)


def all_P(p: int, q: int) -> Dict[Tuple[Tuple[int, ...], Tuple[int, ...]], GaussianPolynomial]:
    out = {}
    for al in multi_indices(p, q - 1):
        for be in multi_indices(p, q - 1):
            out[(al, be)] = compute_P(p, q, al, be)
    return out


@dataclass
class PolyReport:
    p: int
    q: int
    pairs: int
    failures: List[str] = field(default_factory=list)

    @property
    def holds(self) -> bool:
        return not self.failures


def _multiplicity_factor(al: Sequence[int], be: Sequence[int]) -> int:
    if sorted(al) != sorted(be):
        return 0
    out = 1
    for a in set(al):
        out *= factorial(list(al).count(a))
    return out


def check_polyexpl(p: int, q: int) -> PolyReport:
    """Degree, leading term, parity and constant term of every P_{alphas, betas}."""
    n = q - 1
    polys = all_P(p, q)
    rep = PolyReport(p, q, len(polys))
    for (al, be), P in polys.items():
        tag = f"{al};{be}"
        if P.degree() != 2 * n:
            rep.failures.append(f"{tag}: degree {P.degree()}")
        lead = GaussianPolynomial.monomial(p, ExactScalar(2 ** (2 * n)), z=be, zb=al)
        if P.homogeneous(2 * n) != lead:
            rep.failures.append(f"{tag}: leading term")
        if any(sum(k) % 2 for k in P.terms):
            rep.failures.append(f"{tag}: odd monomial")
        want = ExactScalar(Fraction(2 ** n * (-1) ** n * _multiplicity_factor(al, be)), 0, -n)
        if P.constant_term() != want:
            rep.failures.append(f"{tag}: constant term {P.constant_term()} != {want}")
    return rep


# bridge to the Fock model ---------------------------------------------

# Under the intertwiner D_alpha -> c z''_alpha and Dbar_beta -> c z'_beta with
# c = -i/(sqrt(2) pi); c^2 = -1/(2 pi^2) is exact.
C_SQUARED = ExactScalar(Fraction(-1, 2), 0, -2)


def schrodinger_front(q: int, form: str) -> ExactScalar:
    if form == "phi":
        return ExactScalar(Fraction(1, 2 ** (2 * q)))
    n = q - 1
    return ExactScalar(0, Fraction(2 * (-1) ** n, 2 ** (2 * n)))


def fock_image(p: int, q: int, form: str) -> FockForm:
    """Fock image of the Schrodinger construction of phi_KM or psi."""
    from .fock import omega_basis_forms

    sig = Signature(p, q)
    n = q if form == "phi" else q - 1
    hatted = form != "phi"
    out = FockForm(sig)
    front = schrodinger_front(q, form) * C_SQUARED ** n
    for al in multi_indices(p, n):
        for be in multi_indices(p, n):
            # each D contributes z'', each Dbar contributes z'; iota(phi_0) = 1
            vs = [zpp(sig, a) for a in al] + [zp(sig, b) for b in be]
            out = out + multiply_vars(omega_basis_forms(p, q, al, be, hatted=hatted), vs, front)
    return out


@dataclass
class BridgeReport:
    p: int
    q: int
    phi_ok: bool
    psi_ok: bool

    @property
    def holds(self) -> bool:
        return self.phi_ok and self.psi_ok


def bridge_to_fock(p: int, q: int) -> BridgeReport:
    from .weil import build_phi_km, build_psi

    return BridgeReport(
        p, q, fock_image(p, q, "phi") == build_phi_km(p, q), fock_image(p, q, "psi") == build_psi(p, q)
    )


def psi_front(q: int) -> complex:
    """2i(-1)^{q-1} / 2^{2(q-1)}."""
    return complex(schrodinger_front(q, "psi"))
