"""Exact arithmetic in the polynomial Fock space tensored with the exterior
algebra on the generators xi'_{alpha mu}, xi''_{beta nu}.

Coefficients are Gaussian rationals times an integer power of a formal
symbol ``pi``.  Adding two coefficients with different powers of ``pi`` on
the same basis element is refused: every identity checked with this module
is homogeneous in ``pi``, so a mixed sum can only come from a bug.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Dict, Iterable, Iterator, Mapping, Optional, Sequence, Tuple

PRIME = "p"
DPRIME = "pp"
_KIND_RANK = {PRIME: 0, DPRIME: 1}


class FockError(ValueError):
    """Raised for inadmissible variables, signature mismatches and mixed pi powers."""


class PiHomogeneityError(FockError):
    """Raised when a sum would combine unequal powers of pi on one basis element."""


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        raise TypeError("floating point values are not allowed in exact scalars")
    return Fraction(x)


@dataclass(frozen=True)
class ExactScalar:
    """The number (re + i*im) * pi**pi_pow with rational re, im."""

    re: Fraction = Fraction(0)
    im: Fraction = Fraction(0)
    pi_pow: int = 0

    def __post_init__(self):
        object.__setattr__(self, "re", _frac(self.re))
        object.__setattr__(self, "im", _frac(self.im))
        if self.re == 0 and self.im == 0:
            object.__setattr__(self, "pi_pow", 0)

    @staticmethod
    def of(value, pi_pow: int = 0) -> "ExactScalar":
        if isinstance(value, ExactScalar):
            return ExactScalar(value.re, value.im, value.pi_pow + pi_pow)
        if isinstance(value, complex):
            raise TypeError("complex floats are not exact")
        return ExactScalar(_frac(value), Fraction(0), pi_pow)

    @property
    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def __add__(self, other: "ExactScalar") -> "ExactScalar":
        other = _as_scalar(other)
        if self.is_zero:
            return other
        if other.is_zero:
            return self
        if self.pi_pow != other.pi_pow:
            raise PiHomogeneityError(
                f"cannot add pi^{self.pi_pow} and pi^{other.pi_pow} terms"
            )
        return ExactScalar(self.re + other.re, self.im + other.im, self.pi_pow)

    __radd__ = __add__

    def __neg__(self) -> "ExactScalar":
        return ExactScalar(-self.re, -self.im, self.pi_pow)

    def __sub__(self, other: "ExactScalar") -> "ExactScalar":
        return self + (-_as_scalar(other))

    def __rsub__(self, other) -> "ExactScalar":
        return _as_scalar(other) - self

    def __mul__(self, other) -> "ExactScalar":
        other = _as_scalar(other)
        return ExactScalar(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
            self.pi_pow + other.pi_pow,
        )

    __rmul__ = __mul__

    def conjugate(self) -> "ExactScalar":
        return ExactScalar(self.re, -self.im, self.pi_pow)

    def inverse(self) -> "ExactScalar":
        n = self.re * self.re + self.im * self.im
        if n == 0:
            raise ZeroDivisionError("inverse of zero scalar")
        return ExactScalar(self.re / n, -self.im / n, -self.pi_pow)

    def __truediv__(self, other) -> "ExactScalar":
        return self * _as_scalar(other).inverse()

    def __pow__(self, n: int) -> "ExactScalar":
        if n < 0:
            return self.inverse() ** (-n)
        out = ONE
        for _ in range(n):
            out = out * self
        return out

    def __complex__(self) -> complex:
        import math

        f = math.pi ** self.pi_pow
        return complex(float(self.re) * f, float(self.im) * f)

    def to_text(self) -> str:
        if self.im == 0:
            g = f"{self.re}"
        elif self.re == 0:
            g = f"{self.im}i"
        else:
            g = f"({self.re}{'+' if self.im > 0 else '-'}{abs(self.im)}i)"
        return g if self.pi_pow == 0 else f"{g}*pi^{self.pi_pow}"

    def __repr__(self) -> str:
        return f"ExactScalar({self.to_text()})"


def _as_scalar(x) -> ExactScalar:
    return x if isinstance(x, ExactScalar) else ExactScalar.of(x)


ZERO = ExactScalar()
ONE = ExactScalar(Fraction(1))
I = ExactScalar(Fraction(0), Fraction(1))
PI = ExactScalar(Fraction(1), Fraction(0), 1)


@dataclass(frozen=True, order=True)
class Signature:
    """Dual pair U(p,q) x U(r,s)."""

    p: int
    q: int
    r: int = 1
    s: int = 1

    def __post_init__(self):
        if min(self.p, self.q) < 0 or min(self.r, self.s) < 0 or self.p + self.q == 0:
            raise FockError(f"invalid signature {tuple(self)}")

    def __iter__(self):
        return iter((self.p, self.q, self.r, self.s))

    @property
    def m(self) -> int:
        return self.p + self.q

    def alphas(self) -> range:
        return range(1, self.p + 1)

    def mus(self) -> range:
        return range(self.p + 1, self.m + 1)

    def variables(self) -> Tuple["FockVariable", ...]:
        out = []
        for i in range(1, self.m + 1):
            for w in range(1, self.r + self.s + 1):
                out.append(FockVariable(i, w, admissible_kind(self, i, w)))
        return tuple(sorted(out))

    def generators(self) -> Tuple[Tuple[int, int, int], ...]:
        return tuple(
            sorted((mu, k, a) for mu in self.mus() for k in (0, 1) for a in self.alphas())
        )


def admissible_kind(sig: Signature, vec_index: int, witness_index: int) -> str:
    """The only kind allowed for the pair (vec_index, witness_index)."""
    if not 1 <= vec_index <= sig.m or not 1 <= witness_index <= sig.r + sig.s:
        raise FockError(f"index ({vec_index},{witness_index}) out of range for {sig}")
    positive = vec_index <= sig.p
    first = witness_index <= sig.r
    return DPRIME if positive == first else PRIME


@dataclass(frozen=True, order=True)
class FockVariable:
    """z'_{i w} (kind PRIME) or z''_{i w} (kind DPRIME)."""

    vec_index: int
    witness_index: int
    kind: str

    def __post_init__(self):
        if self.kind not in _KIND_RANK:
            raise FockError(f"unknown kind {self.kind!r}")

    def check(self, sig: Signature) -> None:
        if admissible_kind(sig, self.vec_index, self.witness_index) != self.kind:
            raise FockError(f"inadmissible variable {self.to_text()} for {sig}")

    def to_text(self) -> str:
        return f"z{chr(39) * (1 + _KIND_RANK[self.kind])}[{self.vec_index},{self.witness_index}]"


def zpp(sig: Signature, i: int) -> FockVariable:
    """Abbreviated z''_i for r = s = 1: z''_{alpha 1} or z''_{mu 2}."""
    _need_rs11(sig)
    return FockVariable(i, 1 if i <= sig.p else 2, DPRIME)


def zp(sig: Signature, i: int) -> FockVariable:
    """Abbreviated z'_i for r = s = 1: z'_{alpha 2} or z'_{mu 1}."""
    _need_rs11(sig)
    return FockVariable(i, 2 if i <= sig.p else 1, PRIME)


def _need_rs11(sig: Signature) -> None:
    if (sig.r, sig.s) != (1, 1):
        raise FockError(f"operation needs r = s = 1, got {sig}")


# A polynomial monomial is a sorted tuple of (FockVariable, exponent).
PolyMonomial = Tuple[Tuple[FockVariable, int], ...]
# An exterior monomial is a strictly increasing tuple of generators
# (mu, kind_rank, alpha); kind_rank 0 is xi', 1 is xi''.
ExtMonomial = Tuple[Tuple[int, int, int], ...]
Key = Tuple[ExtMonomial, PolyMonomial]


def gen(kind: str, alpha: int, mu: int) -> Tuple[int, int, int]:
    return (mu, _KIND_RANK[kind], alpha)


def canonical_ext(factors: Sequence[Tuple[int, int, int]]) -> Tuple[int, Optional[ExtMonomial]]:
    """Sort a wedge product of generators; return (sign, sorted) or (0, None)."""
    if len(set(factors)) != len(factors):
        return 0, None
    f = list(factors)
    sign = 1
    # insertion sort counting transpositions
    for i in range(1, len(f)):
        j = i
        while j > 0 and f[j - 1] > f[j]:
            f[j - 1], f[j] = f[j], f[j - 1]
            sign = -sign
            j -= 1
    return sign, tuple(f)


def _merge_ext(a: ExtMonomial, b: ExtMonomial) -> Tuple[int, Optional[ExtMonomial]]:
    if not a:
        return 1, b
    if not b:
        return 1, a
    sb = set(b)
    if any(x in sb for x in a):
        return 0, None
    # sign of the shuffle: count pairs (x in a, y in b) with x > y
    inv = 0
    j = 0
    for x in a:
        while j < len(b) and b[j] < x:
            j += 1
        inv += j
    return (-1 if inv & 1 else 1), tuple(sorted(a + b))


def _mul_poly(a: PolyMonomial, b: PolyMonomial) -> PolyMonomial:
    if not a:
        return b
    if not b:
        return a
    d = dict(a)
    for v, e in b:
        d[v] = d.get(v, 0) + e
    return tuple(sorted(d.items()))


def poly_monomial(exps: Mapping[FockVariable, int]) -> PolyMonomial:
    for e in exps.values():
        if e < 1:
            raise FockError("exponents must be positive")
    return tuple(sorted(exps.items()))


class FockForm:
    """Finite sum of coefficient * z-monomial * exterior monomial."""

    __slots__ = ("sig", "terms")

    def __init__(self, sig: Signature, terms: Optional[Mapping[Key, ExactScalar]] = None):
        self.sig = sig
        self.terms: Dict[Key, ExactScalar] = {}
        if terms:
            for k, c in terms.items():
                if not c.is_zero:
                    self.terms[k] = c

    # constructors -----------------------------------------------------
    @classmethod
    def zero(cls, sig: Signature) -> "FockForm":
        return cls(sig)

    @classmethod
    def scalar(cls, sig: Signature, c) -> "FockForm":
        return cls(sig, {((), ()): _as_scalar(c)})

    @classmethod
    def var(cls, sig: Signature, v: FockVariable, c=ONE) -> "FockForm":
        v.check(sig)
        return cls(sig, {((), ((v, 1),)): _as_scalar(c)})

    @classmethod
    def xi(cls, sig: Signature, kind: str, alpha: int, mu: int) -> "FockForm":
        _check_gen(sig, alpha, mu)
        return cls(sig, {((gen(kind, alpha, mu),), ()): ONE})

    @classmethod
    def monomial(
        cls,
        sig: Signature,
        coeff,
        variables: Iterable[FockVariable] = (),
        factors: Sequence[Tuple[str, int, int]] = (),
    ) -> "FockForm":
        """coeff * prod(variables) * (wedge of factors in the given order)."""
        exps: Dict[FockVariable, int] = {}
        for v in variables:
            v.check(sig)
            exps[v] = exps.get(v, 0) + 1
        gens = []
        for kind, a, mu in factors:
            _check_gen(sig, a, mu)
            gens.append(gen(kind, a, mu))
        sign, ext = canonical_ext(gens)
        if sign == 0:
            return cls(sig)
        return cls(sig, {(ext, poly_monomial(exps)): _as_scalar(coeff) * sign})

    # queries ----------------------------------------------------------
    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self) -> Iterator[Tuple[Key, ExactScalar]]:
        return iter(self.terms.items())

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other) -> bool:
        if not isinstance(other, FockForm):
            return NotImplemented
        return self.sig == other.sig and self.terms == other.terms

    def __hash__(self):
        return hash((self.sig, frozenset(self.terms.items())))

    def bidegrees(self) -> Tuple[Tuple[int, int], ...]:
        out = set()
        for ext, _ in self.terms:
            a = sum(1 for g in ext if g[1] == 0)
            out.add((a, len(ext) - a))
        return tuple(sorted(out))

    def component(self, a: int, b: int) -> "FockForm":
        """Homogeneous part of exterior bidegree (a, b)."""
        keep = {}
        for k, c in self.terms.items():
            na = sum(1 for g in k[0] if g[1] == 0)
            if na == a and len(k[0]) - na == b:
                keep[k] = c
        return FockForm(self.sig, keep)

    def pi_powers(self) -> Tuple[int, ...]:
        return tuple(sorted({c.pi_pow for c in self.terms.values()}))

    # arithmetic -------------------------------------------------------
    def _same(self, other: "FockForm") -> None:
        if self.sig != other.sig:
            raise FockError(f"signature mismatch {self.sig} vs {other.sig}")

    def __add__(self, other: "FockForm") -> "FockForm":
        self._same(other)
        out = dict(self.terms)
        for k, c in other.terms.items():
            _accumulate(out, k, c)
        return _wrap(self.sig, out)

    def __neg__(self) -> "FockForm":
        return _wrap(self.sig, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other: "FockForm") -> "FockForm":
        return self + (-other)

    def scale(self, c) -> "FockForm":
        c = _as_scalar(c)
        if c.is_zero:
            return FockForm(self.sig)
        return _wrap(self.sig, {k: v * c for k, v in self.terms.items()})

    def __rmul__(self, c) -> "FockForm":
        return self.scale(c)

    def to_text(self) -> str:
        return to_text(self)

    def __repr__(self) -> str:
        return f"FockForm({self.sig}, {len(self.terms)} terms)"


def _check_gen(sig: Signature, alpha: int, mu: int) -> None:
    if not (1 <= alpha <= sig.p and sig.p < mu <= sig.m):
        raise FockError(f"generator index ({alpha},{mu}) out of range for {sig}")


def _accumulate(d: Dict[Key, ExactScalar], k: Key, c: ExactScalar) -> None:
    old = d.get(k)
    if old is None:
        d[k] = c
        return
    new = old + c
    if new.is_zero:
        del d[k]
    else:
        d[k] = new


def _wrap(sig: Signature, d: Dict[Key, ExactScalar]) -> FockForm:
    f = FockForm.__new__(FockForm)
    f.sig = sig
    f.terms = {k: c for k, c in d.items() if not c.is_zero}
    return f


def wedge(a: FockForm, b: FockForm) -> FockForm:
    """Product in the (commutative polynomial) x (exterior) algebra."""
    a._same(b)
    out: Dict[Key, ExactScalar] = {}
    for (ea, pa), ca in a.terms.items():
        for (eb, pb), cb in b.terms.items():
            sign, e = _merge_ext(ea, eb)
            if sign == 0:
                continue
            c = ca * cb
            _accumulate(out, (e, _mul_poly(pa, pb)), c if sign > 0 else -c)
    return _wrap(a.sig, out)


def poly_mul(a: FockForm, b: FockForm) -> FockForm:
    """Termwise product of polynomial parts with the exterior parts wedged."""
    return wedge(a, b)


def partial_derivative(f: FockForm, v: FockVariable) -> FockForm:
    v.check(f.sig)
    out: Dict[Key, ExactScalar] = {}
    for (e, p), c in f.terms.items():
        for idx, (w, k) in enumerate(p):
            if w == v:
                np_ = p[:idx] + (((w, k - 1),) if k > 1 else ()) + p[idx + 1:]
                _accumulate(out, (e, np_), c * k)
                break
    return _wrap(f.sig, out)


def multiply_vars(f: FockForm, vs: Sequence[FockVariable], c=ONE) -> FockForm:
    """c * prod(vs) * f."""
    c = _as_scalar(c)
    exps: Dict[FockVariable, int] = {}
    for v in vs:
        v.check(f.sig)
        exps[v] = exps.get(v, 0) + 1
    mono = poly_monomial(exps)
    out: Dict[Key, ExactScalar] = {}
    for (e, p), cc in f.terms.items():
        _accumulate(out, (e, _mul_poly(p, mono)), cc * c)
    return _wrap(f.sig, out)


def euler_operator(f: FockForm, v: FockVariable, w: FockVariable) -> FockForm:
    """v * d/dw applied to f."""
    return multiply_vars(partial_derivative(f, w), (v,))


def second_partial(f: FockForm, u: FockVariable, v: FockVariable) -> FockForm:
    return partial_derivative(partial_derivative(f, u), v)


def left_ext(f: FockForm, kind: str, alpha: int, mu: int) -> FockForm:
    """Left exterior multiplication by xi^{kind}_{alpha mu}."""
    _check_gen(f.sig, alpha, mu)
    g = (gen(kind, alpha, mu),)
    out: Dict[Key, ExactScalar] = {}
    for (e, p), c in f.terms.items():
        sign, ne = _merge_ext(g, e)
        if sign:
            _accumulate(out, (ne, p), c if sign > 0 else -c)
    return _wrap(f.sig, out)


def omega_basis_forms(
    p: int, q: int, alphas: Sequence[int], betas: Sequence[int], hatted: bool = False
) -> FockForm:
    """Omega_q(alphas; betas), or the hatted sum Omega_{q-1} when ``hatted``.

    Omega_q = xi'_{a_1,p+1} ^ ... ^ xi'_{a_q,p+q} ^ xi''_{b_1,p+1} ^ ... ^ xi''_{b_q,p+q}.
    The hatted form carries the factor (-1)^{q(q-1)/2} times the sum over j of
    the interleaved wedge with the pair at slot p+j removed; the q-1 entries
    of each multi-index fill the remaining slots in increasing order.
    """
    sig = Signature(p, q)
    n = q - 1 if hatted else q
    if len(alphas) != n or len(betas) != n:
        raise FockError(f"multi-indices must have length {n}")
    for a in tuple(alphas) + tuple(betas):
        if not 1 <= a <= p:
            raise FockError(f"index {a} out of range 1..{p}")
    if not hatted:
        factors = [(PRIME, a, p + 1 + j) for j, a in enumerate(alphas)]
        factors += [(DPRIME, b, p + 1 + j) for j, b in enumerate(betas)]
        return FockForm.monomial(sig, ONE, (), factors)
    out = FockForm(sig)
    sgn = -1 if (q * (q - 1) // 2) % 2 else 1
    for j in range(1, q + 1):
        slots = [p + t for t in range(1, q + 1) if t != j]
        factors = []
        for a, b, mu in zip(alphas, betas, slots):
            factors += [(PRIME, a, mu), (DPRIME, b, mu)]
        out = out + FockForm.monomial(sig, ONE * sgn, (), factors)
    return out


def multi_indices(p: int, n: int) -> Iterator[Tuple[int, ...]]:
    return product(range(1, p + 1), repeat=n)


def random_form(sig: Signature, rng, n_terms: int = 4, max_gens: int = 3, max_deg: int = 3) -> FockForm:
    """Random form with small Gaussian-integer coefficients; used by property tests."""
    variables = sig.variables()
    gens = sig.generators()
    out = FockForm(sig)
    pi_pow = 0
    for _ in range(n_terms):
        vs = [variables[rng.randrange(len(variables))] for _ in range(rng.randrange(max_deg + 1))]
        k = rng.randrange(min(max_gens, len(gens)) + 1)
        chosen = rng.sample(range(len(gens)), k)
        factors = []
        for idx in chosen:
            mu, kr, a = gens[idx]
            factors.append((PRIME if kr == 0 else DPRIME, a, mu))
        c = ExactScalar(rng.randint(-3, 3), rng.randint(-3, 3), pi_pow)
        out = out + FockForm.monomial(sig, c, vs, factors)
    return out


def _ext_text(e: ExtMonomial) -> str:
    if not e:
        return "1"
    return "^".join(f"xi{chr(39) * (1 + k)}[{a},{mu}]" for mu, k, a in e)


def _poly_text(p: PolyMonomial) -> str:
    if not p:
        return "1"
    return "*".join(v.to_text() + (f"^{e}" if e > 1 else "") for v, e in p)


def to_text(f: FockForm) -> str:
    """Canonical serialization: one term per line, sorted by (ext, poly)."""
    if not f.terms:
        return "0"
    lines = []
    for (e, p) in sorted(f.terms, key=lambda k: (k[0], [(v, x) for v, x in k[1]])):
        c = f.terms[(e, p)]
        g = c.to_text().split("*pi^")[0]
        lines.append(f"{g} * pi^{c.pi_pow} * {_poly_text(p)} * {_ext_text(e)}")
    return "\n".join(lines)
