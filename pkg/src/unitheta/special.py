"""Special functions with explicit error control.

Incomplete Gamma at integer order (exponential integral for order 0), Gauss
2F1 on [0, 1), Kummer/Whittaker M and Laguerre polynomials.  Each kernel
either meets the requested relative tolerance or raises ConvergenceError.
Working precision is IEEE double unless ``bits`` > 53, in which case the
same code runs on mpmath multiprecision floats.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from fractions import Fraction
from typing import List

EULER_GAMMA = 0.577215664901532860606512090082402431


class ConvergenceError(ArithmeticError):
    pass


@dataclass(frozen=True)
class PrecisionPolicy:
    eps: float = 1e-12
    max_terms: int = 20000
    bits: int = 53

    @classmethod
    def from_env(cls) -> "PrecisionPolicy":
        bits = int(os.environ.get("UNITHETA_PRECISION_BITS", "53"))
        return cls(bits=bits)


DEFAULT = PrecisionPolicy.from_env()


class _FloatCtx:
    exp = staticmethod(math.exp)
    log = staticmethod(math.log)
    sqrt = staticmethod(math.sqrt)
    lgamma = staticmethod(math.lgamma)
    pi = math.pi
    euler = EULER_GAMMA

    @staticmethod
    def num(x):
        return float(x)

    @staticmethod
    def gamma(x):
        return math.gamma(x)


class _MpCtx:
    def __init__(self, bits: int):
        import mpmath

        from mpmath.ctx_mp import MPContext

        self.mp = MPContext()
        self.mp.prec = bits
        self.mpf = self.mp.mpf
        self.exp = self.mp.exp
        self.log = self.mp.log
        self.sqrt = self.mp.sqrt
        self.pi = self.mp.pi
        self.euler = self.mpf("0.577215664901532860606512090082402431")

    def num(self, x):
        return self.mpf(x)

    def gamma(self, x):
        # elementary building block only; the series kernels below are ours
        return self.mp.gamma(x)

    def lgamma(self, x):
        return self.mp.log(abs(self.mp.gamma(x)))


def _ctx(policy: PrecisionPolicy):
    return _FloatCtx if policy.bits <= 53 else _MpCtx(policy.bits)


# incomplete Gamma ------------------------------------------------------


def _e1_series(x, ctx, policy):
    s = ctx.num(0)
    term = ctx.num(1)
    for k in range(1, policy.max_terms):
        term *= -x / k
        s += term / k
        if abs(term / k) <= policy.eps * 1e-3 * max(abs(s), 1e-300):
            return -ctx.euler - ctx.log(x) - s
    raise ConvergenceError(f"E1 series did not converge at x={x}")


def _e1_cf(x, ctx, policy):
    # modified Lentz on E1(x) = e^{-x} / (x + 1 - 1/(x + 3 - 4/(x + 5 - ...)))
    tiny = ctx.num(1e-300)
    b = x + 1
    c = 1 / tiny
    d = 1 / b
    h = d
    for i in range(1, policy.max_terms):
        an = -i * i
        b += 2
        d = 1 / (an * d + b)
        c = b + an / c
        delta = c * d
        h *= delta
        if abs(delta - 1) <= policy.eps * 1e-3:
            return h * ctx.exp(-x)
    raise ConvergenceError(f"E1 continued fraction did not converge at x={x}")


def exp_integral_e1(x, policy: PrecisionPolicy = DEFAULT, method: str = "auto"):
    if x <= 0:
        raise ValueError("E1 needs x > 0")
    ctx = _ctx(policy)
    x = ctx.num(x)
    if method == "series" or (method == "auto" and x <= 1):
        return _e1_series(x, ctx, policy)
    return _e1_cf(x, ctx, policy)


def inc_gamma_int(l: int, x, policy: PrecisionPolicy = DEFAULT):
    """Gamma(l, x) for integer l >= 0 and x >= 0 (x > 0 when l = 0)."""
    if l < 0 or int(l) != l:
        raise ValueError("order must be a nonnegative integer")
    if l == 0:
        if x <= 0:
            raise ValueError("Gamma(0, x) diverges at x = 0")
        return exp_integral_e1(x, policy)
    if x < 0:
        raise ValueError("x must be nonnegative")
    ctx = _ctx(policy)
    x = ctx.num(x)
    term = ctx.num(1)
    s = ctx.num(1)
    for k in range(1, l):
        term *= x / k
        s += term
    return math.factorial(l - 1) * ctx.exp(-x) * s


def scaled_inc_gamma(l: int, x, policy: PrecisionPolicy = DEFAULT):
    """x^{-l} Gamma(l, x)."""
    return inc_gamma_int(l, x, policy) / x ** l


# Gauss hypergeometric --------------------------------------------------


def digamma(x):
    """psi(x) for real x, not a nonpositive integer."""
    if x <= 0 and x == math.floor(x):
        raise ValueError("digamma pole")
    if x < 0:
        return digamma(1 - x) - math.pi / math.tan(math.pi * x)
    acc = 0.0
    while x < 8:
        acc -= 1 / x
        x += 1
    inv = 1 / (x * x)
    ser = inv * (1 / 12 - inv * (1 / 120 - inv * (1 / 252 - inv * (1 / 240 - inv * (1 / 132)))))
    return acc + math.log(x) - 0.5 / x - ser


def rgamma(x):
    """1/Gamma(x), zero at the poles."""
    if x <= 0 and x == math.floor(x):
        return 0.0
    return 1 / math.gamma(x)


def _is_nonpos_int(x) -> bool:
    return x <= 0 and abs(x - round(x)) < 1e-14


def _series_2f1(a, b, c, z, policy, ctx):
    s = ctx.num(1)
    t = ctx.num(1)
    for n in range(policy.max_terms):
        if (a + n) == 0 or (b + n) == 0:
            return s
        t *= (a + n) * (b + n) / ((c + n) * (n + 1)) * z
        s += t
        # tail bound from the eventual geometric ratio
        r = abs((a + n + 1) * (b + n + 1) / ((c + n + 1) * (n + 2)) * z)
        if r < 1 and abs(t) * r / (1 - r) <= policy.eps * 1e-2 * max(abs(s), 1e-300):
            return s
    raise ConvergenceError(f"2F1({a},{b};{c};{z}) series did not converge")


def _degenerate_2f1(a, b, m: int, z, policy):
    """2F1(a, b; a + b + m; z) for integer m >= 0 and z near 1 (logarithmic case)."""
    w = 1 - z
    lw = math.log(w)
    c = a + b + m
    head = 0.0
    if m > 0:
        pre = math.gamma(m) * math.gamma(c) * rgamma(a + m) * rgamma(b + m)
        t = 1.0
        for n in range(m):
            head += t
            if n < m - 1:
                t *= (a + n) * (b + n) / ((n + 1) * (1 - m + n)) * w
        head *= pre
    pre2 = math.gamma(c) * rgamma(a) * rgamma(b)
    if pre2 == 0.0:
        return head
    tail = 0.0
    t = 1.0 / math.factorial(m)
    for n in range(policy.max_terms):
        br = (
            lw
            - digamma(n + 1)
            - digamma(n + m + 1)
            + digamma(a + n + m)
            + digamma(b + n + m)
        )
        term = t * br
        tail += term
        t *= (a + m + n) * (b + m + n) / ((n + 1) * (n + m + 1)) * w
        if abs(t) * (abs(lw) + 50) <= policy.eps * 1e-2 * max(abs(tail), 1e-300) and n > 2:
            break
    else:
        raise ConvergenceError("degenerate 2F1 tail did not converge")
    sign = (-1) ** m  # (z-1)^m = (-1)^m w^m
    return head - sign * w ** m * pre2 * tail


def _connection_2f1(a, b, c, z, policy, ctx):
    w = 1 - ctx.num(z)
    a, b, c = ctx.num(a), ctx.num(b), ctx.num(c)
    d = c - a - b
    rg = lambda x: 0 if _is_nonpos_int(float(x)) else 1 / ctx.gamma(x)
    t1 = ctx.gamma(c) * ctx.gamma(d) * rg(c - a) * rg(c - b)
    t2 = ctx.gamma(c) * ctx.gamma(-d) * rg(a) * rg(b)
    out = ctx.num(0)
    if t1:
        out += t1 * _series_2f1(a, b, 1 - d, w, policy, ctx)
    if t2:
        out += t2 * w ** d * _series_2f1(c - a, c - b, d + 1, w, policy, ctx)
    return out


def gauss_2f1(a, b, c, z, policy: PrecisionPolicy = DEFAULT):
    """2F1(a, b; c; z) for real parameters and 0 <= z < 1."""
    if _is_nonpos_int(c):
        raise ValueError("c must not be a nonpositive integer")
    if not (0 <= z < 1):
        raise ValueError("z must lie in [0, 1)")
    ctx = _ctx(policy)
    if z == 0:
        return ctx.num(1)
    if _is_nonpos_int(a) or _is_nonpos_int(b):
        return _series_2f1(ctx.num(a), ctx.num(b), ctx.num(c), ctx.num(z), policy, ctx)
    d = c - a - b
    # Euler transform when it makes the series terminate
    if _is_nonpos_int(c - a) or _is_nonpos_int(c - b):
        return (1 - ctx.num(z)) ** d * _series_2f1(
            ctx.num(c - a), ctx.num(c - b), ctx.num(c), ctx.num(z), policy, ctx
        )
    if z <= 0.99 or policy.bits > 53:
        # series decay ~ n^{a+b-c-1} z^n; pick the form with the smaller power
        if d < 0:
            return (1 - ctx.num(z)) ** d * _series_2f1(
                ctx.num(c - a), ctx.num(c - b), ctx.num(c), ctx.num(z), policy, ctx
            )
        return _series_2f1(ctx.num(a), ctx.num(b), ctx.num(c), ctx.num(z), policy, ctx)
    md = round(d)
    if abs(d - md) < 1e-13:
        if md >= 0:
            return _degenerate_2f1(a, b, md, z, policy)
        return (1 - z) ** md * _degenerate_2f1(c - a, c - b, -md, z, policy)
    gap = abs(d - md)
    if gap < 1e-3:
        # the two connection terms cancel to about log2(1/gap) bits
        extra = int(-math.log2(gap)) + 16
        return float(_connection_2f1(a, b, c, z, policy, _MpCtx(53 + extra)))
    return _connection_2f1(a, b, c, z, policy, ctx)


def gauss_2f1_at_one(a, b, c):
    """Gauss summation 2F1(a, b; c; 1), valid for c - a - b > 0."""
    if c - a - b <= 0:
        raise ValueError("divergent at z = 1")
    return math.gamma(c) * math.gamma(c - a - b) * rgamma(c - a) * rgamma(c - b)


# Kummer / Whittaker ----------------------------------------------------


def kummer_m(a, b, t, policy: PrecisionPolicy = DEFAULT):
    """1F1(a; b; t) by direct summation (t >= 0)."""
    if _is_nonpos_int(b):
        raise ValueError("b must not be a nonpositive integer")
    ctx = _ctx(policy)
    a, b, t = ctx.num(a), ctx.num(b), ctx.num(t)
    s = ctx.num(1)
    term = ctx.num(1)
    for n in range(policy.max_terms):
        term *= (a + n) / ((b + n) * (n + 1)) * t
        s += term
        if term == 0:
            return s
        r = abs((a + n + 1) / ((b + n + 1) * (n + 2)) * t)
        if r < 1 and abs(term) * r / (1 - r) <= policy.eps * 1e-2 * max(abs(s), 1e-300):
            return s
    raise ConvergenceError(f"1F1({a};{b};{t}) did not converge")


def whittaker_M(kappa, mu, t, policy: PrecisionPolicy = DEFAULT):
    """M_{kappa,mu}(t) = e^{-t/2} t^{mu+1/2} 1F1(mu - kappa + 1/2; 1 + 2 mu; t)."""
    if t <= 0:
        raise ValueError("t must be positive")
    if _is_nonpos_int(1 + 2 * mu):
        raise ValueError("parameter pole: 1 + 2 mu is a nonpositive integer")
    ctx = _ctx(policy)
    t = ctx.num(t)
    return ctx.exp(-t / 2) * t ** (mu + ctx.num(0.5)) * kummer_m(mu - kappa + 0.5, 1 + 2 * mu, t, policy)


# Laguerre --------------------------------------------------------------


def laguerre_coeffs(k: int) -> List[Fraction]:
    """Exact coefficients of L_k(t) = sum_j (-1)^j C(k, j) t^j / j!."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    return [Fraction((-1) ** j * math.comb(k, j), math.factorial(j)) for j in range(k + 1)]


def laguerre(k: int, t) -> float:
    s = 0.0
    for c in reversed(laguerre_coeffs(k)):
        s = s * t + float(c)
    return s
