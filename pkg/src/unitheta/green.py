"""Numerical evaluation on the Grassmannian of negative q-planes.

Points z are given by adapted frames g in U(p,q) with g z0 = z, where z0 is
spanned by the last q standard vectors.  Form-valued quantities are returned
as coefficient arrays over the spanning family Omega_{q-1}(a; b), a and b
running over all sequences in {1..p}^{q-1}, in the frame pulled back by g.

Conventions used throughout:
  * <x, y> = x^* H y with H = diag(1_p, -1_q)
  * majorant <x,x>_z = <x,x> + 2 R(x,z)
  * lattice sums take <lambda,lambda> = 2m
  * the theta kernel uses the real quadratic form Q(x) = <x,x>, so the
    Gaussian is exp(-2 pi v <x,x>_z) and the phase is e(u <x,x>); this is the
    normalization under which omega_L transforms it
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .fock import multi_indices
from .lattice import HermitianLattice, LatticeError, WeilRepFinite, enumerate_vectors, rows_times
from .schrodinger import all_P, psi_front
from .special import (
    DEFAULT,
    PrecisionPolicy,
    gauss_2f1,
    inc_gamma_int,
    whittaker_M,
)

EPS_CYCLE = 1e-9
CHUNK = 256


class DomainError(ValueError):
    pass


class CycleProximityError(ArithmeticError):
    """z lies (numerically) on a special cycle of the requested sum."""


class ParameterRangeError(ValueError):
    pass


def hermitian_form(p: int, q: int) -> np.ndarray:
    return np.diag([1.0] * p + [-1.0] * q)


# domain points ---------------------------------------------------------------


@dataclass
class DomainPoint:
    p: int
    q: int
    g: np.ndarray

    def __post_init__(self):
        self.g = np.asarray(self.g, dtype=complex)
        H = hermitian_form(self.p, self.q)
        m = self.p + self.q
        if self.g.shape != (m, m):
            raise DomainError(f"frame must be {m}x{m}")
        err = np.abs(self.g.conj().T @ H @ self.g - H).max()
        if err > 1e-10 * max(1.0, np.abs(self.g).max() ** 2):
            raise DomainError(f"frame does not preserve the hermitian form (error {err:.2e})")
        self.ginv = H @ self.g.conj().T @ H

    @property
    def H(self) -> np.ndarray:
        return hermitian_form(self.p, self.q)

    @property
    def Z(self) -> np.ndarray:
        return self.g[:, self.p:]

    @classmethod
    def base(cls, p: int, q: int) -> "DomainPoint":
        return cls(p, q, np.eye(p + q))

    @classmethod
    def from_frame(cls, p: int, q: int, g) -> "DomainPoint":
        return cls(p, q, np.asarray(g, dtype=complex))

    @classmethod
    def from_basis(cls, p: int, Z) -> "DomainPoint":
        """Adapted frame for the plane spanned by the columns of Z.

        Modified Gram-Schmidt against H: the columns of Z are orthonormalized
        for -<,>, then the standard vectors are projected to z-perp and
        orthonormalized with largest-remaining-norm pivoting.
        """
        Z = np.asarray(Z, dtype=complex)
        m, q = Z.shape
        if not 0 < q < m or p != m - q:
            raise DomainError("Z must be m x q with p + q = m")
        H = hermitian_form(p, q)
        if np.max(np.linalg.eigvalsh(Z.conj().T @ H @ Z)) >= 0:
            raise DomainError("span(Z) is not negative definite")
        ip = lambda a, b: np.vdot(a, H @ b)
        neg: List[np.ndarray] = []
        for j in range(q):
            w = Z[:, j].copy()
            for u in neg:
                w = w + ip(u, w) * u
            w = w / math.sqrt(-ip(w, w).real)
            neg.append(w)
        cand = []
        for j in range(m):
            x = np.zeros(m, dtype=complex)
            x[j] = 1
            for u in neg:
                x = x + ip(u, x) * u
            cand.append(x)
        pos: List[np.ndarray] = []
        for _ in range(p):
            best = max(range(len(cand)), key=lambda i: (ip(cand[i], cand[i]).real, -i))
            x = cand.pop(best)
            x = x / math.sqrt(ip(x, x).real)
            pos.append(x)
            cand = [c - ip(x, c) * x for c in cand]
        return cls(p, q, np.stack(pos + neg, axis=1))

    @classmethod
    def random(cls, p: int, q: int, rng: np.random.Generator, scale: float = 0.7) -> "DomainPoint":
        A = (rng.normal(size=(p, q)) + 1j * rng.normal(size=(p, q))) * scale / math.sqrt(2)
        X = np.zeros((p + q, p + q), dtype=complex)
        X[:p, p:] = A
        X[p:, :p] = A.conj().T
        w, U = np.linalg.eigh(X)
        g = (U * np.exp(w)) @ U.conj().T
        return cls(p, q, g)

    @classmethod
    def geodesic(cls, p: int, q: int, t: float) -> "DomainPoint":
        """a_t: v_1 -> cosh t v_1 + sinh t v_{p+q}, v_{p+q} -> sinh t v_1 + cosh t v_{p+q}."""
        g = np.eye(p + q, dtype=complex)
        j = p + q - 1
        g[0, 0] = g[j, j] = math.cosh(t)
        g[0, j] = g[j, 0] = math.sinh(t)
        return cls(p, q, g)

    def coords(self, x) -> np.ndarray:
        return self.ginv @ np.asarray(x, dtype=complex)


def _coords_rows(z: DomainPoint, X: np.ndarray) -> np.ndarray:
    return rows_times(z.ginv, X)


def majorant(x, z: DomainPoint) -> float:
    y = z.coords(x)
    return float(np.sum(np.abs(y) ** 2))


def big_R(x, z: DomainPoint) -> float:
    y = z.coords(x)
    return float(np.sum(np.abs(y[z.p:]) ** 2))


def hnorm(x, p: int, q: int) -> float:
    x = np.asarray(x, dtype=complex)
    return float(np.sum(np.abs(x[:p]) ** 2) - np.sum(np.abs(x[p:]) ** 2))


# polynomial data ------------------------------------------------------------


@dataclass
class PsiPolynomials:
    """front * P_{a,b} for all index pairs, compiled for batch evaluation."""

    p: int
    q: int
    keys: List[Tuple[Tuple[int, ...], Tuple[int, ...]]]
    exps: np.ndarray  # (M, 2p)
    halfdeg: np.ndarray  # (M,)
    coeffs: np.ndarray  # (K, M), front included

    @property
    def n(self) -> int:
        return self.q - 1

    def components(self, Y: np.ndarray) -> np.ndarray:
        """A[N, l, K] = front * P_{;2l}(y) for positive coordinates Y (N, p)."""
        Y = np.asarray(Y, dtype=complex).reshape(-1, self.p)
        N = Y.shape[0]
        out = np.zeros((N, self.n + 1, len(self.keys)), dtype=complex)
        for j in range(self.exps.shape[0]):
            e = self.exps[j]
            mono = np.ones(N, dtype=complex)
            for a in range(self.p):
                if e[a]:
                    mono = mono * Y[:, a] ** int(e[a])
                if e[self.p + a]:
                    mono = mono * np.conj(Y[:, a]) ** int(e[self.p + a])
            l = int(self.halfdeg[j])
            for k in range(len(self.keys)):
                c = self.coeffs[k, j]
                if c != 0:
                    out[:, l, k] += c * mono
        return out

    def l1_by_degree(self) -> np.ndarray:
        """Bound |front * P_{;2l}(y)| <= b[l] * |y|^{2l} per key (max over keys)."""
        b = np.zeros(self.n + 1)
        for l in range(self.n + 1):
            sel = self.halfdeg == l
            if np.any(sel):
                b[l] = np.max(np.sum(np.abs(self.coeffs[:, sel]), axis=1))
        return b


@lru_cache(maxsize=None)
def psi_polynomials(p: int, q: int) -> PsiPolynomials:
    polys = all_P(p, q)
    keys = list(polys)
    monos = sorted({e for P in polys.values() for e in P.terms})
    index = {e: i for i, e in enumerate(monos)}
    C = np.zeros((len(keys), len(monos)), dtype=complex)
    front = psi_front(q)
    for k, key in enumerate(keys):
        for e, c in polys[key].terms.items():
            C[k, index[e]] = front * complex(c)
    exps = np.array(monos, dtype=int).reshape(len(monos), 2 * p)
    half = exps.sum(axis=1)
    if np.any(half % 2):
        raise ValueError("odd monomial in P")
    return PsiPolynomials(p, q, keys, exps, half // 2, C)


def key_text(key) -> str:
    a, b = key
    return ",".join(map(str, a)) + ";" + ",".join(map(str, b))


# coefficient containers --------------------------------------------------------


@dataclass
class GreenValue:
    p: int
    q: int
    values: np.ndarray  # (K,) complex
    truncation_bound: float = float("nan")
    tail_estimate: float = 0.0
    lattice_vector_count: int = 0

    @property
    def keys(self):
        return psi_polynomials(self.p, self.q).keys

    @property
    def coeffs(self) -> Dict[Tuple[Tuple[int, ...], Tuple[int, ...]], complex]:
        return {k: complex(v) for k, v in zip(self.keys, self.values)}

    def norm(self) -> float:
        return float(np.linalg.norm(self.values))

    def hermitian_defect(self, sign: int = -1) -> float:
        """max |c(a;b) - sign * conj(c(b;a))|; psi-type forms have sign -1."""
        c = self.coeffs
        return max((abs(v - sign * np.conj(c[(k[1], k[0])])) for k, v in c.items()), default=0.0)

    def to_json(self) -> dict:
        return {
            "coefficients": {key_text(k): [v.real, v.imag] for k, v in self.coeffs.items()},
            "truncation": {
                "bound": self.truncation_bound,
                "tail_estimate": self.tail_estimate,
                "terms": self.lattice_vector_count,
            },
        }


def _fsum_rows(rows: np.ndarray) -> np.ndarray:
    """Exactly rounded column sums of a complex (N, K) array."""
    rows = np.asarray(rows, dtype=complex)
    if rows.shape[0] == 0:
        return np.zeros(rows.shape[1:], dtype=complex)
    flat = rows.reshape(rows.shape[0], -1)
    out = np.array(
        [complex(math.fsum(flat[:, j].real), math.fsum(flat[:, j].imag)) for j in range(flat.shape[1])]
    )
    return out.reshape(rows.shape[1:])


def _chunked(func: Callable[[np.ndarray], np.ndarray], X: np.ndarray, workers: int, width: int) -> np.ndarray:
    """Apply func to fixed-size chunks of X (independent of worker count), in order."""
    n = X.shape[0]
    if n == 0:
        return np.zeros((0,) + (width if isinstance(width, tuple) else (width,)), dtype=complex)
    pieces = [X[i:i + CHUNK] for i in range(0, n, CHUNK)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            res = list(ex.map(func, pieces))
    else:
        res = [func(c) for c in pieces]
    return np.concatenate(res, axis=0)


# psi^0 and Psi^0 ------------------------------------------------------------------


def psi0_rows(Y: np.ndarray, p: int, q: int) -> np.ndarray:
    """psi^0 coefficients for frame coordinates Y (N, m)."""
    PP = psi_polynomials(p, q)
    A = PP.components(Y[:, :p])
    R = np.sum(np.abs(Y[:, p:]) ** 2, axis=1)
    return A.sum(axis=1) * np.exp(-2 * math.pi * R)[:, None]


def psi0_eval(x, z: DomainPoint) -> GreenValue:
    y = z.coords(x)[None, :]
    return GreenValue(z.p, z.q, psi0_rows(y, z.p, z.q)[0])


def _gamma_weights(R: np.ndarray, n: int, policy: PrecisionPolicy) -> np.ndarray:
    """W[N, l] = (2 pi R)^{-l} Gamma(l, 2 pi R)."""
    W = np.empty((R.shape[0], n + 1))
    for i, r in enumerate(R):
        x = 2 * math.pi * float(r)
        for l in range(n + 1):
            W[i, l] = float(inc_gamma_int(l, x, policy)) / x ** l
    return W


def Psi0_rows(Y: np.ndarray, p: int, q: int, policy: PrecisionPolicy = DEFAULT) -> np.ndarray:
    PP = psi_polynomials(p, q)
    A = PP.components(Y[:, :p])
    R = np.sum(np.abs(Y[:, p:]) ** 2, axis=1)
    if np.any(R < EPS_CYCLE):
        raise CycleProximityError(f"R(x,z) = {R.min():.3e} below {EPS_CYCLE:g}")
    W = _gamma_weights(R, PP.n, policy)
    return -np.sum(A * W[:, :, None], axis=1)


def Psi0_eval(x, z: DomainPoint, policy: PrecisionPolicy = DEFAULT) -> GreenValue:
    """Closed form -sum_l P_{;2l}(x) (2 pi R)^{-l} Gamma(l, 2 pi R)."""
    x = np.asarray(x, dtype=complex)
    if not np.any(x):
        raise CycleProximityError("x = 0")
    y = z.coords(x)[None, :]
    return GreenValue(z.p, z.q, Psi0_rows(y, z.p, z.q, policy)[0])


@lru_cache(maxsize=None)
def _gl_nodes(n: int):
    return np.polynomial.legendre.leggauss(n)


def _gl_panel(f, a: float, b: float, n: int = 20):
    x, w = _gl_nodes(n)
    h = (b - a) / 2
    return h * sum(wi * f(a + h * (xi + 1)) for xi, wi in zip(x, w))


def adaptive_gl(f, a: float, b: float, tol: float = 1e-13, depth: int = 0):
    """Adaptive composite Gauss-Legendre; f returns an ndarray."""
    whole = _gl_panel(f, a, b)
    mid = (a + b) / 2
    left, right = _gl_panel(f, a, mid), _gl_panel(f, mid, b)
    both = left + right
    scale = max(np.max(np.abs(both)), 1e-300)
    if np.max(np.abs(both - whole)) <= tol * scale or depth > 30:
        return both
    return adaptive_gl(f, a, mid, tol, depth + 1) + adaptive_gl(f, mid, b, tol, depth + 1)


def Psi0_quadrature(x, z: DomainPoint) -> GreenValue:
    """-int_1^inf psi^0(sqrt(t) x, z) dt/t, on the log scale t = e^u."""
    p, q = z.p, z.q
    y = z.coords(x)
    R = float(np.sum(np.abs(y[p:]) ** 2))
    if R < EPS_CYCLE:
        raise CycleProximityError(f"R(x,z) = {R:.3e}")
    A = psi_polynomials(p, q).components(y[None, :p])[0]  # (n+1, K)
    n = q - 1
    # integrand below 1e-30 of its peak beyond T
    T = 1.0
    while 2 * math.pi * R * T - n * math.log(T) < 80 + 2 * math.pi * R:
        T *= 2
    umax = math.log(T)

    def f(u):
        t = math.exp(u)
        return sum(A[l] * t ** l for l in range(n + 1)) * math.exp(-2 * math.pi * R * t)

    panels = max(1, int(math.ceil(umax / 0.5)))
    edges = np.linspace(0.0, umax, panels + 1)
    total = sum(adaptive_gl(f, edges[i], edges[i + 1]) for i in range(panels))
    return GreenValue(p, q, -total)


# cosets and vectors ------------------------------------------------------------


def _resolve_coset(L: HermitianLattice, h) -> Tuple[Fraction, ...]:
    D = L.discriminant_group
    if isinstance(h, int):
        if not 0 <= h < D.order:
            raise LatticeError(f"coset index {h} out of range 0..{D.order - 1}")
        return D.reps[h]
    return tuple(Fraction(x) for x in h)


def _check_lattice_point(L: HermitianLattice, z: DomainPoint):
    if L.signature != (z.p, z.q):
        raise DomainError(f"lattice signature {L.signature} != point signature {(z.p, z.q)}")


def _box_count(Qinv_diag: np.ndarray, X: float) -> float:
    return float(np.prod(2 * np.sqrt(X * Qinv_diag) + 1))


# Kudla Green form ---------------------------------------------------------------


def _kudla_tail(L, z, PP: PsiPolynomials, two_m: float, w: float, B: float) -> float:
    from .lattice import majorant_matrix

    Qd = np.diag(np.linalg.inv(majorant_matrix(L, z.ginv)))
    b = PP.l1_by_degree()
    tail = 0.0
    X = B
    for _ in range(200):
        lo, hi = X, 2 * X
        Rmin = (lo - two_m) / 2
        if Rmin <= 0:
            X = hi
            continue
        xr = 2 * math.pi * w * Rmin
        term = sum(b[l] * (w * hi) ** l * float(inc_gamma_int(l, xr)) / xr ** l for l in range(PP.n + 1))
        contrib = _box_count(Qd, hi) * term
        tail += contrib
        if contrib < 1e-300 or (tail > 0 and contrib < 1e-18 * tail):
            break
        X = hi
    return tail


def xi_kudla(L: HermitianLattice, m, h, w: float, z: DomainPoint, B: float, workers: int = 1,
             include_zero_term: bool = False, intro_factor: bool = False,
             vectors: Optional[np.ndarray] = None, policy: PrecisionPolicy = DEFAULT) -> GreenValue:
    """Sum of Psi^0(sqrt(w) lambda, z) over lambda in L + h, <lambda,lambda> = 2m, lambda != 0.

    ``vectors`` replaces the lattice enumeration by explicit vectors of V.
    ``include_zero_term`` adds -psi^0(0) log(w) when (m, h) = (0, 0).
    ``intro_factor`` multiplies by exp(-2 pi m w).
    """
    if w <= 0:
        raise ParameterRangeError("w must be positive")
    _check_lattice_point(L, z)
    p, q = z.p, z.q
    PP = psi_polynomials(p, q)
    two_m = Fraction(m) * 2
    hh = _resolve_coset(L, h)
    if vectors is None:
        E = enumerate_vectors(L, hh, two_m, z.ginv, B, workers)
        V = E.vectors
        tail = _kudla_tail(L, z, PP, float(two_m), w, B)
    else:
        V = np.asarray(vectors, dtype=complex).reshape(-1, p + q)
        tail = 0.0
    V = V[np.any(V != 0, axis=1)]

    def chunk(Xc):
        Y = _coords_rows(z, Xc) * math.sqrt(w)
        return Psi0_rows(Y, p, q, policy)

    rows = _chunked(chunk, V, workers, len(PP.keys))
    val = _fsum_rows(rows)
    if include_zero_term and two_m == 0 and not any(hh):
        psi_zero = psi0_rows(np.zeros((1, p + q)), p, q)[0]
        val = val - psi_zero * math.log(w)
    if intro_factor:
        val = val * math.exp(-2 * math.pi * float(m) * w)
    return GreenValue(p, q, val, B, tail, V.shape[0])


# theta series ------------------------------------------------------------------


@dataclass
class ThetaValue:
    p: int
    q: int
    tau: complex
    values: np.ndarray  # (cosets, K)
    bound: float
    tail_estimate: float
    terms: int

    @property
    def weight(self) -> int:
        return self.p + self.q - 2

    def norm(self) -> float:
        return float(np.linalg.norm(self.values))

    def to_json(self) -> dict:
        keys = psi_polynomials(self.p, self.q).keys
        return {
            "cosets": [
                {key_text(k): [c.real, c.imag] for k, c in zip(keys, row)} for row in self.values
            ],
            "weight": self.weight,
            "tau": [self.tau.real, self.tau.imag],
            "truncation": {"bound": self.bound, "tail_estimate": self.tail_estimate, "terms": self.terms},
        }


def theta_psi(L: HermitianLattice, tau: complex, z: DomainPoint, B: float, workers: int = 1) -> ThetaValue:
    """v sum_h sum_{lambda in L+h} psi^0(sqrt(2v) lambda, z) e(u <lambda,lambda>) e_h.

    Vectors with majorant above B / v are omitted.
    """
    tau = complex(tau)
    u, v = tau.real, tau.imag
    if v <= 0:
        raise ParameterRangeError("Im(tau) must be positive")
    _check_lattice_point(L, z)
    p, q = z.p, z.q
    PP = psi_polynomials(p, q)
    D = L.discriminant_group
    out = np.zeros((D.order, len(PP.keys)), dtype=complex)
    count = 0
    for i, h in enumerate(D.reps):
        E = enumerate_vectors(L, h, None, z.ginv, B / v, workers)
        count += E.count
        Nrat = E.norm_num.astype(float) / E.norm_den
        Xv = np.concatenate([E.vectors, Nrat[:, None] + 0j], axis=1)

        def chunk(Xc):
            Y = _coords_rows(z, Xc[:, :-1])
            A = PP.components(Y[:, :p] * math.sqrt(2 * v)).sum(axis=1)
            maj = np.sum(np.abs(Y) ** 2, axis=1)
            ph = np.exp(2j * math.pi * np.mod(u * Xc[:, -1].real, 1.0))
            return A * (v * np.exp(-2 * math.pi * v * maj) * ph)[:, None]

        rows = _chunked(chunk, Xv, workers, len(PP.keys))
        out[i] = _fsum_rows(rows)
    return ThetaValue(p, q, tau, out, B, _theta_tail(L, z, PP, v, B), count)


def _theta_tail(L, z, PP, v, B):
    from .lattice import majorant_matrix

    Qd = np.diag(np.linalg.inv(majorant_matrix(L, z.ginv)))
    b = PP.l1_by_degree()
    order = L.discriminant_group.order
    tail = 0.0
    X = B / v
    for _ in range(200):
        hi = 2 * X
        term = sum(b[l] * (2 * v * hi) ** l for l in range(PP.n + 1)) * v * math.exp(-2 * math.pi * v * X)
        contrib = order * _box_count(Qd, hi) * term
        tail += contrib
        if contrib < 1e-300 or contrib < 1e-18 * tail:
            break
        X = hi
    return tail


@dataclass
class ModularityReport:
    gamma: str
    tau: complex
    lhs: np.ndarray
    rhs: np.ndarray

    @property
    def rel_error(self) -> float:
        return float(np.linalg.norm(self.lhs - self.rhs) / max(np.linalg.norm(self.rhs), 1e-300))


def theta_modularity(L: HermitianLattice, gamma: str, tau: complex, z: DomainPoint, B: float,
                     workers: int = 1, dual: bool = False, s_phase_exponent: Optional[int] = None) -> ModularityReport:
    """Compare Theta(gamma tau) with (c tau + d)^kappa omega_L(gamma) Theta(tau)."""
    tau = complex(tau)
    W = WeilRepFinite(L, dual=dual, s_phase_exponent=s_phase_exponent)
    base = theta_psi(L, tau, z, B, workers)
    kappa = base.weight
    if gamma == "T":
        img = theta_psi(L, tau + 1, z, B, workers)
        rhs = W.T_diag[:, None] * base.values
    elif gamma == "S":
        img = theta_psi(L, -1 / tau, z, B, workers)
        rhs = tau ** kappa * (W.S_matrix @ base.values)
    else:
        raise ParameterRangeError(f"gamma must be S or T, got {gamma!r}")
    return ModularityReport(gamma, tau, img.values, rhs)


# Bruinier Green form -------------------------------------------------------------


def _bruinier_check(p: int, q: int, s: float):
    if not s > 1 + (p + q) / 2:
        raise ParameterRangeError(f"s = {s} outside the convergent range s > {1 + (p + q) / 2}")


def _bruinier_rows(Y: np.ndarray, p: int, q: int, m: float, s: float, policy: PrecisionPolicy) -> np.ndarray:
    PP = psi_polynomials(p, q)
    k = 2 - (p + q)
    A = PP.components(Y[:, :p])
    N = np.sum(np.abs(Y[:, :p]) ** 2, axis=1)
    R = np.sum(np.abs(Y[:, p:]) ** 2, axis=1)
    if np.any(R < EPS_CYCLE):
        raise CycleProximityError(f"R(lambda,z) = {R.min():.3e} below {EPS_CYCLE:g}")
    a0 = s - k / 2
    pref = (4 * math.pi * m) ** a0 / (2 * math.gamma(2 * s))
    out = np.zeros((Y.shape[0], len(PP.keys)), dtype=complex)
    for i in range(Y.shape[0]):
        zarg = 2 * m / N[i]
        for l in range(PP.n + 1):
            a = a0 + l
            f = math.gamma(a) / (2 * math.pi * N[i]) ** a * float(gauss_2f1(a, s + k / 2, 2 * s, zarg, policy))
            out[i] += A[i, l] * f
    return out * pref


def _bruinier_tail(L, z, PP, m, s, B):
    from .lattice import majorant_matrix

    p, q = z.p, z.q
    k = 2 - (p + q)
    a0 = s - k / 2
    Qd = np.diag(np.linalg.inv(majorant_matrix(L, z.ginv)))
    b = PP.l1_by_degree()
    pref = (4 * math.pi * m) ** a0 / (2 * math.gamma(2 * s))
    tail = 0.0
    X = max(B, 4 * m + 1)
    prev = None
    for _ in range(5000):
        hi = 2 * X
        Nlo = m + X / 2
        zmax = 2 * m / Nlo
        term = sum(
            b[l] * hi ** l * math.gamma(a0 + l) / (2 * math.pi * Nlo) ** (a0 + l)
            * float(gauss_2f1(a0 + l, s + k / 2, 2 * s, zmax))
            for l in range(PP.n + 1)
        )
        contrib = pref * _box_count(Qd, hi) * term
        tail += contrib
        if contrib < 1e-300 or contrib < 1e-16 * tail:
            break
        if prev is not None and contrib > prev * 0.999999:
            return float("inf")
        prev = contrib
        X = hi
    return tail


def green_bruinier_closed(L: HermitianLattice, m, h, s: float, z: DomainPoint, B: float, workers: int = 1,
                          vectors: Optional[np.ndarray] = None,
                          policy: PrecisionPolicy = DEFAULT) -> GreenValue:
    """Closed-form lattice sum for the Bruinier Green form at z; <lambda,lambda> = 2m, m > 0."""
    m = Fraction(m)
    if m <= 0:
        raise ParameterRangeError("m must be positive")
    p, q = z.p, z.q
    _bruinier_check(p, q, s)
    PP = psi_polynomials(p, q)
    if vectors is None:
        _check_lattice_point(L, z)
        E = enumerate_vectors(L, _resolve_coset(L, h), 2 * m, z.ginv, B, workers)
        V = E.vectors
        tail = _bruinier_tail(L, z, PP, float(m), s, B)
    else:
        V = np.asarray(vectors, dtype=complex).reshape(-1, p + q)
        tail = 0.0

    def chunk(Xc):
        return _bruinier_rows(_coords_rows(z, Xc), p, q, float(m), s, policy)

    rows = _chunked(chunk, V, workers, len(PP.keys))
    return GreenValue(p, q, _fsum_rows(rows), B, tail, V.shape[0])


@dataclass
class SummandLines:
    raw: np.ndarray
    cosh: np.ndarray
    euler: np.ndarray

    def spread(self) -> float:
        ref = max(np.linalg.norm(self.euler), 1e-300)
        return float(max(np.linalg.norm(self.raw - self.euler), np.linalg.norm(self.cosh - self.euler)) / ref)


def phi_s_lines(m: float, s: float, t: float, p: int, q: int, policy: PrecisionPolicy = DEFAULT) -> SummandLines:
    """The three equivalent expressions for the summand at lambda = sqrt(2m) v_1, z = a_t z0."""
    if t <= 0:
        raise ParameterRangeError("t must be positive")
    PP = psi_polynomials(p, q)
    k = 2 - (p + q)
    e1 = np.zeros((1, p), dtype=complex)
    e1[0, 0] = 1
    P1 = PP.components(e1)[0]  # (n+1, K)
    ch, th = math.cosh(t), math.tanh(t)
    zarg = 1 / (ch * ch)
    g2 = 2 * math.gamma(2 * s)
    Pl = PP.components(e1 * ch * math.sqrt(2 * m))[0]
    raw = np.zeros(len(PP.keys), dtype=complex)
    cosh = np.zeros_like(raw)
    euler = np.zeros_like(raw)
    for l in range(PP.n + 1):
        a = s - k / 2 + l
        F = float(gauss_2f1(a, s + k / 2, 2 * s, zarg, policy))
        raw += Pl[l] * math.gamma(a) / ((4 * math.pi * m) ** l * (ch * ch) ** a) * F
        base = P1[l] * math.gamma(a) / ((2 * math.pi) ** l * ch ** (2 * s - k))
        cosh += base * F
        euler += base * th ** (-2 * l) * float(gauss_2f1(s + k / 2 - l, s - k / 2, 2 * s, zarg, policy))
    return SummandLines(raw / g2, cosh / g2, euler / g2)


def phi_s_summand(m: float, s: float, t: float, p: int, q: int, tol: float = 1e-10,
                  policy: PrecisionPolicy = DEFAULT) -> np.ndarray:
    lines = phi_s_lines(m, s, t, p, q, policy)
    # the raw and cosh lines evaluate 2F1 at z = 1/cosh^2 t, whose distance to 1
    # is only known to eps / tanh^2 t relative accuracy
    tol = tol + 16 * np.finfo(float).eps / math.tanh(t) ** 2
    if lines.spread() > tol:
        raise ArithmeticError(f"summand expressions disagree: spread {lines.spread():.3e} at t = {t}")
    return lines.euler


# Hejhal Poincare series -----------------------------------------------------------


def sl2_word(a: int, b: int, c: int, d: int) -> List[str]:
    """Word in S, T, Tinv whose product (left to right) is [[a, b], [c, d]].

    S = [[0, -1], [1, 0]] and T = [[1, 1], [0, 1]].
    """
    if a * d - b * c != 1:
        raise ValueError("matrix not in SL2(Z)")
    word: List[str] = []
    M = [a, b, c, d]
    while M[2] != 0:
        n = _round_div(M[0], M[2])
        word += ["T"] * n if n >= 0 else ["Tinv"] * (-n)
        a1, b1 = M[0] - n * M[2], M[1] - n * M[3]
        # M = T^n S M'  with  M' = S^{-1} T^{-n} M
        word.append("S")
        M = [M[2], M[3], -a1, -b1]
    if M[0] == -1:
        word += ["S", "S"]
        M = [1, -M[1], 0, 1]
    n = M[1]
    word += ["T"] * n if n >= 0 else ["Tinv"] * (-n)
    return word


def _round_div(a: int, c: int) -> int:
    return int(math.floor(Fraction(a, c) + Fraction(1, 2)))


def word_matrix(word: Sequence[str]) -> Tuple[int, int, int, int]:
    gens = {"S": (0, -1, 1, 0), "T": (1, 1, 0, 1), "Tinv": (1, -1, 0, 1)}
    a, b, c, d = 1, 0, 0, 1
    for g in word:
        e, f, gg, hh = gens[g]
        a, b, c, d = a * e + b * gg, a * f + b * hh, c * e + d * gg, c * f + d * hh
    return a, b, c, d


def poincare_pairs(tau: complex, c_max: int) -> List[Tuple[int, int]]:
    """Coset representatives (c, d) with c >= 0, (0, 1) for c = 0, |c tau + d| <= c_max Im(tau)."""
    u, v = tau.real, tau.imag
    X = c_max * v
    out = [(0, 1)]
    for c in range(1, c_max + 1):
        if c * v > X:
            break
        r = math.sqrt(max(X * X - (c * v) ** 2, 0.0))
        for d in range(math.floor(-c * u - r) - 1, math.ceil(-c * u + r) + 2):
            if math.gcd(c, d) == 1 and (c * u + d) ** 2 + (c * v) ** 2 <= X * X:
                out.append((c, d))
    return out


def _ext_gcd_ab(c: int, d: int) -> Tuple[int, int]:
    """(a, b) with a d - b c = 1."""
    if c == 0:
        return (1, 0) if d == 1 else (-1, 0)
    g, x, y = _egcd(d, -c)
    if g < 0:
        x, y = -x, -y
    return x, y


def _egcd(a: int, b: int):
    if b == 0:
        return a, 1, 0
    g, x, y = _egcd(b, a % b)
    return g, y, x - (a // b) * y


def poincare_seed(m: float, s: float, k: int, tau: complex) -> complex:
    """M_s(4 pi |m| v) e(m u) with M_s(y) = y^{-k/2} M_{sgn(m) k/2, s-1/2}(y)."""
    y = 4 * math.pi * abs(m) * tau.imag
    kap = math.copysign(1, m) * k / 2
    return y ** (-k / 2) * float(whittaker_M(kap, s - 0.5, y)) * np.exp(2j * math.pi * m * tau.real)


@dataclass
class PoincareValue:
    tau: complex
    values: np.ndarray
    terms: int
    tail_estimate: float


def hejhal_poincare(L: HermitianLattice, m, h, s: float, tau: complex, c_max: int,
                    pairs: Optional[List[Tuple[int, int]]] = None, direct_omega: bool = False,
                    workers: int = 1) -> PoincareValue:
    """(1/4 Gamma(2s)) sum over cosets of [M_s(4 pi |m| v) e(m u) e_h] |_{k, L^-} A.

    The slash is (f|A)(tau) = (c tau + d)^{-k} omega(A)^{-1} f(A tau) with
    omega = omega_{L^-}; ``direct_omega`` uses omega(A) in place of its inverse.
    """
    tau = complex(tau)
    if s <= 1:
        raise ParameterRangeError("s must exceed 1")
    p, q = L.signature
    k = 2 - (p + q)
    W = WeilRepFinite(L, dual=True)
    hi = _resolve_coset(L, h)
    hidx = L.discriminant_group.index(hi)
    n = L.discriminant_group.order
    if pairs is None:
        pairs = poincare_pairs(tau, c_max)
    e_h = np.zeros(n, dtype=complex)
    e_h[hidx] = 1

    def term(cd):
        c, d = cd
        a, b = _ext_gcd_ab(c, d)
        col = W.apply_word(sl2_word(a, b, c, d), e_h, inverse=not direct_omega)
        j = c * tau + d
        At = (a * tau + b) / j
        return j ** (-k) * poincare_seed(float(m), s, k, At) * col

    def chunk(P):
        return np.array([term((int(c), int(d))) for c, d in P.real]).reshape(len(P), n)

    rows = _chunked(chunk, np.array(pairs, dtype=complex).reshape(-1, 2), workers, n)
    val = _fsum_rows(rows) / (4 * math.gamma(2 * s))
    X = c_max * tau.imag
    y = 4 * math.pi * abs(float(m)) * tau.imag
    if X > 0:
        tail = (y ** (s - k / 2) * 6 / (math.pi * tau.imag) * X ** (2 - 2 * s) / (2 * s - 2)) / (4 * math.gamma(2 * s))
    else:
        tail = float("inf")  # the seed alone; nothing bounds the rest
    return PoincareValue(tau, val, len(pairs), tail)


def laplacian_fd(f: Callable[[complex], np.ndarray], tau: complex, k: float, step: Optional[float] = None) -> np.ndarray:
    """Delta_k f = -v^2 (f_uu + f_vv) + i k v (f_u + i f_v), 5-point central differences."""
    v = tau.imag
    hstep = step if step is not None else 1e-3 * v
    c1 = np.array([1, -8, 0, 8, -1]) / (12 * hstep)
    c2 = np.array([-1, 16, -30, 16, -1]) / (12 * hstep * hstep)
    off = [-2, -1, 0, 1, 2]
    fu = [f(tau + o * hstep) for o in off]
    fv = [f(tau + 1j * o * hstep) for o in off]
    du = sum(c * x for c, x in zip(c1, fu))
    dv = sum(c * x for c, x in zip(c1, fv))
    duu = sum(c * x for c, x in zip(c2, fu))
    dvv = sum(c * x for c, x in zip(c2, fv))
    return -v * v * (duu + dvv) + 1j * k * v * (du + 1j * dv)


def poincare_eigenvalue(p: int, q: int, s: float) -> float:
    kappa = p + q - 2
    return kappa * kappa / 4 + kappa / 2 + s * (1 - s)
