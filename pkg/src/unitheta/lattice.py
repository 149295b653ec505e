"""Hermitian lattices over imaginary quadratic rings.

A lattice is O_F^n with an O_F-valued hermitian Gram matrix.  Vectors are
stored by their integer coordinates u in Z^{2n} with respect to the Z-basis
e_1, omega e_1, ..., e_n, omega e_n; coset representatives h carry rational
coordinates.  The hermitian form is antilinear in the first argument.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import product
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np


class LatticeError(ValueError):
    pass


def _squarefree(n: int) -> bool:
    n = abs(n)
    d = 2
    while d * d <= n:
        if n % (d * d) == 0:
            return False
        d += 1
    return True


@dataclass(frozen=True)
class ImagQuadField:
    """F = Q(sqrt(d)) with d < 0 a fundamental discriminant."""

    disc: int

    def __post_init__(self):
        d = self.disc
        ok = d < 0 and (
            (d % 4 == 1 and _squarefree(d))
            or (d % 4 == 0 and (d // 4) % 4 in (2, 3) and _squarefree(d // 4))
        )
        if not ok:
            raise LatticeError(f"{d} is not a negative fundamental discriminant")

    @property
    def sqrt_disc(self) -> complex:
        return complex(0.0, math.sqrt(-self.disc))

    @property
    def omega(self) -> complex:
        """(d + sqrt(d)) / 2."""
        return (self.disc + self.sqrt_disc) / 2

    @property
    def delta(self) -> complex:
        """Generator sqrt(d) of the different, positive imaginary part."""
        return self.sqrt_disc

    def embed(self, a: Fraction, b: Fraction) -> complex:
        return float(a) + float(b) * self.omega

    def mul(self, x: Tuple[Fraction, Fraction], y: Tuple[Fraction, Fraction]) -> Tuple[Fraction, Fraction]:
        # omega^2 = d omega - (d^2 - d)/4
        a, b = x
        c, e = y
        d = self.disc
        n = Fraction(d * d - d, 4)
        return (a * c - b * e * n, a * e + b * c + b * e * d)

    def conj(self, x: Tuple[Fraction, Fraction]) -> Tuple[Fraction, Fraction]:
        # conj(omega) = d - omega
        a, b = x
        return (a + b * self.disc, -b)


def _smith_diagonal(M: List[List[int]]) -> List[int]:
    """Invariant factors of an integer matrix (plain row/column elimination)."""
    A = [list(r) for r in M]
    n = len(A)
    diag = []
    for t in range(n):
        while True:
            piv = None
            for i in range(t, n):
                for j in range(t, n):
                    if A[i][j] and (piv is None or abs(A[i][j]) < abs(A[piv[0]][piv[1]])):
                        piv = (i, j)
            if piv is None:
                diag.extend([0] * (n - t))
                return diag
            i, j = piv
            A[t], A[i] = A[i], A[t]
            for r in A:
                r[t], r[j] = r[j], r[t]
            p = A[t][t]
            done = True
            for i in range(t + 1, n):
                q = A[i][t] // p
                for j in range(t, n):
                    A[i][j] -= q * A[t][j]
                if A[i][t]:
                    done = False
            for j in range(t + 1, n):
                q = A[t][j] // p
                for i in range(t, n):
                    A[i][j] -= q * A[i][t]
                if A[t][j]:
                    done = False
            if not done:
                continue
            bad = [(i, j) for i in range(t + 1, n) for j in range(t + 1, n) if A[i][j] % p]
            if bad:
                i, _ = bad[0]
                for j in range(t, n):
                    A[t][j] += A[i][j]
                continue
            diag.append(abs(p))
            break
    return diag


class HermitianLattice:
    """L = O_F^n with hermitian Gram matrix ``gram`` (entries a + b omega)."""

    def __init__(self, field: ImagQuadField, gram: Sequence[Sequence[Tuple[Fraction, Fraction]]],
                 signature: Optional[Tuple[int, int]] = None):
        self.field = field
        self.gram = [[(Fraction(a), Fraction(b)) for a, b in row] for row in gram]
        n = len(self.gram)
        if any(len(r) != n for r in self.gram):
            raise LatticeError("Gram matrix must be square")
        self.n = n
        for i in range(n):
            for j in range(n):
                if self.gram[i][j] != field.conj(self.gram[j][i]):
                    raise LatticeError(f"Gram matrix is not hermitian at ({i},{j})")
        for row in self.gram:
            for a, b in row:
                if a.denominator != 1 or b.denominator != 1:
                    raise LatticeError("Gram entries must lie in O_F")
        ev = np.linalg.eigvalsh(self.gram_complex)
        if np.min(np.abs(ev)) < 1e-12:
            raise LatticeError("Gram matrix is singular")
        sig = (int(np.sum(ev > 0)), int(np.sum(ev < 0)))
        if signature is not None and tuple(signature) != sig:
            raise LatticeError(f"declared signature {tuple(signature)} != computed {sig}")
        self.signature = sig
        if not self.is_even():
            raise LatticeError("lattice is not even: <x,x> must be an integer on L")

    # exact data ------------------------------------------------------
    @cached_property
    def gram_complex(self) -> np.ndarray:
        return np.array([[self.field.embed(a, b) for a, b in r] for r in self.gram], dtype=complex)

    @cached_property
    def basis_values(self) -> List[Tuple[Fraction, Fraction]]:
        """Z-basis of O_F: 1 and omega."""
        return [(Fraction(1), Fraction(0)), (Fraction(0), Fraction(1))]

    @cached_property
    def half_trace_form(self) -> List[List[Fraction]]:
        """Rational symmetric S with <x,x> = u^T S u and Re<x,y> = u^T S v."""
        F = self.field
        N = 2 * self.n
        S = [[Fraction(0)] * N for _ in range(N)]
        for i in range(self.n):
            for j in range(self.n):
                for s, bs in enumerate(self.basis_values):
                    for t, bt in enumerate(self.basis_values):
                        # <bs e_i, bt e_j> = conj(bs) G_ij bt
                        val = F.mul(F.mul(F.conj(bs), self.gram[i][j]), bt)
                        # real part of a + b omega is a + b d/2
                        S[2 * i + s][2 * j + t] = val[0] + val[1] * Fraction(F.disc, 2)
        return S

    @cached_property
    def trace_gram(self) -> List[List[int]]:
        """Integer Gram matrix of Tr<x,y> = 2 Re<x,y> on Z^{2n}."""
        out = [[2 * x for x in r] for r in self.half_trace_form]
        for r in out:
            for x in r:
                if x.denominator != 1:
                    raise LatticeError("trace form is not integral")
        return [[int(x) for x in r] for r in out]

    def is_even(self) -> bool:
        S = self.half_trace_form
        N = len(S)
        for i in range(N):
            if S[i][i].denominator != 1:
                return False
            for j in range(i + 1, N):
                if (2 * S[i][j]).denominator != 1:
                    return False
        return True

    def norm(self, u: Sequence[Fraction]) -> Fraction:
        """Exact <x,x> for real coordinates u."""
        S = self.half_trace_form
        N = len(S)
        return sum(S[i][j] * u[i] * u[j] for i in range(N) for j in range(N))

    def pairing_re(self, u: Sequence[Fraction], w: Sequence[Fraction]) -> Fraction:
        S = self.half_trace_form
        N = len(S)
        return sum(S[i][j] * u[i] * w[j] for i in range(N) for j in range(N))

    # embedding into (C^m, diag(1_p, -1_q)) ---------------------------
    @cached_property
    def embedding(self) -> np.ndarray:
        """Complex m x n matrix E with E^* H E = gram, positive directions first."""
        G = self.gram_complex
        w, U = np.linalg.eigh(G)
        order = list(np.argsort(-w, kind="stable"))
        w = w[order]
        U = U[:, order]
        return (np.sqrt(np.abs(w))[:, None] * U.conj().T)

    @cached_property
    def real_basis(self) -> np.ndarray:
        """Complex m x 2n matrix mapping real coordinates u to vectors of V."""
        E = self.embedding
        cols = []
        for j in range(self.n):
            cols.append(E[:, j])
            cols.append(E[:, j] * self.field.omega)
        return np.stack(cols, axis=1)

    def to_vector(self, u: Sequence) -> np.ndarray:
        return self.real_basis @ np.array([float(x) for x in u])

    @property
    def H(self) -> np.ndarray:
        p, q = self.signature
        return np.diag([1.0] * p + [-1.0] * q)

    # dual lattice and discriminant group -----------------------------
    @cached_property
    def dual_basis(self) -> List[List[Fraction]]:
        """Columns: real coordinates of a Z-basis of L# (inverse of the trace Gram)."""
        T = [[Fraction(x) for x in r] for r in self.trace_gram]
        return _inverse(T)

    @cached_property
    def discriminant_group(self) -> "DiscriminantGroup":
        return DiscriminantGroup.from_lattice(self)

    def to_json(self) -> dict:
        return {
            "field_disc": self.field.disc,
            "signature": list(self.signature),
            "gram": [
                [{"re_num": a.numerator, "re_den": a.denominator,
                  "omega_num": b.numerator, "omega_den": b.denominator} for a, b in r]
                for r in self.gram
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> "HermitianLattice":
        try:
            field = ImagQuadField(int(data["field_disc"]))
            gram = [
                [(Fraction(int(e["re_num"]), int(e.get("re_den", 1))),
                  Fraction(int(e["omega_num"]), int(e.get("omega_den", 1)))) for e in row]
                for row in data["gram"]
            ]
            sig = data.get("signature")
        except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
            raise LatticeError(f"malformed lattice config: {exc}") from exc
        return cls(field, gram, tuple(sig) if sig is not None else None)

    @classmethod
    def load(cls, path: str) -> "HermitianLattice":
        with open(path) as fh:
            return cls.from_json(json.load(fh))

    @classmethod
    def diagonal(cls, disc: int, entries: Sequence[int]) -> "HermitianLattice":
        n = len(entries)
        gram = [[(Fraction(entries[i] if i == j else 0), Fraction(0)) for j in range(n)] for i in range(n)]
        return cls(ImagQuadField(disc), gram)

    def __repr__(self):
        return f"HermitianLattice(d={self.field.disc}, n={self.n}, sig={self.signature})"


def _inverse(A: List[List[Fraction]]) -> List[List[Fraction]]:
    n = len(A)
    M = [list(r) + [Fraction(int(i == j)) for j in range(n)] for i, r in enumerate(A)]
    for c in range(n):
        piv = next((r for r in range(c, n) if M[r][c] != 0), None)
        if piv is None:
            raise LatticeError("singular trace form")
        M[c], M[piv] = M[piv], M[c]
        pv = M[c][c]
        M[c] = [x / pv for x in M[c]]
        for r in range(n):
            if r != c and M[r][c] != 0:
                f = M[r][c]
                M[r] = [x - f * y for x, y in zip(M[r], M[c])]
    return [r[n:] for r in M]


@dataclass
class DiscriminantGroup:
    lattice: HermitianLattice
    invariants: List[int]
    reps: List[Tuple[Fraction, ...]]

    @property
    def order(self) -> int:
        return len(self.reps)

    @classmethod
    def from_lattice(cls, L: HermitianLattice) -> "DiscriminantGroup":
        T = L.trace_gram
        inv = [d for d in _smith_diagonal(T) if d != 1]
        Binv = L.dual_basis  # columns generate L#
        N = len(T)
        order = abs(round(np.linalg.det(np.array(T, dtype=float))))
        # enumerate L#/L by reducing combinations of dual basis vectors mod Z^N
        seen = {}
        frontier = [tuple(Fraction(0) for _ in range(N))]
        seen[frontier[0]] = True
        gens = [tuple(Binv[i][j] for i in range(N)) for j in range(N)]
        while frontier:
            nxt = []
            for h in frontier:
                for g in gens:
                    c = tuple((a + b) - math.floor(a + b) for a, b in zip(h, g))
                    if c not in seen:
                        seen[c] = True
                        nxt.append(c)
            frontier = nxt
        reps = sorted(seen, key=lambda h: (L.norm(h) % 2, h))
        reps.sort(key=lambda h: (any(h), h))
        if len(reps) != order:
            raise LatticeError(f"coset enumeration found {len(reps)} != |det| = {order}")
        return cls(L, inv, reps)

    def index(self, h: Sequence[Fraction]) -> int:
        key = tuple(Fraction(x) - math.floor(Fraction(x)) for x in h)
        return self.reps.index(key)

    def value(self, i: int) -> Fraction:
        """<h,h> mod 2."""
        return self.lattice.norm(self.reps[i]) % 2

    def neg(self, i: int) -> int:
        return self.index([-x for x in self.reps[i]])

    def pairing(self, i: int, j: int) -> Fraction:
        """Re<h_i, h_j> mod 1."""
        return self.lattice.pairing_re(self.reps[i], self.reps[j]) % 1


# finite Weil representation ------------------------------------------


def _e(x) -> complex:
    """exp(2 pi i x) with x reduced exactly modulo 1 first."""
    x = Fraction(x) % 1
    return complex(math.cos(2 * math.pi * x), math.sin(2 * math.pi * x))


@dataclass
class WeilRepFinite:
    """omega_L on C[L#/L]; ``dual`` gives omega_{L^-}, the complex conjugate."""

    lattice: HermitianLattice
    dual: bool = False
    # power of i in the S constant.  The default q - p is the value for which
    # (ST)^3 = S^2 holds; p - q can be requested explicitly.
    s_phase_exponent: Optional[int] = None

    @cached_property
    def group(self) -> DiscriminantGroup:
        return self.lattice.discriminant_group

    @cached_property
    def T_diag(self) -> np.ndarray:
        D = self.group
        d = np.array([_e(D.lattice.norm(h)) for h in D.reps])
        return np.conj(d) if self.dual else d

    @cached_property
    def S_matrix(self) -> np.ndarray:
        D = self.group
        p, q = self.lattice.signature
        k = (q - p) if self.s_phase_exponent is None else self.s_phase_exponent
        c = (1j ** (k % 4)) / math.sqrt(D.order)
        # 2 Re<mu,h> = mu^T T h with T the integral trace Gram; reduce the
        # integer numerators mod den^2 before touching floats
        den = 1
        for h in D.reps:
            for x in h:
                den = den * x.denominator // math.gcd(den, x.denominator)
        R = np.array([[int(x * den) for x in h] for h in D.reps], dtype=np.int64)
        T = np.array(self.lattice.trace_gram, dtype=np.int64)
        mod = den * den
        P = np.mod(-(R @ T @ R.T), mod)
        M = c * np.exp(2j * np.pi * (P / mod))
        return np.conj(M) if self.dual else M

    def apply(self, gen: str, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=complex)
        if v.shape[-1] != self.group.order:
            raise LatticeError(f"vector has dimension {v.shape[-1]}, expected {self.group.order}")
        if gen == "T":
            return self.T_diag * v
        if gen == "Tinv":
            return np.conj(self.T_diag) * v
        if gen == "S":
            return self.S_matrix @ v
        if gen == "Sinv":
            return self.S_matrix.conj().T @ v
        raise LatticeError(f"unknown generator {gen!r}")

    def apply_word(self, word: Sequence[str], v, inverse: bool = False) -> np.ndarray:
        """omega(g_1 ... g_r) v, or omega(g_1 ... g_r)^{-1} v when ``inverse``."""
        inv = {"S": "Sinv", "Sinv": "S", "T": "Tinv", "Tinv": "T"}
        v = np.asarray(v, dtype=complex)
        if inverse:
            for g in word:
                v = self.apply(inv[g], v)
        else:
            for g in reversed(word):
                v = self.apply(g, v)
        return v

    def matrix(self, word: Sequence[str]) -> np.ndarray:
        """Matrix of the product word[0] word[1] ... acting on column vectors."""
        n = self.group.order
        M = np.eye(n, dtype=complex)
        for g in word:
            M = M @ self.apply(g, np.eye(n, dtype=complex))
        return M


def weil_rep_apply(W: WeilRepFinite, gen: str, v) -> np.ndarray:
    return W.apply(gen, v)


# enumeration ------------------------------------------------------------


def _cholesky_upper(Q: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Q = sum_i q_ii (x_i + sum_{j>i} q_ij x_j)^2 (Fincke-Pohst form)."""
    N = Q.shape[0]
    q = np.array(Q, dtype=float)
    for i in range(N):
        for j in range(i + 1, N):
            q[j, i] = q[i, j]
            q[i, j] = q[i, j] / q[i, i]
        for k in range(i + 1, N):
            for l in range(k, N):
                q[k, l] -= q[k, i] * q[i, l]
    diag = np.diag(q).copy()
    return diag, np.triu(q, 1)


def fincke_pohst(Q: np.ndarray, shift: np.ndarray, bound: float, slack: float = 1e-9,
                 top_range: Optional[Tuple[int, int]] = None) -> List[Tuple[int, ...]]:
    """All integer x with (x + shift)^T Q (x + shift) <= bound, lexicographic order.

    The recursion fixes the last coordinate first; ``top_range`` restricts it
    to [lo, hi), which is how enumeration is sharded.
    """
    N = Q.shape[0]
    diag, up = _cholesky_upper(Q)
    if np.any(diag <= 0):
        raise LatticeError("majorant is not positive definite")
    bound = bound * (1 + slack) + slack
    out: List[Tuple[int, ...]] = []
    x = [0] * N
    sh = [float(t) for t in shift]
    upl = up.tolist()
    dl = diag.tolist()

    def rec(i: int, remaining: float):
        c = -sh[i]
        row = upl[i]
        for j in range(i + 1, N):
            c -= row[j] * (x[j] + sh[j])
        r = math.sqrt(max(remaining, 0.0) / dl[i])
        lo = math.ceil(c - r - 1e-12)
        hi = math.floor(c + r + 1e-12)
        if i == N - 1 and top_range is not None:
            lo = max(lo, top_range[0])
            hi = min(hi, top_range[1] - 1)
        for v in range(lo, hi + 1):
            t = v - c
            rest = remaining - dl[i] * t * t
            if rest < -1e-12 * max(1.0, bound):
                continue
            x[i] = v
            if i == 0:
                out.append(tuple(x))
            else:
                rec(i - 1, rest)
        x[i] = 0

    rec(N - 1, bound)
    out.sort()
    return out


def majorant_matrix(L: HermitianLattice, ginv: np.ndarray) -> np.ndarray:
    """Real Gram matrix of the majorant at z (frame inverse ``ginv``) on Z^{2n}."""
    M = ginv @ L.real_basis
    return np.real(M.conj().T @ M)


def rows_times(A: np.ndarray, X: np.ndarray) -> np.ndarray:
    """Rows of X mapped by A, accumulated elementwise so each row is batch-independent."""
    X = np.asarray(X)
    out = np.zeros((X.shape[0], A.shape[0]), dtype=complex)
    for j in range(A.shape[1]):
        out += X[:, j, None] * A[None, :, j]
    return out


@dataclass
class Enumeration:
    """Vectors of L + h as integer numerators over a common denominator."""

    lattice: HermitianLattice
    numerators: np.ndarray  # int64, shape (count, 2n)
    denominator: int
    norm_num: np.ndarray  # <lambda,lambda> * norm_den
    norm_den: int

    @property
    def count(self) -> int:
        return self.numerators.shape[0]

    @property
    def coords(self) -> List[Tuple[Fraction, ...]]:
        d = self.denominator
        return [tuple(Fraction(int(a), d) for a in row) for row in self.numerators]

    @property
    def norms(self) -> List[Fraction]:
        return [Fraction(int(a), self.norm_den) for a in self.norm_num]

    @cached_property
    def vectors(self) -> np.ndarray:
        """Complex coordinates in V, shape (count, m)."""
        return rows_times(self.lattice.real_basis, self.numerators / self.denominator)


def _exact_norms(L: HermitianLattice, U: np.ndarray, den: int) -> Tuple[np.ndarray, int]:
    S = L.half_trace_form
    dS = 1
    for r in S:
        for x in r:
            dS = dS * x.denominator // math.gcd(dS, x.denominator)
    Si = np.array([[int(x * dS) for x in r] for r in S], dtype=np.int64)
    U = U.astype(np.int64)
    num = np.einsum("ni,ij,nj->n", U, Si, U)
    return num, dS * den * den


def enumerate_vectors(L: HermitianLattice, h: Sequence[Fraction], two_m: Optional[Fraction],
                      ginv: np.ndarray, bound: float, workers: int = 1) -> Enumeration:
    """All lambda in L + h with <lambda,lambda> == two_m (None: any) and majorant <= bound."""
    h = [Fraction(x) for x in h]
    den = 1
    for x in h:
        den = den * x.denominator // math.gcd(den, x.denominator)
    hnum = np.array([int(x * den) for x in h], dtype=np.int64)
    Q = majorant_matrix(L, ginv)
    shift = np.array([float(x) for x in h])
    if workers <= 1:
        pts = fincke_pohst(Q, shift, bound)
    else:
        pts = _sharded(Q, shift, bound, workers)
    X = np.array(pts, dtype=np.int64).reshape(len(pts), 2 * L.n)
    U = X * den + hnum[None, :]
    num, nden = _exact_norms(L, U, den)
    if two_m is not None:
        t = Fraction(two_m) * nden
        keep = (num == int(t)) if t.denominator == 1 else np.zeros(len(num), dtype=bool)
        U, num = U[keep], num[keep]
    return Enumeration(L, U, den, num, nden)


def _shard_ranges(Q: np.ndarray, shift: np.ndarray, bound: float, parts: int):
    # the last coordinate satisfies |x + shift| <= sqrt(bound * (Q^{-1})_{NN})
    N = Q.shape[0] - 1
    r = math.sqrt(bound * np.linalg.inv(Q)[N, N]) + 1
    lo = math.floor(-shift[N] - r)
    hi = math.ceil(-shift[N] + r) + 1
    step = max(1, math.ceil((hi - lo) / parts))
    return [(a, min(a + step, hi)) for a in range(lo, hi, step)]


def _sharded(Q, shift, bound, workers):
    from concurrent.futures import ThreadPoolExecutor

    ranges = _shard_ranges(Q, shift, bound, workers)
    with ThreadPoolExecutor(max_workers=workers) as ex:
        parts = list(ex.map(lambda rg: fincke_pohst(Q, shift, bound, top_range=rg), ranges))
    out = [x for part in parts for x in part]
    out.sort()
    return out


def box_oracle(L: HermitianLattice, h: Sequence[Fraction], two_m: Optional[Fraction],
               ginv: np.ndarray, bound: float) -> List[Tuple[Fraction, ...]]:
    """Brute-force scan of a coordinate box guaranteed to contain the majorant ball."""
    Q = majorant_matrix(L, ginv)
    Qinv = np.linalg.inv(Q)
    h = [Fraction(x) for x in h]
    den = 1
    for x in h:
        den = den * x.denominator // math.gcd(den, x.denominator)
    hnum = np.array([int(x * den) for x in h], dtype=np.int64)
    N = Q.shape[0]
    radii = [math.sqrt(bound * Qinv[i, i]) + 1 for i in range(N)]
    axes = [np.arange(math.floor(-float(h[i]) - radii[i]), math.ceil(-float(h[i]) + radii[i]) + 1)
            for i in range(N)]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, N).astype(np.int64)
    out = []
    for start in range(0, grid.shape[0], 1 << 18):
        X = grid[start:start + (1 << 18)]
        U = X * den + hnum[None, :]
        Uf = U / den
        maj = np.einsum("ni,ij,nj->n", Uf, Q, Uf)
        keep = maj <= bound * (1 + 1e-9) + 1e-9
        U = U[keep]
        if two_m is not None:
            num, nden = _exact_norms(L, U, den)
            t = Fraction(two_m) * nden
            U = U[num == int(t)] if t.denominator == 1 else U[:0]
        out.extend(tuple(Fraction(int(a), den) for a in row) for row in U)
    return sorted(out)
