"""The acceptance criteria as callable checks.

Each check returns a CriterionResult; ``payload`` holds the computed numbers
so the determinism check can compare serialized results.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List

import numpy as np

from .green import (
    DomainPoint,
    Psi0_eval,
    Psi0_quadrature,
    green_bruinier_closed,
    hejhal_poincare,
    laplacian_fd,
    phi_s_summand,
    poincare_eigenvalue,
    poincare_pairs,
    theta_modularity,
)
from .lattice import HermitianLattice, ImagQuadField, WeilRepFinite, box_oracle, enumerate_vectors

PQ3 = [(p, q) for p in (1, 2, 3) for q in (1, 2, 3)]


@dataclass
class CriterionResult:
    cid: int
    name: str
    passed: bool
    detail: str
    elapsed: float = 0.0
    payload: dict = field(default_factory=dict, repr=False)

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} [{self.cid:2d}] {self.name}: {self.detail} ({self.elapsed:.1f}s)"

    def to_json(self) -> dict:
        return {"id": self.cid, "name": self.name, "status": "PASS" if self.passed else "FAIL",
                "detail": self.detail, "elapsed_s": self.elapsed}


# symbolic ---------------------------------------------------------------------


def c1_main_identity(**_) -> CriterionResult:
    from .weil import verify_main_identity

    t0 = time.perf_counter()
    bad = [f"{p},{q}" for p, q in PQ3 if not verify_main_identity(p, q).holds]
    dt = time.perf_counter() - t0
    ok = not bad and dt < 120
    return CriterionResult(1, "main identity", ok, f"failures={bad or 'none'} runtime={dt:.1f}s<120s")


def c2_weights(**_) -> CriterionResult:
    from .weil import verify_weights

    bad = [f"{p},{q}" for p, q in PQ3 if not verify_weights(p, q).holds]
    return CriterionResult(2, "k' weights", not bad, f"failures={bad or 'none'}")


def c3_k_invariance(**_) -> CriterionResult:
    from .weil import verify_k_invariance

    bad = [f"{p},{q}" for p, q in PQ3 if not verify_k_invariance(p, q, "psi").holds]
    return CriterionResult(3, "k-invariance of psi", not bad, f"failures={bad or 'none'}")


def c4_laguerre_polyexpl(**_) -> CriterionResult:
    from .schrodinger import check_polyexpl, laguerre_identity_check

    lag = [k for k in range(6) if not laguerre_identity_check(k)]
    literal = [k for k in range(6) if not laguerre_identity_check(k, literal_sign=True)]
    poly = [f"{p},{q}" for p, q in PQ3 if not check_polyexpl(p, q).holds]
    ok = not lag and not poly
    return CriterionResult(
        4, "Laguerre identity and P properties", ok,
        f"laguerre failures={lag or 'none'} (sign (1/pi)^k as printed fails for k={literal}); "
        f"P failures={poly or 'none'}",
    )


def c5_bridge(**_) -> CriterionResult:
    from .schrodinger import bridge_to_fock

    bad = [f"{p},{q}" for p in (1, 2) for q in (1, 2) if not bridge_to_fock(p, q).holds]
    return CriterionResult(5, "Fock-Schrodinger bridge", not bad, f"failures={bad or 'none'}")


# numeric --------------------------------------------------------------------------


def _sample_xz(p: int, q: int, rng: np.random.Generator):
    z = DomainPoint.random(p, q, rng, 0.5)
    y = rng.normal(size=p + q) + 1j * rng.normal(size=p + q)
    R = rng.uniform(0.05, 2.0)
    y[p:] *= math.sqrt(R) / np.linalg.norm(y[p:])
    return z.g @ y, z


def c6_psi0_quadrature(seed: int = 0, **_) -> CriterionResult:
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    worst = 0.0
    values = []
    for p, q in [(1, 1), (2, 1), (1, 2), (2, 2)]:
        for _ in range(10):
            x, z = _sample_xz(p, q, rng)
            a = Psi0_eval(x, z).values
            b = Psi0_quadrature(x, z).values
            worst = max(worst, float(np.linalg.norm(a - b) / np.linalg.norm(a)))
            values.append(list(a))
    dt = time.perf_counter() - t0
    ok = worst < 1e-8 and dt < 60
    return CriterionResult(6, "Psi0 closed form vs quadrature", ok,
                           f"max rel diff {worst:.2e} < 1e-8, runtime {dt:.1f}s < 60s", payload={"values": values})


def c7_smooth_extension(seed: int = 0, **_) -> CriterionResult:
    p, q = 1, 2
    rng = np.random.default_rng(seed + 7)
    z = DomainPoint.random(p, q, rng, 0.5)
    dirn = rng.normal(size=q) + 1j * rng.normal(size=q)
    dirn /= np.linalg.norm(dirn)
    Rs = np.logspace(-6, -4, 9)
    vals = []
    for R in Rs:
        y = np.concatenate([[0.8 + 0.3j], math.sqrt(R) * dirn])
        vals.append(R ** (q - 1) * Psi0_eval(z.g @ y, z).norm())
    spread = max(vals) / min(vals) - 1
    return CriterionResult(7, "Psi0 smooth extension", spread < 0.05,
                           f"R^(q-1)|Psi0| varies {100 * spread:.3f}% < 5% over R in [1e-6,1e-4]",
                           payload={"values": vals})


def rank2_lattice() -> HermitianLattice:
    return HermitianLattice.diagonal(-4, [1, -1])


def c8_theta_modularity(seed: int = 0, bound: float = 60.0, workers: int = 1, **_) -> CriterionResult:
    t0 = time.perf_counter()
    L = rank2_lattice()
    z = DomainPoint.random(1, 1, np.random.default_rng(seed + 8), 0.5)
    tau = 0.3 + 0.8j
    T = theta_modularity(L, "T", tau, z, bound, workers)
    # coset phase table: Theta_h(tau+1) / Theta_h(tau) against e(<h,h>)
    W = WeilRepFinite(L)
    terr = 0.0
    for i in range(T.lhs.shape[0]):
        ref = np.linalg.norm(T.rhs[i])
        if ref > 1e-300:
            terr = max(terr, float(np.linalg.norm(T.lhs[i] - T.rhs[i]) / ref))
    S = theta_modularity(L, "S", tau, z, bound, workers)
    dt = time.perf_counter() - t0
    ok = terr < 1e-12 and S.rel_error < 1e-6 and dt < 300
    return CriterionResult(8, "theta modularity", ok,
                           f"T coset table err {terr:.1e} < 1e-12; S rel err {S.rel_error:.2e} < 1e-6 at B={bound:g}; "
                           f"runtime {dt:.1f}s < 300s",
                           payload={"T": [list(r) for r in T.lhs], "S": [list(r) for r in S.lhs], "W": list(W.T_diag)})


def c9_closed_vs_summand(**_) -> CriterionResult:
    pts = [  # (p, q, u-coordinate of lambda on e_1, s, t)
        ((1, 2), (1, 0), 2.7, 0.4),
        ((1, 2), (1, 1), 3.5, 1.3),
        ((1, 2), (2, 0), 3.2, 0.05),
        ((2, 2), (1, 0), 3.4, 0.7),
        ((2, 2), (1, 1), 4.0, 2.5),
    ]
    worst = 0.0
    vals = []
    for (p, q), (a, b), s, t in pts:
        L = HermitianLattice.diagonal(-4, [1] * p + [-1] * q)
        u = [0] * (2 * (p + q))
        u[0], u[1] = a, b
        lam = L.to_vector(u)
        two_m = L.norm([Fraction(x) for x in u])
        z = DomainPoint.geodesic(p, q, t)
        G = green_bruinier_closed(L, two_m / 2, 0, s, z, 0.0, vectors=lam[None, :]).values
        F = phi_s_summand(float(two_m) / 2, s, t, p, q)
        worst = max(worst, float(np.linalg.norm(G - F) / np.linalg.norm(F)))
        vals.append(list(G))
    return CriterionResult(9, "closed form vs geodesic summand", worst < 1e-9,
                           f"max rel diff {worst:.2e} < 1e-9 over 5 points", payload={"values": vals})


def c10_oda_tsuzuki(**_) -> CriterionResult:
    lim_bad, slope_bad, notes = [], [], []
    payload = {}
    m = 0.5
    for p, q in [(1, 2), (2, 2)]:
        for s in (2.5, 3.0):
            a = (1e-3) ** (2 * (q - 1)) * np.linalg.norm(phi_s_summand(m, s, 1e-3, p, q))
            b = (5e-4) ** (2 * (q - 1)) * np.linalg.norm(phi_s_summand(m, s, 5e-4, p, q))
            rel = abs(a - b) / abs(b)
            if not (rel < 1e-4 and b > 1e-8):
                lim_bad.append(f"{p},{q},s={s}")
            ts = np.linspace(5, 15, 21)
            ys = [math.log(np.linalg.norm(phi_s_summand(m, s, t, p, q))) for t in ts]
            slope = float(np.polyfit(ts, ys, 1)[0])
            target = -(2 * s + p + q)
            if abs(slope - target) > 0.02 * abs(target):
                slope_bad.append(f"{p},{q},s={s}")
            notes.append(f"({p},{q},s={s}) lim {b:.6f} drift {rel:.1e}, slope {slope:.4f} vs {target:g}")
            payload[f"{p},{q},{s}"] = [b, slope]
    ok = not lim_bad and not slope_bad
    return CriterionResult(10, "Oda-Tsuzuki asymptotics", ok,
                           f"limit failures={lim_bad or 'none'}; slope failures={slope_bad or 'none'}; "
                           + "; ".join(notes), payload=payload)


def c11_poincare_eigenvalue(workers: int = 1, **_) -> CriterionResult:
    s, tau, cmax = 1.6, 1j, 50
    notes, vals = [], []
    ok = True
    for ent, h, m in [([1, -1], 0, -1), ([1, -1, -1], 0, -1)]:
        L = HermitianLattice.diagonal(-4, ent)
        p, q = L.signature
        k = 2 - (p + q)
        pairs = poincare_pairs(tau, cmax)
        f = lambda t: hejhal_poincare(L, m, h, s, t, cmax, pairs=pairs, workers=workers).values
        F = f(tau)
        lap = laplacian_fd(f, tau, k)
        lam = poincare_eigenvalue(p, q, s)
        rel = float(np.linalg.norm(lap - lam * F) / np.linalg.norm(F))
        ok &= rel < 1e-4
        notes.append(f"sig ({p},{q}) eigenvalue {lam:.4f} rel err {rel:.1e}")
        vals.append(list(F))
    return CriterionResult(11, "Poincare eigenvalue", ok, "; ".join(notes) + " < 1e-4", payload={"values": vals})


def enumeration_lattices() -> List[HermitianLattice]:
    F = ImagQuadField(-4)
    w = (Fraction(-2), Fraction(1))  # omega for d = -4
    off = HermitianLattice(F, [[(2, 0), w], [F.conj(w), (-2, 0)]])
    return [
        HermitianLattice.diagonal(-4, [1]),
        HermitianLattice.diagonal(-3, [1]),
        HermitianLattice.diagonal(-4, [1, -1]),
        HermitianLattice.diagonal(-3, [1, -1]),
        off,
    ]


def c12_enumeration(seed: int = 0, workers: int = 1, **_) -> CriterionResult:
    rng = np.random.default_rng(seed + 12)
    checked, bad = 0, []
    counts = []
    for li, L in enumerate(enumeration_lattices()):
        p, q = L.signature
        D = L.discriminant_group
        points = [DomainPoint.base(p, q), DomainPoint.random(p, q, rng, 0.4)]
        cosets = list(range(min(D.order, 3)))
        for zi, z in enumerate(points):
            for B in (10.0, 25.0, 50.0):
                for hi in cosets:
                    h = D.reps[hi]
                    norms = sorted({L.norm(h) + k for k in (-2, 0, 2)} | {None}, key=lambda x: (x is None, x))
                    for two_m in norms:
                        got = enumerate_vectors(L, h, two_m, z.ginv, B, workers).coords
                        want = box_oracle(L, h, two_m, z.ginv, B)
                        checked += 1
                        counts.append(len(got))
                        if got != want:
                            bad.append(f"L{li} z{zi} B={B:g} h={hi} 2m={two_m}")
    return CriterionResult(12, "enumeration completeness", not bad,
                           f"{checked} cases, mismatches={bad[:3] or 'none'}", payload={"counts": counts})


def c13_determinism(seed: int = 0, bound: float = 60.0, **_) -> CriterionResult:
    import json
    import os
    import tempfile

    from .cli import dumps, run_captured

    L = rank2_lattice()
    tmp = tempfile.mkdtemp(prefix="unitheta-")
    lat = os.path.join(tmp, "lattice.json")
    with open(lat, "w") as fh:
        json.dump(L.to_json(), fh)
    lat12 = os.path.join(tmp, "lattice12.json")
    with open(lat12, "w") as fh:
        json.dump(HermitianLattice.diagonal(-4, [1, -1, -1]).to_json(), fh)
    commands = [
        ["theta", lat, "--tau", "0.3,0.8", "--z", "random", "--bound", str(bound)],
        ["modularity", lat, "--gamma", "S", "--tau", "0.3,0.8", "--z", "random", "--bound", str(bound)],
        ["green-kudla", lat, "--m=-1/2", "--h", "0", "--w", "1.3", "--z", "random", "--bound", "30"],
        ["green-bruinier", lat12, "--m", "1/2", "--h", "0", "--s", "3.5", "--z", "random", "--bound", "30"],
        ["enumerate", lat, "--m", "0", "--bound", "50", "--z", "random"],
        ["poincare", lat, "--m=-1", "--h", "0", "--s", "1.6", "--tau", "0,1", "--cmax", "50"],
    ]
    bad = []
    for cmd in commands:
        outs = []
        for w in (1, 4, 8):
            code, out = run_captured(cmd + ["--workers", str(w), "--seed", str(seed)])
            doc = json.loads(out)
            if code != 0:
                bad.append(f"{cmd[0]} exit {code}")
                break
            doc["manifest"].pop("timestamp")
            doc["params"].pop("workers")
            doc["manifest"]["params"].pop("workers")
            outs.append(dumps(doc))
        if len(set(outs)) > 1:
            bad.append(cmd[0])
    # the numeric criteria themselves, with their internal worker counts
    for fn in (c8_theta_modularity, c11_poincare_eigenvalue, c12_enumeration):
        ps = {dumps(fn(seed=seed, bound=bound, workers=w).payload) for w in (1, 4, 8)}
        if len(ps) > 1:
            bad.append(fn.__name__)
    return CriterionResult(13, "determinism across workers {1,4,8}", not bad, f"differences={bad or 'none'}")


SYMBOLIC: List[Callable[..., CriterionResult]] = [
    c1_main_identity, c2_weights, c3_k_invariance, c4_laguerre_polyexpl, c5_bridge,
]
NUMERIC: List[Callable[..., CriterionResult]] = [
    c6_psi0_quadrature, c7_smooth_extension, c8_theta_modularity, c9_closed_vs_summand,
    c10_oda_tsuzuki, c11_poincare_eigenvalue, c12_enumeration, c13_determinism,
]
CRITERIA: Dict[int, Callable[..., CriterionResult]] = {i + 1: f for i, f in enumerate(SYMBOLIC + NUMERIC)}


def run_criterion(cid: int, **kw) -> CriterionResult:
    t0 = time.perf_counter()
    try:
        r = CRITERIA[cid](**kw)
    except Exception as exc:  # a crash is a failure of that criterion, not of the runner
        r = CriterionResult(cid, CRITERIA[cid].__name__, False, f"raised {type(exc).__name__}: {exc}")
    r.elapsed = time.perf_counter() - t0
    return r


def run_acceptance(suite: str = "all", bound: float = 60.0, seed: int = 0) -> List[CriterionResult]:
    ids = {"symbolic": range(1, 6), "numeric": range(6, 14), "all": range(1, 14)}[suite]
    return [run_criterion(i, bound=bound, seed=seed) for i in ids]
