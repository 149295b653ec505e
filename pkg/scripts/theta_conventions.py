"""Compare the two Gaussian normalizations of the psi-theta series.

halved:  v sum psi^0-polynomial(sqrt(v) lam) exp(-pi v <lam,lam>_z) e(u <lam,lam> / 2)
doubled: v sum psi^0-polynomial(sqrt(2v) lam) exp(-2 pi v <lam,lam>_z) e(u <lam,lam>)

Only the doubled one is compatible with omega_L(T) e_h = e(<h,h>) e_h and
omega_L(S) built from e(-2 Re<mu,h>); this prints both errors.

    python scripts/theta_conventions.py [--bound 40] [--seed 0]
"""

import argparse
import math

import numpy as np

from unitheta.green import DomainPoint, psi_polynomials, theta_modularity
from unitheta.lattice import HermitianLattice, WeilRepFinite, enumerate_vectors, rows_times


def theta_halved(L, tau, z, B):
    u, v = tau.real, tau.imag
    p, q = z.p, z.q
    PP = psi_polynomials(p, q)
    D = L.discriminant_group
    out = np.zeros((D.order, len(PP.keys)), dtype=complex)
    for i, h in enumerate(D.reps):
        E = enumerate_vectors(L, h, None, z.ginv, 2 * B / v)
        Y = rows_times(z.ginv, E.vectors)
        N = E.norm_num.astype(float) / E.norm_den
        A = PP.components(Y[:, :p] * math.sqrt(v)).sum(axis=1)
        maj = np.sum(np.abs(Y) ** 2, axis=1)
        w = v * np.exp(-math.pi * v * maj) * np.exp(1j * math.pi * u * N)
        out[i] = (A * w[:, None]).sum(axis=0)
    return out


def rel(a, b):
    return float(np.linalg.norm(a - b) / np.linalg.norm(b))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--bound", type=float, default=40.0)
    ap.add_argument("--seed", type=int, default=0)
    a = ap.parse_args()
    L = HermitianLattice.diagonal(-4, [1, -1])
    z = DomainPoint.random(1, 1, np.random.default_rng(a.seed), 0.5)
    tau = 0.3 + 0.8j
    W = WeilRepFinite(L)
    k = L.signature[0] + L.signature[1] - 2

    h0, h1 = theta_halved(L, tau, z, a.bound), theta_halved(L, tau + 1, z, a.bound)
    hS = theta_halved(L, -1 / tau, z, a.bound)
    print(f"halved   T err {rel(h1, W.T_diag[:, None] * h0):.3e}   S err {rel(hS, tau ** k * (W.S_matrix @ h0)):.3e}")
    # the trivial coset alone already fails: e(u n / 2) is not 1-periodic for odd n
    print(f"halved   trivial-coset T err {rel(h1[0], h0[0]):.3e}")

    T = theta_modularity(L, "T", tau, z, a.bound)
    S = theta_modularity(L, "S", tau, z, a.bound)
    print(f"doubled  T err {T.rel_error:.3e}   S err {S.rel_error:.3e}")


if __name__ == "__main__":
    main()
