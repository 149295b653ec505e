"""T-covariance of the Hejhal Poincare series under the two slash conventions.

With the truncation set shifted along (c, d) -> (c, d - c), a right action gives
F(tau + 1) = omega(T) F(tau) term for term; the (c tau + d)^{-k} omega(A)
convention does not.

    python scripts/poincare_slash.py [--cmax 50] [--s 1.6]
"""

import argparse

import numpy as np

from unitheta.green import hejhal_poincare, poincare_pairs
from unitheta.lattice import HermitianLattice, WeilRepFinite


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--cmax", type=int, default=50)
    ap.add_argument("--s", type=float, default=1.6)
    a = ap.parse_args()
    tau = 0.1 + 1.1j
    for ent in ([1, -1], [1, -1, -1]):
        L = HermitianLattice.diagonal(-4, ent)
        Td = WeilRepFinite(L, dual=True).T_diag
        P = poincare_pairs(tau, a.cmax)
        shifted = [(c, d - c) for c, d in P]
        for direct in (False, True):
            f0 = hejhal_poincare(L, -1, 0, a.s, tau, a.cmax, pairs=P, direct_omega=direct).values
            f1 = hejhal_poincare(L, -1, 0, a.s, tau + 1, a.cmax, pairs=shifted, direct_omega=direct).values
            err = np.linalg.norm(f1 - Td * f0) / np.linalg.norm(f0)
            name = "omega(A)" if direct else "omega(A)^-1"
            print(f"sig {L.signature}  {name:12s} |F(tau+1) - omega(T)F(tau)| / |F| = {err:.3e}")


if __name__ == "__main__":
    main()
