"""Decay rate of the geodesic summand phi_s(sqrt(2m) v_1, a_t) for large t.

Fits log|phi_s| against t on [t0, t1] and prints the slope next to
-(2s + p + q) and -(2s - k) = -(2s + p + q - 2).

    python scripts/ot_slope.py [--t0 5] [--t1 15] [--m 0.5]
"""

import argparse
import math

import numpy as np

from unitheta.green import phi_s_summand


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--t0", type=float, default=5.0)
    ap.add_argument("--t1", type=float, default=15.0)
    ap.add_argument("--m", type=float, default=0.5)
    a = ap.parse_args()
    ts = np.linspace(a.t0, a.t1, 21)
    print(" p q    s    slope    -(2s+p+q)  -(2s+p+q-2)")
    for p, q in [(1, 2), (2, 2), (1, 3), (2, 3)]:
        for s in (2.5, 3.0, 4.25):  # the summand needs no convergence range
            ys = [math.log(np.linalg.norm(phi_s_summand(a.m, s, t, p, q))) for t in ts]
            slope = np.polyfit(ts, ys, 1)[0]
            print(f" {p} {q}  {s:4.2f}  {slope:8.4f}  {-(2 * s + p + q):9.2f}  {-(2 * s + p + q - 2):11.2f}")


if __name__ == "__main__":
    main()
