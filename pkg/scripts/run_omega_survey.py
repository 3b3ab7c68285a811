#!/usr/bin/env python3
"""Survey the omega^{+/-} factorization across base rings and levels.

For each (p, kind) the script builds the Lubin-Tate group, extracts the
distinguished polynomials pibar_m, forms the plus/minus products, and checks
omega^+_{2n} omega~^-_{2n} = unit * [p^n]_f (ramified) resp. [pi^{2n}]_f
(inert) on the stated comparison window, timing each case.
"""

import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from ltk.rings import make_ring
from ltk.lubin_tate import build_group

CASES = [
    ("p=2 ramified pi^2=-2", make_ring(2, 7, "ramified_quad", quad=(0, 2)), "ram"),
    ("p=3 ramified pi^2=-3", make_ring(3, 7, "ramified_quad", quad=(0, 3)), "ram"),
    ("p=2 unramified", make_ring(2, 7, "unramified_quad", quad=(1, 1)), "unram"),
]


def main():
    for label, spec, kind in CASES:
        p = spec.p
        q = p if kind == "ram" else p * p
        for n in (1, 2):
            window = q ** (2 * n) + 8
            cap = window + 8 + 14 * spec.ramification_index
            t0 = time.time()
            if kind == "ram":
                G = build_group(spec, spec.gen_quad(), q, cap)
                target = G.endomorphism(spec.from_int(p ** n), cap)
            else:
                G = build_group(spec, spec.from_int(p), q, cap)
                target = None
            unit, ok = G.omega_factorization_check(
                n, n_check=6, target=target, window=window)
            om = G.omega_polys(2 * n)
            degs = {m: len(pb) - 1 for m, pb in om["pibar"].items()}
            print(f"{label}, n={n}: ok={ok}  deg(pibar)={degs}  "
                  f"unit(0)={unit.constant_term().coords}  "
                  f"[{time.time() - t0:.2f}s]")


if __name__ == "__main__":
    main()
