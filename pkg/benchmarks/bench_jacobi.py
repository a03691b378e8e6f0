"""Time the compiled and numpy Jacobi backends on the link-graph matrices.

    python3 benchmarks/bench_jacobi.py [--repeat 3]

Prints one row per matrix: size, best time per backend, speedup, and the
largest eigenvalue difference between the two backends.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from buildinglab import linalg, spectra
from buildinglab.geometry import SL3_LINK, SP4_NONSPECIAL_LINK, SP4_SPECIAL_LINK, link_graph

CASES = [(SP4_NONSPECIAL_LINK, 5), (SL3_LINK, 3), (SL3_LINK, 5), (SP4_SPECIAL_LINK, 3), (SL3_LINK, 9), (SP4_SPECIAL_LINK, 5)]


def best_time(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    backends = linalg.available_backends()
    if "compiled" not in backends:
        print("compiled kernel not built; only the numpy backend is timed")
    print(f"{'graph':<18}{'n':>5}" + "".join(f"{b:>12}" for b in backends) + f"{'speedup':>10}{'max|dw|':>11}")
    for kind, q in CASES:
        g = link_graph(kind, q)
        a = spectra.oriented_incidence(g).astype(float)
        b = a.T @ a
        times, spectra_ = {}, {}
        for name in backends:
            times[name], spectra_[name] = best_time(lambda: linalg.eigvalsh(b, backend=name), args.repeat)
        row = f"{kind + ' q=' + str(q):<18}{b.shape[0]:>5}" + "".join(f"{times[n]:>11.3f}s" for n in backends)
        if len(backends) == 2:
            dw = float(np.max(np.abs(spectra_["compiled"] - spectra_["python"])))
            row += f"{times['python'] / times['compiled']:>9.1f}x{dw:>11.1e}"
        print(row)


if __name__ == "__main__":
    main()
