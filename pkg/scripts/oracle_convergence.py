"""How fast c^n times the level-n eigenvalues approach the limit spectrum.

Reports, per level, the largest relative error of the eigenvalue ratios
lambda_k / lambda_1 and of the scaled eigenvalues themselves.
"""

import argparse

import numpy as np

from specdec.catalog import load_structure
from specdec.decimation import decimate, oracle_eigenvalues
from specdec.spectrum import SpectrumQuery, expand, spectrum_up_to


def run(name: str, count: int, levels: range):
    s = load_structure(name)
    dec = decimate(s)
    c = float(dec.c_delta)
    lam = 1.0
    while True:
        lim = expand(spectrum_up_to(s, dec, SpectrumQuery(lam)))
        if np.sum(lim > 0) >= count:
            break
        lam *= 2
    lim = lim[lim > 0][:count]
    print(f"{name}: first {count} positive limit eigenvalues {np.round(lim, 6).tolist()}")
    print(f"{'level':>5} {'ratio error':>12} {'scaled error':>12}")
    prev = None
    for n in levels:
        z = np.sort(oracle_eigenvalues(s, n))
        z = z[z > 1e-12][:count]
        ratio_err = np.max(np.abs(lim / lim[0] - z / z[0]) / (lim / lim[0]))
        scaled_err = np.max(np.abs(c**n * z - lim) / lim)
        trend = f"  x{prev / scaled_err:.2f}" if prev else ""
        print(f"{n:>5} {ratio_err:>12.3e} {scaled_err:>12.3e}{trend}")
        prev = scaled_err


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("structure", nargs="?", default="sierpinski-gasket")
    p.add_argument("--count", type=int, default=5)
    p.add_argument("--levels", type=int, nargs=2, default=(3, 7), metavar=("FIRST", "LAST"))
    a = p.parse_args()
    run(a.structure, a.count, range(a.levels[0], a.levels[1] + 1))
