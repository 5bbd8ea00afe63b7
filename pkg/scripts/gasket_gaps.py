"""Gap intervals of the gasket against its computed spectrum, as plot data."""

import argparse
import csv
from fractions import Fraction
from pathlib import Path

from specdec.catalog import load_structure
from specdec.decimation import decimate
from specdec.gaps import check_crit_hypotheses, crit_gap_intervals
from specdec.spectrum import spectrum_sample


def run(out_dir: Path, k_max: int, max_vertices: int):
    s = load_structure("sierpinski-gasket")
    dec = decimate(s)
    recs, lam = spectrum_sample(s, dec, max_vertices)
    hyp = check_crit_hypotheses(dec, Fraction(3, 2))
    rep = crit_gap_intervals(dec, hyp, k_max, recs, lam)
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "gasket_gaps.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["k", "A", "B", "B_over_A", "strays", "checked"])
        for g in rep.gap_intervals:
            w.writerow([g.k, f"{g.A:.15g}", f"{g.B:.15g}", f"{g.B / g.A:.15g}", len(g.strays),
                        g.free_length is not None])
    with open(out_dir / "gasket_spectrum.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["lambda", "multiplicity"])
        for r in recs:
            w.writerow([f"{r.lambda_:.15g}", r.multiplicity])
    print(f"spectrum complete below {lam:.6g}: {sum(r.multiplicity for r in recs)} eigenvalues")
    for g in rep.gap_intervals:
        status = f"{len(g.strays)} strays" if g.free_length is not None else "beyond sample"
        print(f"k={g.k}: ({g.A:.10g}, {g.B:.10g})  B/A={g.B / g.A:.12g}  {status}")


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--out", type=Path, default=Path("results"))
    p.add_argument("--k-max", type=int, default=6)
    p.add_argument("--max-vertices", type=int, default=2000)
    a = p.parse_args()
    run(a.out, a.k_max, a.max_vertices)
