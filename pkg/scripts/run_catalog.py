"""Run the full analysis on every catalog entry and tabulate the verdicts."""

import argparse
import io
import json
from contextlib import redirect_stdout
from pathlib import Path

from specdec.catalog import catalog_names
from specdec.cli import main


def analyze(name: str) -> tuple[int, dict]:
    buf = io.StringIO()
    with redirect_stdout(buf):
        code = main(["analyze", name])
    return code, json.loads(buf.getvalue())


def run(out_dir: Path):
    out_dir.mkdir(parents=True, exist_ok=True)
    print(f"{'structure':<20} {'c':>4} {'d_S':>9} {'julia':<22} {'ratio est':>9} {'crit route':<26} exit")
    for name in catalog_names():
        code, doc = analyze(name)
        (out_dir / f"{name}.json").write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
        g = doc["gaps"]
        print(f"{name:<20} {doc['decimation']['c_delta']:>4} {doc['dimensions']['d_S']:>9.6f} "
              f"{doc['julia']['kind']:<22} {g['ratio']['limsup_estimate']:>9.4f} "
              f"{str(g['crit']['route']):<26} {code}")


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--out", type=Path, default=Path("results/catalog"))
    run(p.parse_args().out)
