"""Command-line front end.

Every command writes a single document (JSON or CSV) to stdout or ``--out``.
Exit codes: 0 success, 2 analysis completed but no gap criterion applies,
1 errors.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import sys
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .catalog import compare_expected, expected_block, load_structure, tomllib
from .decimation import (
    DecimationData,
    DecimationError,
    cluster_eigenvalues,
    decimate,
    dimension_report,
    level_spectrum,
    oracle_eigenvalues,
)
from .gaps import (
    GapMethod,
    RATIO_THRESHOLD,
    check_crit_hypotheses,
    corollary_checks,
    crit_gap_intervals,
    gaps_via_julia,
    gaps_via_ratio,
)
from .julia import classify, cover_sequence
from .matrices import block_decompose, laplacian_matrix
from .spectrum import NonRegularError, SpectrumQuery, spectrum_sample, spectrum_up_to
from .structure import MalformedStructureError, build_graph, check_pcf, validate_full_symmetry

EXIT_OK, EXIT_ERROR, EXIT_INAPPLICABLE = 0, 1, 2


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class AnalysisConfig:
    source: str
    level: int = 3
    lambda_max: Optional[float] = None
    n0: Optional[int] = None
    dirichlet: bool = False
    depth: int = 8
    k_max: int = 3
    b_override: Optional[str] = None
    method: str = "all"
    format: str = "json"
    out: Optional[str] = None
    precision: int = 12
    max_level: int = 8
    max_vertices: int = 2000
    max_intervals: int = 20000
    rel_tol: float = 1e-12
    cluster_tol: float = 1e-9
    expand: bool = False

    def __post_init__(self):
        if self.rel_tol <= 0 or self.cluster_tol <= 0:
            raise ConfigError("tolerances must be positive")
        if not 0 <= self.level <= self.max_level:
            raise ConfigError(f"level must lie in 0..{self.max_level}")
        if self.depth < 0 or self.k_max < 0:
            raise ConfigError("depth and k_max must be non-negative")
        if self.precision < 1 or self.precision > 17:
            raise ConfigError("precision must lie in 1..17")
        if self.format not in ("json", "csv"):
            raise ConfigError("format must be json or csv")
        if self.method not in ("julia", "crit", "ratio", "all"):
            raise ConfigError("method must be one of julia, crit, ratio, all")
        if self.lambda_max is not None and self.lambda_max <= 0:
            raise ConfigError("lambda_max must be positive")

    @classmethod
    def from_toml(cls, path: str, **overrides) -> "AnalysisConfig":
        try:
            data = tomllib.loads(Path(path).read_text())
        except (OSError, tomllib.TOMLDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        data.update({k: v for k, v in overrides.items() if v is not None})
        if "source" not in data:
            raise ConfigError("config needs a source")
        return cls(**data)


# ---------------------------------------------------------------------------
# rendering
# ---------------------------------------------------------------------------


def _num(x: float, digits: int) -> float:
    return float(f"{x:.{digits}g}")


def _json_text(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


# ---------------------------------------------------------------------------
# pipeline pieces
# ---------------------------------------------------------------------------


def _decimate(structure) -> DecimationData:
    return decimate(structure, require_symmetry=True)


def _crit_section(dec, cfg: AnalysisConfig, records=None, lam=None) -> tuple[dict, bool]:
    """Separated-branch verdict plus corollaries; the flag says whether any route applied."""
    digits = cfg.precision
    hyp = check_crit_hypotheses(dec, cfg.b_override)
    section = {"hypotheses": hyp.to_json(digits), "corollaries": []}
    route = "separated-branches" if hyp.all_ok else None
    cors = corollary_checks(dec) if cfg.b_override is None else []
    for cv in cors:
        section["corollaries"].append(cv.to_json(digits))
        if route is None and cv.hypotheses_hold and cv.theorem is not None and cv.theorem.all_ok:
            hyp, route = cv.theorem, cv.name
    section["route"] = route
    if route is None:
        section["report"] = None
        return section, False
    rep = crit_gap_intervals(dec, hyp, cfg.k_max, records, lam)
    section["report"] = rep.to_json(digits)
    section["report"]["ratio_B_over_A"] = _num(rep.ratio, digits)
    return section, True


def _gap_section(structure, dec, cfg: AnalysisConfig, classification=None) -> tuple[dict, bool]:
    out: dict = {}
    applicable = True
    regular = dimension_report(dec, structure).regular
    if cfg.method in ("julia", "all"):
        classification = classification or classify(dec)
        out["julia"] = gaps_via_julia(classification, regular).to_json(cfg.precision)
    records = lam = None
    if cfg.method in ("ratio", "crit", "all"):
        records, lam = spectrum_sample(structure, dec, cfg.max_vertices, cfg.max_level)
    if cfg.method in ("ratio", "all"):
        rep = gaps_via_ratio(records, RATIO_THRESHOLD, window=float(dec.c_delta) ** 2)
        out["ratio"] = rep.to_json(cfg.precision)
        out["ratio"]["sample_cutoff"] = _num(lam, cfg.precision)
        out["ratio"]["threshold"] = RATIO_THRESHOLD
    if cfg.method in ("crit", "all"):
        out["crit"], applicable = _crit_section(dec, cfg, records, lam)
    verdicts = [v["has_gaps"] for k, v in out.items() if k in ("julia", "ratio")]
    if cfg.method in ("crit", "all") and applicable:
        verdicts.append(True)
    out["agree"] = len(set(verdicts)) <= 1
    out["has_gaps"] = verdicts[0] if verdicts else None
    return out, applicable


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_analyze(cfg: AnalysisConfig) -> tuple[str, int]:
    structure = load_structure(cfg.source)
    sym = validate_full_symmetry(structure)
    g1 = build_graph(structure, 1)
    blocks = block_decompose(laplacian_matrix(g1))
    dec = _decimate(structure)
    dims = dimension_report(dec, structure)
    if not dims.regular:
        raise NonRegularError(f"{structure.name} is not regular (r = {dims.r} >= 1); refusing the spectral analysis")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        cls = classify(dec)
    covers = cover_sequence(dec, cfg.depth, cls.a, cfg.max_intervals)
    gaps, applicable = _gap_section(structure, dec, cfg, cls)
    doc = {
        "structure": {
            "name": structure.name,
            "num_cells": structure.num_cells,
            "boundary_size": structure.boundary_size,
            "v1_size": structure.v1_size,
            "post_critically_finite": check_pcf(structure),
            "symmetry": sym.to_json(),
        },
        "matrices": {
            "level": 1,
            "vertices": g1.num_vertices,
            "block_shapes": {k: [len(m), len(m[0]) if m else 0] for k, m in
                             zip("ABCD", (blocks.A, blocks.B, blocks.C, blocks.D))},
        },
        "decimation": dec.to_json(cfg.precision),
        "dimensions": dims.to_json(),
        "julia": {
            **cls.to_json(cfg.precision),
            "warnings": [str(w.message) for w in caught],
            "cover_depth": cfg.depth,
            "cover_size": len(covers[-1].intervals),
            "cover_max_length": _num(float(covers[-1].max_length), cfg.precision),
        },
        "gaps": gaps,
    }
    block = expected_block(dec, cls, bool(gaps["has_gaps"]))
    doc["regression"] = {
        "computed": block,
        "mismatches": compare_expected(structure.expected, block) if structure.expected else None,
    }
    return _json_text(doc), EXIT_OK if applicable else EXIT_INAPPLICABLE


def cmd_spectrum(cfg: AnalysisConfig) -> tuple[str, int]:
    if cfg.lambda_max is None:
        raise ConfigError("spectrum needs --lambda-max")
    structure = load_structure(cfg.source)
    dec = _decimate(structure)
    q = SpectrumQuery(cfg.lambda_max, cfg.n0, cfg.dirichlet, cfg.rel_tol, max_vertices=cfg.max_vertices)
    recs = spectrum_up_to(structure, dec, q)
    if cfg.format == "csv":
        rows = [(f"{r.lambda_:.{cfg.precision}g}", r.multiplicity, r.n0, "".join(map(str, r.word)))
                for r in recs]
        return _csv_text(("lambda", "multiplicity", "n0", "word"), rows), EXIT_OK
    doc = {"structure": structure.name, "lambda_max": cfg.lambda_max, "dirichlet": cfg.dirichlet,
           "eigenvalues": [r.to_json(cfg.precision) for r in recs]}
    return _json_text(doc), EXIT_OK


def cmd_julia(cfg: AnalysisConfig) -> tuple[str, int]:
    structure = load_structure(cfg.source)
    dec = _decimate(structure)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        cls = classify(dec)
    covers = cover_sequence(dec, cfg.depth, cls.a, cfg.max_intervals)
    if cfg.format == "csv":
        rows = [row for cov in covers for row in cov.rows(cfg.precision)]
        return _csv_text(("depth", "lo", "hi"), rows), EXIT_OK
    doc = {
        "classification": cls.to_json(cfg.precision),
        "warnings": [str(w.message) for w in caught],
        "covers": [
            {"depth": cov.depth, "intervals": [[lo, hi] for _, lo, hi in cov.rows(cfg.precision)]}
            for cov in covers
        ],
    }
    return _json_text(doc), EXIT_OK


def cmd_gaps(cfg: AnalysisConfig) -> tuple[str, int]:
    structure = load_structure(cfg.source)
    dec = _decimate(structure)
    if not dimension_report(dec, structure).regular:
        raise NonRegularError(f"{structure.name} is not regular; gap criteria need r < 1")
    gaps, applicable = _gap_section(structure, dec, cfg)
    return _json_text({"structure": structure.name, **gaps}), EXIT_OK if applicable else EXIT_INAPPLICABLE


def cmd_oracle(cfg: AnalysisConfig) -> tuple[str, int]:
    structure = load_structure(cfg.source)
    vals = oracle_eigenvalues(structure, cfg.level, cfg.dirichlet)
    p = cfg.precision
    if cfg.expand:
        rows = [(f"{v:.{p}g}", 1) for v in vals]
    else:
        rows = [(f"{v:.{p}g}", m) for v, m in cluster_eigenvalues(vals, cfg.cluster_tol)]
    if cfg.format == "csv":
        return _csv_text(("eigenvalue", "multiplicity"), rows), EXIT_OK
    doc = {"structure": structure.name, "level": cfg.level, "dirichlet": cfg.dirichlet,
           "vertices": build_graph(structure, cfg.level).num_vertices,
           "eigenvalues": [{"value": float(v), "multiplicity": m} for v, m in rows]}
    return _json_text(doc), EXIT_OK


def cmd_matrix(cfg: AnalysisConfig) -> tuple[str, int]:
    structure = load_structure(cfg.source)
    M = laplacian_matrix(build_graph(structure, cfg.level))
    if cfg.format == "csv":
        return M.to_csv(), EXIT_OK
    doc = {"structure": structure.name, "level": cfg.level, "ordering": list(M.ordering), "split": M.split,
           "entries": [[str(x) for x in row] for row in M.entries]}
    return _json_text(doc), EXIT_OK


def cmd_provenance(cfg: AnalysisConfig) -> tuple[str, int]:
    structure = load_structure(cfg.source)
    dec = _decimate(structure)
    ls = level_spectrum(structure, dec, cfg.level, cfg.dirichlet, cfg.cluster_tol)
    rows = [(f"{e.value:.{cfg.precision}g}", e.multiplicity, e.provenance) for e in ls.entries]
    if cfg.format == "csv":
        return _csv_text(("eigenvalue", "multiplicity", "provenance"), rows), EXIT_OK
    doc = {"structure": structure.name, "level": cfg.level,
           "eigenvalues": [{"value": float(v), "multiplicity": m, "provenance": s} for v, m, s in rows]}
    return _json_text(doc), EXIT_OK


COMMANDS = {
    "analyze": cmd_analyze,
    "spectrum": cmd_spectrum,
    "julia": cmd_julia,
    "gaps": cmd_gaps,
    "oracle": cmd_oracle,
    "matrix": cmd_matrix,
    "provenance": cmd_provenance,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("source", nargs="?", help="catalog name or path to a structure TOML file")
    common.add_argument("--config", help="TOML file with AnalysisConfig fields")
    common.add_argument("--format", choices=("json", "csv"))
    common.add_argument("--out", help="write output here instead of stdout")
    common.add_argument("--precision", type=int, help="significant digits in rendered numbers (default 12)")
    common.add_argument("--max-vertices", type=int, dest="max_vertices")

    p = argparse.ArgumentParser(prog="specdec", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", parents=[common], help="full report")
    a.add_argument("--depth", type=int)
    a.add_argument("--k-max", type=int, dest="k_max")

    s = sub.add_parser("spectrum", parents=[common], help="limit eigenvalues below a bound")
    s.add_argument("--lambda-max", type=float, dest="lambda_max")
    s.add_argument("--n0", type=int)
    s.add_argument("--dirichlet", action="store_true", default=None)

    j = sub.add_parser("julia", parents=[common], help="Julia-set classification and preimage covers")
    j.add_argument("--depth", type=int)
    j.add_argument("--max-intervals", type=int, dest="max_intervals")

    g = sub.add_parser("gaps", parents=[common], help="gap verdicts and intervals")
    g.add_argument("--k-max", type=int, dest="k_max")
    g.add_argument("--b-override", dest="b_override", help="rational b, e.g. 3/2")
    g.add_argument("--method", choices=("julia", "crit", "ratio", "all"))

    for name, text in (("oracle", "dense eigenvalues of a level Laplacian"),
                       ("matrix", "exact level Laplacian as p/q strings"),
                       ("provenance", "level eigenvalues with their decimation provenance")):
        o = sub.add_parser(name, parents=[common], help=text)
        o.add_argument("--level", type=int)
        if name != "matrix":
            o.add_argument("--dirichlet", action="store_true", default=None)
        if name == "oracle":
            o.add_argument("--expand", action="store_true", default=None, help="one row per eigenvalue")
    return p


def config_from_args(ns: argparse.Namespace) -> AnalysisConfig:
    fields = {f.name for f in dataclasses.fields(AnalysisConfig)}
    overrides = {k: v for k, v in vars(ns).items() if k in fields and v is not None}
    if ns.config:
        return AnalysisConfig.from_toml(ns.config, **overrides)
    if not ns.source:
        raise ConfigError("give a catalog name, a structure file, or --config")
    return AnalysisConfig(**overrides)


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(ns)
        text, code = COMMANDS[ns.command](cfg)
    except ConfigError as exc:
        print(f"error: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except MalformedStructureError as exc:
        print(f"error: invalid structure: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except NonRegularError as exc:
        print(f"error: non-regular structure: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except DecimationError as exc:
        print(f"error: decimation failed: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
