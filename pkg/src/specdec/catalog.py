"""Loading structures from TOML definition files and the bundled catalog."""

from __future__ import annotations

import sys
from importlib import resources
from pathlib import Path

from .structure import FractalStructure, MalformedStructureError

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

_FIELDS = ("name", "num_cells", "boundary_size", "v1_size", "v0_embedding", "cell_maps")


def catalog_names() -> list[str]:
    files = resources.files("specdec.data")
    return sorted(p.name[:-5] for p in files.iterdir() if p.name.endswith(".toml"))


def structure_from_dict(data: dict) -> FractalStructure:
    missing = [k for k in _FIELDS if k not in data]
    if missing:
        raise MalformedStructureError(f"missing fields: {', '.join(missing)}")
    unknown = set(data) - set(_FIELDS) - {"expected"}
    if unknown:
        raise MalformedStructureError(f"unknown fields: {', '.join(sorted(unknown))}")
    for k in _FIELDS[1:4]:
        if not isinstance(data[k], int) or isinstance(data[k], bool):
            raise MalformedStructureError(f"{k} must be an integer")
    return FractalStructure(
        name=str(data["name"]),
        num_cells=data["num_cells"],
        boundary_size=data["boundary_size"],
        v1_size=data["v1_size"],
        cell_maps=data["cell_maps"],
        v0_embedding=data["v0_embedding"],
        expected=data.get("expected"),
    )


def load_structure(source: str | Path) -> FractalStructure:
    """Load by catalog name or by path to a TOML file."""
    src = str(source)
    if src in catalog_names():
        text = resources.files("specdec.data").joinpath(src + ".toml").read_text()
    else:
        path = Path(src)
        if not path.is_file():
            raise FileNotFoundError(f"no catalog entry or file named {src!r}")
        text = path.read_text()
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise MalformedStructureError(f"cannot parse {src}: {exc}") from exc
    return structure_from_dict(data)


def exceptional_strings(points, digits: int = 15) -> list[str]:
    """Exact "p/q" for rational points, decimals otherwise."""
    return [str(p.exact) if p.is_exact else f"{float(p):.{digits}g}" for p in points]


def expected_block(dec, classification, has_gaps: bool) -> dict:
    """Regression block as stored in catalog files."""
    return {
        "r_numerator": dec.R.num.to_strings(),
        "r_denominator": dec.R.den.to_strings(),
        "c_delta": str(dec.c_delta),
        "exceptional_set": exceptional_strings(dec.exceptional_set),
        "classification": classification.kind.value,
        "has_gaps": has_gaps,
    }


def compare_expected(expected: dict, actual: dict, float_tol: float = 1e-10) -> list[str]:
    """Mismatches between a stored regression block and a fresh one.

    Rational entries must agree exactly; decimal entries to ``float_tol``.
    """
    problems = []
    for key, want in expected.items():
        got = actual.get(key)
        if key == "exceptional_set":
            if len(want) != len(got):
                problems.append(f"{key}: expected {len(want)} points, got {len(got)}")
                continue
            for w, g in zip(want, got):
                exact = "." not in w and "e" not in w.lower()
                if exact and w != g:
                    problems.append(f"{key}: expected {w}, got {g}")
                elif not exact and abs(float(w) - float(g)) > float_tol * max(1.0, abs(float(w))):
                    problems.append(f"{key}: expected {w}, got {g}")
        elif want != got:
            problems.append(f"{key}: expected {want!r}, got {got!r}")
    return problems
