from fractions import Fraction

import numpy as np
import pytest
import sympy as sp

from specdec.catalog import structure_from_dict
from specdec.decimation import (
    CrossCheckError,
    ExceptionalValueError,
    NotFullySymmetricError,
    check_decimation,
    containment_holds,
    decimate,
    dimension_report,
    extend_eigenvector,
    interpolation_oracle,
    level_spectrum,
    oracle_eigenvalues,
    provenance_branches,
    recognize_rational,
    schur_complement,
)
from specdec.matrices import block_decompose, laplacian_matrix
from specdec.ratfield import Polynomial, RationalFunction
from specdec.structure import build_graph

from conftest import CATALOG, decimation, structure
from test_structure import LOPSIDED, VERTEX_COUNTS

F = Fraction
Z = sp.Symbol("z")


def rf(num, den=(1,)):
    return RationalFunction(Polynomial([F(c) for c in num]), Polynomial([F(c) for c in den]))


def sympy_schur(name):
    """Schur complement of the level-1 matrix computed with sympy."""
    blocks = block_decompose(laplacian_matrix(build_graph(structure(name), 1)))
    conv = lambda m: sp.Matrix([[sp.Rational(x.numerator, x.denominator) for x in row] for row in m])
    A, B, C, D = map(conv, (blocks.A, blocks.B, blocks.C, blocks.D))
    return ((1 - Z) * A - B * (D - Z * sp.eye(D.shape[0])).inv() * C).applyfunc(sp.cancel)


def as_expr(r: RationalFunction):
    to = lambda p: sum(sp.Rational(c.numerator, c.denominator) * Z**k for k, c in enumerate(p.coeffs))
    return to(r.num) / to(r.den)


# --- exact decimation data ----------------------------------------------------


def test_gasket_decimation_data(sg):
    _, dec = sg
    assert dec.R == rf([0, 5, -4])
    # (6 - 4z) / ((4z - 2)(4z - 5))
    assert dec.phi == RationalFunction(Polynomial([6, -4]), Polynomial([-2, 4]) * Polynomial([-5, 4]))
    assert dec.c_delta == 5
    assert [e.exact for e in dec.exceptional_set] == [F(1, 2), F(5, 4), F(3, 2)]
    assert dec.L == 2


def test_interval_decimation_data(interval):
    _, dec = interval
    assert dec.R == rf([0, 4, -2])
    assert dec.phi == RationalFunction(Polynomial([1]), Polynomial([2, -2]))
    assert dec.c_delta == 4
    assert [e.exact for e in dec.exceptional_set] == [F(1)]


def test_vicsek_and_tree_hand_checks(vicsek, tree):
    _, dv = vicsek
    _, dt = tree
    assert dv.R(F(0)) == 0 and dt.R(F(0)) == 0
    assert dv.c_delta > 5 and dt.c_delta > 3
    assert dt.R == rf([0, 6, -6])
    # tree interior: a hub of degree 6 joined to three leaves of degree 2
    assert [e.exact for e in dt.sigma_D] == [F(1, 2), F(1), F(3, 2)]
    assert dv.R == rf([0, 15, -48, 36])
    ex = [float(e) for e in dv.exceptional_set]
    quad = sorted(np.roots([18, -21, 4]))
    assert np.allclose(ex, [quad[0], 0.5, quad[1], 4 / 3], atol=1e-14)


@pytest.mark.parametrize("name", CATALOG)
def test_schur_complement_matches_sympy(name):
    ref = sympy_schur(name)
    blocks = block_decompose(laplacian_matrix(build_graph(structure(name), 1)))
    S = schur_complement(blocks)
    for i in range(ref.shape[0]):
        for j in range(ref.shape[1]):
            assert sp.cancel(as_expr(S[i][j]) - ref[i, j]) == 0


@pytest.mark.parametrize("name", CATALOG)
def test_interpolation_route_agrees(name):
    phi, R = interpolation_oracle(structure(name), seed=3)
    dec = decimation(name)
    assert phi == dec.phi
    assert R == dec.R


@pytest.mark.parametrize("name", CATALOG)
def test_schur_form_identity(name):
    # S(z) = phi(z) (M_0 - R(z)) entrywise
    dec = decimation(name)
    k = structure(name).boundary_size
    S = sympy_schur(name)
    phi, R = as_expr(dec.phi), as_expr(dec.R)
    for i in range(k):
        for j in range(k):
            m0 = 1 if i == j else sp.Rational(-1, k - 1)
            assert sp.cancel(S[i, j] - phi * (m0 - R * (1 if i == j else 0))) == 0


def test_non_symmetric_structure_refused():
    with pytest.raises(NotFullySymmetricError):
        decimate(structure_from_dict(LOPSIDED))


# --- dimensions -----------------------------------------------------------------


def test_dimension_reports(sg, interval):
    rep = dimension_report(sg[1], sg[0])
    assert rep.regular and rep.r == F(3, 5)
    assert rep.d_S == pytest.approx(2 * np.log(3) / np.log(5), abs=1e-14)
    irep = dimension_report(interval[1], interval[0])
    assert irep.d_S == pytest.approx(1.0, abs=1e-12)
    assert irep.d_R == pytest.approx(1.0, abs=1e-12)


# --- branches -------------------------------------------------------------------


def test_gasket_branches(sg):
    _, dec = sg
    b0, b1 = dec.branches
    assert b0.increasing and not b1.increasing
    assert [float(x) for x in b0.range] == [0.0, 0.5]
    assert [float(x) for x in b1.range] == [0.75, 1.25]
    for y in np.linspace(0, 1.5, 13):
        for br in dec.branches:
            assert dec.R.eval_float(br(y)) == pytest.approx(y, abs=1e-14)
    # closed form: phi_{0,1}(y) = (5 -/+ sqrt(25 - 16 y)) / 8
    assert b0(1.0) == pytest.approx((5 - 3) / 8, abs=1e-15)
    assert b1(1.0) == pytest.approx((5 + 3) / 8, abs=1e-15)


def test_rational_bounds_enclose(sg):
    _, dec = sg
    for br in dec.branches:
        for y in (F(0), F(1, 3), F(1), F(3, 2)):
            lo, hi = br.bound(y, True), br.bound(y, False)
            assert lo <= hi
            t = br(float(y))
            assert float(lo) <= t <= float(hi)


@pytest.mark.parametrize("name, count", [("unit-interval", 2), ("sierpinski-gasket", 2),
                                         ("vicsek", 3), ("three-branch-tree", 2)])
def test_branch_count_over_max_exceptional(name, count):
    assert len(decimation(name).branches) == count


def test_containment(sg, interval):
    assert containment_holds(sg[1].R, F(3, 2))
    assert not containment_holds(interval[1].R, F(1))
    assert containment_holds(interval[1].R, F(2))


# --- level spectra and the oracle -------------------------------------------------


@pytest.mark.parametrize("name", CATALOG)
def test_level_multiplicities_add_up(name):
    s = structure(name)
    dec = decimation(name)
    for n in range(3):
        ls = level_spectrum(s, dec, n)
        assert ls.total_multiplicity == VERTEX_COUNTS[name][n]


@pytest.mark.parametrize("name", ["sierpinski-gasket", "vicsek", "three-branch-tree"])
def test_eigenvalues_map_into_previous_level(name):
    s, dec = structure(name), decimation(name)
    for n in range(1, 4):
        vals = oracle_eigenvalues(s, n)
        assert check_decimation(dec, vals, oracle_eigenvalues(s, n - 1)) > 0


def test_decimation_check_detects_corruption(sg):
    s, dec = sg
    vals = list(oracle_eigenvalues(s, 2))
    vals[3] += 1e-3
    with pytest.raises(CrossCheckError):
        check_decimation(dec, vals, oracle_eigenvalues(s, 1))


def test_gasket_level_two_matches_exact_eigenvalues(sg):
    s, dec = sg
    ls = level_spectrum(s, dec, 2)
    M = sp.Matrix([[sp.Rational(x.numerator, x.denominator) for x in row]
                   for row in laplacian_matrix(build_graph(s, 2)).entries])
    ref = sorted(((float(k), m) for k, m in M.eigenvals().items()))
    got = [(e.value, e.multiplicity) for e in ls.entries]
    assert len(got) == len(ref)
    for (v, m), (rv, rm) in zip(got, ref):
        assert v == pytest.approx(rv, abs=1e-12) and m == rm
    for e, (rv, _) in zip(ls.entries, sorted(M.eigenvals().items(), key=lambda t: float(t[0]))):
        if rv.is_Rational:
            assert e.exact == F(int(rv.p), int(rv.q))


def test_recognize_rational_requires_nullity(sg):
    s, _ = sg
    entries = laplacian_matrix(build_graph(s, 1)).entries
    assert recognize_rational(entries, 1.5, 3) == F(3, 2)
    assert recognize_rational(entries, 1.5, 4) is None
    assert recognize_rational(entries, 0.7, 1) is None


def test_provenance_on_gasket(sg):
    s, dec = sg
    ls = level_spectrum(s, dec, 3)
    assert all(e.provenance != "unassigned" for e in ls.entries)
    zero = [e for e in ls.entries if e.value == 0][0]
    assert zero.word == (0, 0, 0) and zero.seed == 0


@pytest.mark.parametrize("name", CATALOG)
def test_every_level_eigenvalue_gets_provenance(name):
    s, dec = structure(name), decimation(name)
    ls = level_spectrum(s, dec, 3)
    assert all(e.provenance != "unassigned" for e in ls.entries)


def test_dirichlet_spectrum_deletes_boundary(sg):
    s, dec = sg
    ls = level_spectrum(s, dec, 2, dirichlet=True)
    assert ls.total_multiplicity == 15 - 3
    assert min(ls.values()) > 0


# --- eigenvector extension ----------------------------------------------------------


def test_extend_eigenvector_on_gasket(sg):
    s, dec = sg
    g1 = build_graph(s, 1)
    M1 = laplacian_matrix(g1)
    blocks = block_decompose(M1)
    v0 = np.array([1.0, -1.0, 0.0])  # eigenvector of M_0 for 3/2
    with pytest.raises(ExceptionalValueError):
        extend_eigenvector(blocks, v0, dec.branches[0](1.5))  # phi_0(3/2) = 1/2 is in sigma(D)
    z = dec.branches[1](1.5)
    assert z == pytest.approx(0.75)
    v = extend_eigenvector(blocks, v0, z)
    M = M1.to_numpy()
    assert np.allclose(M @ v, z * v, atol=1e-12)


@pytest.mark.parametrize("name", ["unit-interval", "vicsek"])
def test_extend_eigenvector_generic(name):
    s, dec = structure(name), decimation(name)
    M1 = laplacian_matrix(build_graph(s, 1))
    blocks = block_decompose(M1)
    k = s.boundary_size
    v0 = np.zeros(k)
    v0[0], v0[1] = 1.0, -1.0
    ex = dec.exceptional_floats()
    for br in provenance_branches(dec):
        z = br(k / (k - 1))
        if np.min(np.abs(ex - z)) < 1e-9 or np.min(np.abs(np.array([float(x) for x in dec.sigma_D]) - z)) < 1e-9:
            continue
        v = extend_eigenvector(blocks, v0, z)
        assert np.allclose(M1.to_numpy() @ v, z * v, atol=1e-10)
