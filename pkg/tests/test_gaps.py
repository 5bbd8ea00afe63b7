import dataclasses
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from specdec.gaps import (
    GapMethod,
    StrayCheckError,
    augmented_exceptional,
    check_crit_hypotheses,
    corollary_checks,
    corollary_two_largest,
    crit_gap_intervals,
    gaps_via_julia,
    gaps_via_ratio,
    ratio_estimate,
    strictly_concave_on,
)
from specdec.julia import classify
from specdec.ratfield import as_algebraic
from specdec.spectrum import SpectrumQuery, SpectrumRecord, spectrum_sample, spectrum_up_to

from conftest import CATALOG, decimation, structure

F = Fraction


def sample(name):
    s, dec = structure(name), decimation(name)
    return spectrum_sample(s, dec, max_vertices=2000)


# --- hypotheses -----------------------------------------------------------------


def test_gasket_hypotheses(sg):
    hyp = check_crit_hypotheses(sg[1])
    assert hyp.all_ok
    assert hyp.J == 0 and hyp.M.exact == F(1, 2) and hyp.m.exact == F(3, 4)
    assert hyp.n_shift == 1 and hyp.stray_bound == 3
    assert hyp.z_star.exact == F(1, 2)


def test_interval_fails_containment(interval):
    hyp = check_crit_hypotheses(interval[1])
    assert not hyp.containment_ok and not hyp.all_ok


def test_tree_branches_touch(tree):
    hyp = check_crit_hypotheses(tree[1])
    assert hyp.J is None and not hyp.all_ok


def test_vicsek_uses_last_separated_pair(vicsek):
    hyp = check_crit_hypotheses(vicsek[1])
    assert hyp.all_ok and hyp.J == 1
    assert hyp.M.exact == F(1, 2) and hyp.m.exact == F(5, 6)


def test_b_override_must_dominate(sg):
    with pytest.raises(ValueError):
        check_crit_hypotheses(sg[1], F(1))


def test_concavity_certificate(sg):
    R = sg[1].R  # R'' = -8
    assert strictly_concave_on(R, as_algebraic(0), as_algebraic(2))
    cubic = decimation("vicsek").R  # R'' = 216 z - 96 changes sign at 4/9
    assert strictly_concave_on(cubic, as_algebraic(0), as_algebraic(F(4, 9)))
    assert not strictly_concave_on(cubic, as_algebraic(0), as_algebraic(F(1, 2)))


# --- gap intervals ----------------------------------------------------------------


def test_gasket_intervals_scale(sg):
    s, dec = sg
    hyp = check_crit_hypotheses(dec, F(3, 2))
    rep = crit_gap_intervals(dec, hyp, k_max=4)
    gaps = rep.gap_intervals
    ratios = [g.B / g.A for g in gaps]
    assert max(ratios) - min(ratios) < 1e-10 * ratios[0]
    for g0, g1 in zip(gaps, gaps[1:]):
        assert g1.A / g0.A == pytest.approx(5, rel=1e-10)
    assert rep.method == GapMethod.CRIT_INTERVALS and rep.has_gaps


def test_gasket_intervals_against_spectrum(sg):
    s, dec = sg
    hyp = check_crit_hypotheses(dec)
    recs, lam = sample("sierpinski-gasket")
    rep = crit_gap_intervals(dec, hyp, 4, recs, lam)
    checked = [g for g in rep.gap_intervals if g.free_length is not None]
    assert len(checked) >= 4
    for g in checked:
        assert len(g.strays) <= rep.stray_bound
        assert g.free_length >= (g.B - g.A) / (rep.stray_bound + 1)
    # first positive eigenvalue sits on the right end of the first gap
    first = min(r.lambda_ for r in recs if r.lambda_ > 0)
    assert first == pytest.approx(rep.gap_intervals[0].B, rel=1e-10)


def test_interval_scan_of_spectrum_against_gaps(sg):
    s, dec = sg
    hyp = check_crit_hypotheses(dec)
    recs, lam = sample("sierpinski-gasket")
    rep = crit_gap_intervals(dec, hyp, 3, recs, lam)
    vals = np.array(sorted({r.lambda_ for r in recs}))
    for g in rep.gap_intervals:
        inside = vals[(vals > g.A * (1 + 1e-9)) & (vals < g.B * (1 - 1e-9))]
        assert len(inside) == len(g.strays)


def test_stray_check_detects_foreign_eigenvalue(sg):
    s, dec = sg
    hyp = check_crit_hypotheses(dec)
    recs, lam = sample("sierpinski-gasket")
    g0 = crit_gap_intervals(dec, hyp, 0).gap_intervals[0]
    fake = SpectrumRecord((g0.A + g0.B) / 2 * 1.0001, 0.0, 0, ())
    with pytest.raises(StrayCheckError):
        crit_gap_intervals(dec, hyp, 1, list(recs) + [fake], lam)


def test_inapplicable_hypotheses_rejected(interval):
    with pytest.raises(ValueError):
        crit_gap_intervals(interval[1], check_crit_hypotheses(interval[1]))


@pytest.mark.parametrize("name, k_max", [("three-branch-tree", 3), ("vicsek", 1)])
def test_strays_have_predicted_form(name, k_max):
    dec = decimation(name)
    hyp = check_crit_hypotheses(dec)
    if not hyp.all_ok:
        hyp = corollary_two_largest(dec).theorem
    recs, lam = sample(name)
    rep = crit_gap_intervals(dec, hyp, k_max, recs, lam)
    assert any(g.free_length is not None for g in rep.gap_intervals)
    ratios = [g.B / g.A for g in rep.gap_intervals]
    assert max(ratios) - min(ratios) < 1e-9 * ratios[0]


def test_tree_has_one_stray_per_gap():
    dec = decimation("three-branch-tree")
    hyp = corollary_two_largest(dec).theorem
    recs, lam = sample("three-branch-tree")
    rep = crit_gap_intervals(dec, hyp, 3, recs, lam)
    assert rep.stray_bound == 2
    for g in rep.gap_intervals:
        if g.free_length is not None:
            assert len(g.strays) == 1


# --- corollaries -------------------------------------------------------------------


def test_gasket_corollaries_imply_theorem(sg):
    dec = sg[1]
    theorem_ok = check_crit_hypotheses(dec).all_ok
    verdicts = {cv.name: cv for cv in corollary_checks(dec)}
    assert verdicts["phi1-decreasing"].hypotheses_hold
    assert verdicts["two-largest-exceptional"].hypotheses_hold
    assert not verdicts["consecutive-exceptional"].hypotheses_hold
    for cv in verdicts.values():
        if cv.hypotheses_hold:
            assert cv.gap_verdict is True and theorem_ok


def test_augmented_exceptional_sets():
    tree = [x.exact for x in augmented_exceptional(decimation("three-branch-tree"))]
    assert tree == [F(1, 2), F(1)]
    sg = [x.exact for x in augmented_exceptional(decimation("sierpinski-gasket"))]
    assert sg == [F(1, 2), F(3, 4), F(5, 4)]


def test_tree_covered_only_by_corollary():
    dec = decimation("three-branch-tree")
    cv = corollary_two_largest(dec)
    assert cv.hypotheses_hold and cv.gap_verdict
    assert float(cv.theorem.b) == 1.0
    assert float(cv.theorem.M) == pytest.approx((3 - math.sqrt(3)) / 6, abs=1e-14)
    assert float(cv.theorem.m) == pytest.approx((3 + math.sqrt(3)) / 6, abs=1e-14)


def test_interval_no_corollary_applies(interval):
    assert not any(cv.hypotheses_hold for cv in corollary_checks(interval[1]))


# --- Julia and ratio verdicts ------------------------------------------------------


@pytest.mark.parametrize("name", CATALOG)
def test_three_methods_agree(name):
    s, dec = structure(name), decimation(name)
    julia = gaps_via_julia(classify(dec), True)
    recs, _ = sample(name)
    ratio = gaps_via_ratio(recs, window=float(dec.c_delta) ** 2)
    crit = check_crit_hypotheses(dec).all_ok or any(cv.hypotheses_hold for cv in corollary_checks(dec))
    assert julia.has_gaps == ratio.has_gaps
    # the criteria are sufficient conditions: they may only fire when gaps exist
    assert not crit or julia.has_gaps
    assert julia.has_gaps == s.expected["has_gaps"]


def test_julia_route_needs_regular(sg):
    with pytest.raises(ValueError):
        gaps_via_julia(classify(sg[1]), regular=False)


def test_ratio_estimate_rejects_small_samples():
    with pytest.raises(ValueError):
        ratio_estimate([1.0, 2.0, 3.0])


@given(st.integers(30, 400))
def test_ratio_estimate_on_squares(n):
    # pure k^2 spectrum: ratios tend to 1
    vals = [k * k for k in range(1, n + 1)]
    est = ratio_estimate(vals, window=16)
    k0 = next(k for k in range(1, n + 1) if 16 * k * k >= n * n)
    assert est == pytest.approx(((k0 + 1) / k0) ** 2, rel=1e-12)


@given(st.floats(1.2, 4.0), st.integers(20, 60))
def test_ratio_estimate_finds_geometric_gap(q, n):
    vals = [q**k for k in range(n)]
    assert ratio_estimate(vals) == pytest.approx(q, rel=1e-12)


def test_multiplicities_do_not_hide_gaps():
    recs = [SpectrumRecord(float(3**k), 0.0, 0, (), multiplicity=10**k) for k in range(25)]
    assert ratio_estimate(recs) == pytest.approx(3.0)
