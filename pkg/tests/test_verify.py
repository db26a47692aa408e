import json

import numpy as np
import pytest

from henon_basins.basin import GridSpec
from henon_basins.maps import ScalarMap, linear_plus_sine, logistic, make_henon
from henon_basins.verify import (
    CATALOG,
    check_general_hypotheses,
    find_periodic_points,
    reports_to_json,
    run_check,
    run_checks,
)

EXPECTED_IDS = {
    "lemma4_wdelta_backward_escape",
    "lemma5_beta_cone",
    "lemma6_right_wedge",
    "prop7_polydisk",
    "cor8_strip",
    "prop9_adelta",
    "thm10_left_crossing",
    "thm12_right_crossing",
    "prop13_strip_trichotomy",
    "prop16i_q4_right_wedge",
    "prop16ii_q4_deep_strip",
    "lemma17_curve_c",
    "prop18_lower_half_trichotomy",
    "lemma19_periodic_points",
    "lemma19_basin_boundary",
    "lemma19_stable_backward_escape",
    "lemma21_filled_julia",
    "conjugacy_flip",
    "flip_saddle",
    "eigen_signs",
    "origin_thresholds",
    "alpha_attracting_threshold",
    "inverse_roundtrip",
    "jacobian_finite_difference",
}


def test_catalog_is_complete():
    assert set(CATALOG) == EXPECTED_IDS
    assert all(e.label for e in CATALOG.values())


def test_backward_escape_wedge_check(henon):
    r = run_check("lemma4_wdelta_backward_escape", henon, 1000, seed=7)
    assert r.verdict == "Pass" and r.passes == 1000 and not r.failures


def test_conjugacy_check(henon):
    r = run_check("conjugacy_flip", henon, 1000, seed=7)
    assert r.verdict == "Pass"
    assert r.metrics["max_deviation"] < 1e-12


def test_inapplicable_outside_threshold():
    r = run_check("lemma6_right_wedge", make_henon(1.5, 2.0), 100, seed=7)
    assert r.verdict == "Inapplicable" and r.passes == 0 and not r.failures


def test_closed_form_checks_inapplicable_for_general_map(general):
    assert run_check("lemma5_beta_cone", general, 10).verdict == "Inapplicable"
    assert run_check("inverse_roundtrip", general, 200).verdict == "Pass"


def test_contraction_check_fails_for_strong_coupling():
    r = run_check("prop7_polydisk", make_henon(0.9, 2.0), 100, seed=7)
    assert r.verdict == "Fail" and r.failures


def test_unit_rectangle_check_fails_outside_attracting_range():
    # alpha is no longer attracting for mu > 3(1 - delta^2)
    r = run_check("prop9_adelta", make_henon(0.6, 2.5), 100, seed=7)
    assert r.verdict == "Fail"


def test_crossing_failure_is_reported_not_raised():
    r = run_check("thm12_right_crossing", make_henon(0.9, 2.0), 50, seed=7)
    assert r.verdict == "Fail"
    assert "CrossingError" in r.failures[0][1]


def test_bad_arguments(henon):
    with pytest.raises(KeyError):
        run_check("no_such_check", henon, 10)
    with pytest.raises(ValueError):
        run_check("conjugacy_flip", henon, 0)


def test_reports_are_reproducible(henon):
    a = run_check("prop13_strip_trichotomy", henon, 300, seed=11)
    b = run_check("prop13_strip_trichotomy", henon, 300, seed=11)
    assert a == b


def test_json_layout(henon):
    text = reports_to_json(run_checks(["conjugacy_flip", "eigen_signs"], henon, 20, 7))
    data = json.loads(text)
    assert [d["check_id"] for d in data] == ["conjugacy_flip", "eigen_signs"]
    assert list(data[0]) == ["check_id", "params", "samples", "passes", "verdict", "failures", "metrics"]


def test_periodic_census(henon):
    c = find_periodic_points(henon, 4, GridSpec(-2, 3, -2, 2, 20, 20), 2, seed=7)
    assert c.periods == [1, 1]
    for p, per, res in c.found:
        x, y = p
        for _ in range(per):
            x, y = henon.step(x, y)
        assert max(abs(x - p.x), abs(y - p.y)) < 1e-9
        assert res < 1e-9
    assert len(c.orbits(henon)) == 2


def test_census_finds_period_two_orbit_when_present():
    # past the period-doubling of alpha a 2-cycle appears
    m = make_henon(0.1, 3.2)
    c = find_periodic_points(m, 2, GridSpec(-1, 2, -1, 1, 20, 20), 2, seed=7)
    assert 2 in c.periods
    assert c.periods.count(2) == 2
    assert sorted(len(o) for o in c.orbits(m)) == [1, 1, 2]
    with pytest.raises(ValueError):
        find_periodic_points(m, 0, GridSpec(-1, 2, -1, 1, 2, 2))


def test_census_stable_under_refinement(henon):
    coarse = find_periodic_points(henon, 6, GridSpec(-2, 3, -2, 2, 20, 20), 4, seed=7)
    fine = find_periodic_points(henon, 6, GridSpec(-2, 3, -2, 2, 40, 40), 4, seed=7)
    assert len(coarse.found) == len(fine.found) == 2


def test_general_hypotheses_pass():
    r = check_general_hypotheses(logistic(2.0), linear_plus_sine(0.1, 0.001), 0.1, (-10, 10))
    assert r.verdict == "Pass"
    assert r.metrics["c2_distance"] == pytest.approx(0.001, rel=1e-4)
    assert r.metrics["g2_sup"] == pytest.approx(-4.0)


def test_general_hypotheses_detect_shifted_g():
    g = ScalarMap(
        lambda x: 2 * (x - 0.1) * (1.1 - x),
        lambda x: 2 * (1.2 - 2 * x),
        lambda x: np.full_like(np.asarray(x, dtype=float), -4.0),
        "shifted",
    )
    r = check_general_hypotheses(g, linear_plus_sine(0.1, 0.001), 0.1)
    assert r.verdict == "Fail"
    assert "g(1)=0" in [d for _, d in r.failures]


def test_general_hypotheses_interval_precondition():
    with pytest.raises(ValueError):
        check_general_hypotheses(logistic(2.0), linear_plus_sine(0.1, 0.001), 0.1, (0, 1))
