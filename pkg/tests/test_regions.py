import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from henon_basins.maps import HenonParams
from henon_basins.orbits import Direction, FateKind, OrbitBudget, classify_many
from henon_basins.regions import (
    RegionTag,
    classify_region,
    delta_thresholds,
    in_adelta,
    in_beta_cone,
    in_q4_deep_strip,
    in_q4_right_wedge,
    in_right_wedge,
    in_wdelta,
)

P = HenonParams(0.1, 2.0)


@pytest.mark.parametrize(
    "p, expected",
    [
        ((0.0, 1.0), {RegionTag.W_DELTA}),
        ((0.5, 0.1), {RegionTag.A_DELTA, RegionTag.STRIP_S}),
        ((-1.0, 0.0), {RegionTag.BETA_CONE}),
        ((0.5, -0.1), {RegionTag.OTHER}),
    ],
)
def test_classify_region_examples(p, expected):
    assert classify_region(P, p) == frozenset(expected)


def test_deep_strip_point_also_lies_in_backward_wedge():
    # |y| = 11 is far above 2*delta and delta*|x|, so the wedge holds as well
    assert classify_region(P, (1.0, -11.0)) == {RegionTag.Q4_DEEP_STRIP, RegionTag.W_DELTA}


def test_polydisk_only_with_radius():
    alpha = (0.505, 0.0505)
    assert RegionTag.POLYDISK not in classify_region(P, alpha)
    assert RegionTag.POLYDISK in classify_region(P, alpha, r=0.1)


def test_thresholds():
    t = delta_thresholds(0.1, 2.0)
    assert t.beta == pytest.approx(0.1)
    assert t.lemma6_bound == pytest.approx(1.0)
    assert t.prop16i_bound == pytest.approx(math.sqrt(6))
    assert t.delta0 == pytest.approx(10.2)
    t = delta_thresholds(0.1, 1.5)
    assert t.beta == pytest.approx(0.2)
    assert t.lemma4_bound == 1.0
    assert delta_thresholds(1e-9, 2.0).beta < 1e-8
    with pytest.raises(ValueError):
        delta_thresholds(0.1, 3.5)
    with pytest.raises(ValueError):
        delta_thresholds(-0.1, 2.0)


def test_boundaries_are_closed():
    assert in_wdelta(0.0, 0.2, 0.1)
    assert in_right_wedge(2.0, 0.2, 0.1)
    assert in_q4_right_wedge(2.0, 0.0)
    assert in_q4_deep_strip(0.0, -10.2, 0.1, 2.0)
    assert in_adelta(1.0, 0.2, 0.1)
    assert not in_adelta(0.0, 0.0, 0.1)


@given(st.floats(-50, 50), st.floats(-50, 50), st.floats(1, 100))
def test_wedge_is_monotone_in_y(x, y, t):
    if in_wdelta(x, y, 0.1):
        assert in_wdelta(x, t * y, 0.1)


@given(st.floats(-50, 0), st.floats(-50, 0))
def test_third_quadrant_lies_in_cone(x, y):
    if (x, y) != (0.0, 0.0):
        assert in_beta_cone(x, y, 0.1, 2.0)


def _sample(rng, pred, n=1000, box=(-20, 20, -20, 20)):
    x = rng.uniform(box[0], box[1], 200 * n)
    y = rng.uniform(box[2], box[3], 200 * n)
    ok = pred(x, y)
    return x[ok][:n], y[ok][:n]


def test_escape_regions_agree_with_plain_iteration(henon, rng):
    # region certificates switched off, so the classifier only sees the orbit
    budget = OrbitBudget.default_for(henon)
    checks = [
        (lambda x, y: in_beta_cone(x, y, 0.1, 2.0), Direction.FORWARD, FateKind.TO_INFINITY),
        (lambda x, y: in_right_wedge(x, y, 0.1), Direction.FORWARD, FateKind.TO_INFINITY),
        (in_q4_right_wedge, Direction.FORWARD, FateKind.TO_INFINITY),
        (lambda x, y: in_q4_deep_strip(x, y, 0.1, 2.0), Direction.FORWARD, FateKind.TO_INFINITY),
        (lambda x, y: in_wdelta(x, y, 0.1), Direction.BACKWARD, FateKind.TO_INFINITY),
        (lambda x, y: in_adelta(x, y, 0.1), Direction.FORWARD, FateKind.TO_ALPHA),
    ]
    for pred, direction, want in checks:
        x, y = _sample(rng, pred, box=(0, 1, 0, 0.2) if want == FateKind.TO_ALPHA else (-20, 20, -20, 20))
        assert x.size == 1000
        kind, _, _ = classify_many(henon, x, y, budget, direction, use_regions=False)
        assert np.all(kind == want)
