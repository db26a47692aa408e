import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from henon_basins.maps import (
    NumericBlowup,
    Stability,
    apply,
    apply_inverse,
    as_point,
    attracting_fixed_point,
    c2_distance_to_linear,
    classify_stability,
    conjugate_flip,
    eigenvalues_at,
    fixed_points,
    jacobian,
    linear,
    logistic,
    make_general,
    make_henon,
    ScalarMap,
    scalar_map_from_spec,
)


def test_h11_membership_flags():
    assert make_henon(0.1, 2.0).h11_member
    assert not make_henon(0.5, 2.5).h11_member


def test_zero_delta_is_rejected():
    with pytest.raises(ValueError, match="delta"):
        make_henon(0.0, 2.0)


def test_nonfinite_point_is_rejected():
    with pytest.raises(ValueError):
        as_point((math.nan, 0.0))


@pytest.mark.parametrize(
    "p, image",
    [((0.0, 0.0), (0.0, 0.0)), ((0.5, 0.0), (0.5, 0.05)), ((1.0, 1.0), (0.1, 0.1))],
)
def test_apply_known_values(henon, p, image):
    assert apply(henon, p) == pytest.approx(image, abs=1e-15)


def test_apply_inverse_known_values(henon):
    assert apply_inverse(henon, (0.0, 0.0)) == (0.0, 0.0)
    assert apply_inverse(henon, (0.5, 0.05)) == pytest.approx((0.5, 0.0), abs=1e-14)
    back = apply_inverse(henon, apply(henon, (0.3, 0.7)))
    assert back == pytest.approx((0.3, 0.7), abs=1e-10)


def test_apply_overflow_raises(henon):
    with pytest.raises(NumericBlowup):
        apply(henon, (1e200, 0.0))


@settings(max_examples=200, deadline=None)
@given(st.floats(-10, 10), st.floats(-10, 10))
def test_roundtrip_property(x, y):
    m = make_henon(0.1, 2.0)
    bx, by = apply_inverse(m, apply(m, (x, y)))
    scale = max(1.0, abs(x), abs(y))
    assert abs(bx - x) / scale < 1e-9 and abs(by - y) / scale < 1e-9


def test_roundtrip_bulk(henon, rng):
    x = rng.uniform(-10, 10, 10_000)
    y = rng.uniform(-10, 10, 10_000)
    bx, by = henon.step_inverse(*henon.step(x, y))
    err = np.maximum(np.abs(bx - x), np.abs(by - y)) / np.maximum(1.0, np.maximum(np.abs(x), np.abs(y)))
    assert err.max() < 1e-9


def test_jacobian_values(henon, general):
    assert np.allclose(jacobian(henon, (0, 0)), [[2, 0.1], [0.1, 0]])
    assert np.allclose(jacobian(henon, (0.5, 3.7)), [[0, 0.1], [0.1, 0]])
    plain = make_general(logistic(2.0), linear(0.1), 0.1)
    assert np.allclose(jacobian(plain, (0, 0)), [[2, 0.1], [0.1, 0]])


def test_jacobian_matches_central_differences(henon, general, rng):
    for fmap in (henon, general):
        for _ in range(100):
            p = rng.uniform(-3, 3, 2)
            h = 1e-6
            J = jacobian(fmap, p)
            cols = []
            for e in np.eye(2):
                a = np.array(apply(fmap, p + h * e))
                b = np.array(apply(fmap, p - h * e))
                cols.append((a - b) / (2 * h))
            assert np.abs(J - np.column_stack(cols)).max() < 1e-5


def test_eigenvalues_origin_and_alpha(henon):
    lm, lp = eigenvalues_at(henon, (0, 0))
    assert lm == pytest.approx((2 - math.sqrt(4.04)) / 2, abs=1e-12)
    assert lp == pytest.approx((2 + math.sqrt(4.04)) / 2, abs=1e-12)
    lm, lp = eigenvalues_at(henon, attracting_fixed_point(henon))
    assert lm == pytest.approx(-0.1105, abs=1e-4)
    assert lp == pytest.approx(0.0905, abs=1e-4)


@pytest.mark.parametrize("delta, mu", [(0.1, 2.0), (0.7, 1.3), (-0.4, 2.6)])
def test_eigenvalues_on_critical_line(delta, mu):
    lm, lp = eigenvalues_at(make_henon(delta, mu), (0.5, 1.0))
    assert (lm, lp) == pytest.approx((-abs(delta), abs(delta)), abs=1e-15)


@settings(max_examples=200, deadline=None)
@given(st.floats(-5, 5).filter(lambda d: abs(d) > 1e-3), st.floats(0.05, 4), st.floats(-10, 10))
def test_eigenvalue_signs_opposite(delta, mu, x):
    lm, lp = eigenvalues_at(make_henon(delta, mu), (x, 0.0))
    assert lm < 0 < lp
    ref = np.sort(np.linalg.eigvals(jacobian(make_henon(delta, mu), (x, 0.0))).real)
    assert (lm, lp) == pytest.approx(tuple(ref), rel=1e-9, abs=1e-12)


def test_origin_thresholds_on_grid():
    for delta in np.linspace(-2, 2, 41):
        if delta == 0:
            continue
        for mu in np.linspace(0.05, 4, 40):
            lm, lp = eigenvalues_at(make_henon(delta, mu), (0, 0))
            if abs(delta**2 - (1 - mu)) > 1e-9:
                assert (lp > 1) == (delta**2 > 1 - mu)
            if abs(delta**2 - (1 + mu)) > 1e-9:
                assert (lm > -1) == (delta**2 < 1 + mu)


def test_alpha_threshold_on_grid():
    for delta in np.linspace(0.02, 1.2, 30):
        for mu in np.linspace(1.02, 2.98, 30):
            m = make_henon(delta, mu)
            lm, lp = eigenvalues_at(m, attracting_fixed_point(m))
            if abs(mu - 3 * (1 - delta**2)) > 1e-9:
                assert (max(abs(lm), abs(lp)) < 1) == (mu < 3 * (1 - delta**2))


def test_stability_labels():
    assert classify_stability(-0.5, 2.0) is Stability.FLIP_SADDLE
    assert classify_stability(-2.0, 0.5) is Stability.FLIP_SADDLE
    assert classify_stability(0.5, 2.0) is Stability.SADDLE
    assert classify_stability(-0.1, 0.1) is Stability.ATTRACTING
    assert classify_stability(-3.0, 2.0) is Stability.REPELLING
    assert classify_stability(-1.0, 0.5) is Stability.NON_HYPERBOLIC


def test_fixed_points_henon(henon):
    origin, alpha = fixed_points(henon)
    assert origin.stability is Stability.FLIP_SADDLE
    assert alpha.stability is Stability.ATTRACTING
    assert alpha.location == pytest.approx((0.505, 0.0505), abs=1e-12)
    assert max(abs(l) for l in alpha.eigenvalues) < 1


def test_fixed_points_general(general):
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        pts = fixed_points(general, box=(-2, 3, -2, 2))
    assert len(pts) == 2
    assert pts[0].location == pytest.approx((0, 0), abs=1e-12)
    assert pts[0].stability in (Stability.SADDLE, Stability.FLIP_SADDLE)
    assert pts[1].location == pytest.approx((0.505, 0.0505), abs=2e-3)


def test_general_inverse_roundtrip(general, rng):
    x = rng.uniform(-10, 10, 2000)
    y = rng.uniform(-10, 10, 2000)
    bx, by = general.step_inverse(*general.step(x, y))
    assert np.max(np.abs(bx - x) + np.abs(by - y)) < 1e-9


def test_conjugate_flip(henon):
    assert conjugate_flip((1, 2)) == (1, -2)
    assert conjugate_flip((3, 0)) == (3, 0)
    lhs = conjugate_flip(apply(henon, (0.3, 0.4)))
    rhs = apply(henon.flipped(), conjugate_flip((0.3, 0.4)))
    assert lhs == rhs


def test_c2_distance_examples():
    assert c2_distance_to_linear(linear(0.1), 0.1, (-5, 5)) == 0.0
    h = scalar_map_from_spec("linear_plus_sine(0.1, 0.001)")
    assert c2_distance_to_linear(h, 0.1, (-10, 10), 10_000) == pytest.approx(0.001, rel=1e-4)
    quad = ScalarMap(lambda x: 0.1 * x + 0.01 * x**2, lambda x: 0.1 + 0.02 * x, lambda x: 0.02 + 0 * x, "quad")
    assert c2_distance_to_linear(quad, 0.1, (-1, 1)) == pytest.approx(0.02, abs=1e-12)


def test_catalog_parser_errors():
    with pytest.raises(ValueError, match="catalog"):
        scalar_map_from_spec("cubic(1)")
    with pytest.raises(ValueError, match="argument"):
        scalar_map_from_spec("logistic(1, 2)")


def test_general_rejects_bad_h():
    g = logistic(2.0)
    shifted = ScalarMap(lambda x: 0.1 * x + 1.0, lambda x: 0.1 + 0 * x, lambda x: 0 * x, "shifted")
    with pytest.raises(ValueError, match="h\\(0\\)"):
        make_general(g, shifted, 0.1)
    decreasing = ScalarMap(lambda x: -0.1 * x, lambda x: -0.1 + 0 * x, lambda x: 0 * x, "neg")
    with pytest.raises(ValueError, match="increasing"):
        make_general(g, decreasing, 0.1)
    wrong = ScalarMap(lambda x: 0.1 * x, lambda x: 0.2 + 0 * x, lambda x: 0 * x, "wrong")
    with pytest.raises(ValueError, match="derivatives"):
        make_general(g, wrong, 0.1)
