import numpy as np
import pytest

from henon_basins.basin import GridSpec, extract_boundary, rasterize, undecided_points, point_segment_distances
from henon_basins.manifolds import Branch, ManifoldKind, trace_manifold
from henon_basins.maps import attracting_fixed_point
from henon_basins.orbits import (
    Direction,
    Fate,
    FateKind,
    Membership,
    OrbitBudget,
    classify_backward,
    classify_forward,
    classify_many,
    in_filled_julia,
    iterate,
)
from henon_basins.regions import RegionTag


def test_iterate_fixed_points(henon):
    t = iterate(henon, (0, 0), 5)
    assert len(t) == 6 and all(p == (0, 0) for p in t.points)
    a = attracting_fixed_point(henon)
    t = iterate(henon, a, 5, Direction.BACKWARD)
    assert np.allclose(t.as_array(), [a] * 6, atol=1e-15)


def test_iterate_two_steps(henon):
    t = iterate(henon, (0.5, 0.0), 2)
    assert np.allclose(t.as_array(), [(0.5, 0), (0.5, 0.05), (0.505, 0.05)], atol=1e-15)
    assert t.to_csv().splitlines()[0] == "n,x,y"


def test_iterate_reports_blowup(henon):
    t = iterate(henon, (-1e100, 0), 10)
    assert t.blowup and len(t) < 11
    with pytest.raises(ValueError):
        iterate(henon, (0, 0), -1)


def test_forward_examples(henon):
    f = classify_forward(henon, (0.5, 0.1))
    assert f.kind is FateKind.TO_ALPHA
    t = iterate(henon, (0.5, 0.1), 500).points[-1]
    assert max(abs(t[0] - 0.505), abs(t[1] - 0.0505)) < 1e-10
    f = classify_forward(henon, (-1, 0))
    assert (f.kind, f.witness) == (FateKind.TO_INFINITY, RegionTag.BETA_CONE)
    f = classify_forward(henon, (0, 0))
    assert (f.kind, f.iterations_used) == (FateKind.TO_ORIGIN, 0)
    f = classify_forward(henon, (2, 0.1))
    assert (f.kind, f.witness) == (FateKind.TO_INFINITY, RegionTag.RIGHT_WEDGE)


def test_fate_text(henon):
    assert str(classify_forward(henon, (0, 0))) == "fate=ToOrigin iters=0 witness=none"
    assert str(Fate(FateKind.TO_INFINITY, 3, RegionTag.W_DELTA)) == "fate=ToInfinity iters=3 witness=WDelta"


def test_backward_examples(henon):
    f = classify_backward(henon, (0, 1))
    assert (f.kind, f.witness) == (FateKind.TO_INFINITY, RegionTag.W_DELTA)
    ys = [abs(p.y) for p in iterate(henon, (0, 1), 20, Direction.BACKWARD).points if np.isfinite(p.y)]
    assert all(b > a for a, b in zip(ys, ys[1:]))
    assert classify_backward(henon, attracting_fixed_point(henon)).kind is FateKind.TO_ALPHA


def test_backward_orbit_of_unstable_point_approaches_origin(henon):
    # the inverse expands transversally by 1/|lambda_s| ~ 200, so rounding
    # error wins long before the orbit gets within 1e-9 of the origin; the
    # approach itself is still visible over the first few steps
    c = trace_manifold(henon, ManifoldKind.UNSTABLE, Branch.PLUS, 0.5)
    i = int(np.searchsorted(c.cumulative_arclength, 0.01))
    t = iterate(henon, c.points[i], 4, Direction.BACKWARD).as_array()
    d = np.hypot(t[:, 0], t[:, 1])
    assert np.all(np.diff(d) < 0)
    assert d[-1] < d[0] / 10


def test_filled_julia_examples(henon):
    a = attracting_fixed_point(henon)
    assert in_filled_julia(henon, (0, 0)) is Membership.YES
    assert in_filled_julia(henon, a) is Membership.YES
    assert in_filled_julia(henon, (0, 1)) is Membership.NO
    assert in_filled_julia(henon, (-1, 0)) is Membership.NO


def test_budget_validation(henon):
    with pytest.raises(ValueError):
        OrbitBudget(max_iter=0)
    with pytest.raises(ValueError):
        OrbitBudget(escape_norm=-1)
    assert OrbitBudget.default_for(henon).escape_norm == pytest.approx(30.0)


def test_tight_budget_leaves_undecided(henon):
    f = classify_forward(henon, (0.3, 0.1), OrbitBudget(max_iter=2))
    assert f.kind is FateKind.UNDECIDED and f.iterations_used == 2


def test_batch_matches_scalar(henon, rng):
    x = rng.uniform(-2, 3, 200)
    y = rng.uniform(-1, 1, 200)
    k, it, _ = classify_many(henon, x, y)
    for i in range(0, 200, 17):
        f = classify_forward(henon, (x[i], y[i]))
        assert (int(f.kind), f.iterations_used) == (k[i], it[i])


def test_certificates_never_contradicted(henon, rng):
    budget = OrbitBudget.default_for(henon)
    x = rng.uniform(-20, 20, 20_000)
    y = rng.uniform(-20, 20, 20_000)
    for direction in Direction:
        kind, iters, wit = classify_many(henon, x, y, budget, direction)
        sel = np.flatnonzero((kind == FateKind.TO_INFINITY) & (wit >= 0))
        assert sel.size > 1000
        step = henon.step if direction is Direction.FORWARD else henon.step_inverse
        px, py = x[sel].copy(), y[sel].copy()
        with np.errstate(all="ignore"):
            for n in range(int(iters[sel].max())):
                mx, my = step(px, py)
                live = iters[sel] > n
                px, py = np.where(live, mx, px), np.where(live, my, py)
            # witness points may start inside the ball; once out they stay out
            left = np.zeros(sel.size, dtype=bool)
            for _ in range(50):
                px, py = step(px, py)
                norm = np.maximum(np.abs(px), np.abs(py))
                inside = np.isfinite(norm) & (norm <= budget.escape_norm / 2)
                assert not np.any(left & inside)
                left |= ~inside


def test_undecided_tube_is_thin(henon, stable_pair):
    spec = GridSpec(-2, 3, -1, 1, 200, 200)
    raster = rasterize(henon, spec)
    und = undecided_points(raster)
    assert len(und) < 0.005 * spec.nx * spec.ny
    if len(und):
        b = extract_boundary(raster)
        d = point_segment_distances(und, [b])
        assert d.max() <= 2 * max(spec.dx, spec.dy) * np.sqrt(2)
