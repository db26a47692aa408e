"""Sampled numerical checks of the structural claims, and a periodic-point census.

Every check draws ``samples`` points (or parameter pairs) from its own region
with a seeded generator, evaluates a predicate on each and aggregates a
:class:`CheckReport`.  A check whose parameter precondition fails reports
``Inapplicable`` without sampling.

Escape claims are tested with the raw monotone quantities used in their
proofs (for instance a strictly growing ``|y|`` under backward iteration),
not with :func:`orbits.classify_many`, so the classifier's region
certificates are checked independently of the classifier.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import shapely

from . import regions as R
from .basin import GridSpec, point_segment_distances
from .manifolds import (
    Branch,
    CrossingError,
    ManifoldKind,
    NotASaddleError,
    TraceError,
    curve_C,
    trace_manifold,
    xbar_left_many,
    xbar_right_many,
)
from .maps import (
    MapFamily,
    Point2,
    ScalarMap,
    Stability,
    attracting_fixed_point,
    c2_distance_to_linear,
    classify_stability,
    eigenvalues_at,
    jacobian,
    make_henon,
    newton_periodic,
)
from .orbits import Direction, FateKind, OrbitBudget, classify_many

__all__ = [
    "CheckReport",
    "PeriodicCensus",
    "CATALOG",
    "catalog_ids",
    "run_check",
    "run_checks",
    "find_periodic_points",
    "check_general_hypotheses",
    "reports_to_json",
]

PASS, FAIL, INAPPLICABLE = "Pass", "Fail", "Inapplicable"
WINDOW = (-3.0, 4.0, -3.0, 3.0)
FAR_BAND = (10.0, 20.0)


@dataclass
class CheckReport:
    check_id: str
    params: dict
    samples: int
    passes: int = 0
    failures: list = field(default_factory=list)
    verdict: str = PASS
    metrics: dict = field(default_factory=dict)
    seconds: float = field(default=0.0, compare=False)

    def fail(self, p, detail: str) -> None:
        self.failures.append((Point2(float(p[0]), float(p[1])), detail))

    def finish(self) -> "CheckReport":
        if self.verdict != INAPPLICABLE:
            self.verdict = FAIL if self.failures else PASS
        return self

    def as_dict(self) -> dict:
        return {
            "check_id": self.check_id,
            "params": self.params,
            "samples": self.samples,
            "passes": self.passes,
            "verdict": self.verdict,
            "failures": [{"x": p.x, "y": p.y, "detail": d} for p, d in self.failures],
            "metrics": self.metrics,
        }


@dataclass
class PeriodicCensus:
    max_period: int
    found: list
    starts_used: int
    not_converged: int = 0

    def orbits(self, fmap: MapFamily) -> list[list[tuple[Point2, int, float]]]:
        """Group found points into cycles by following each one under ``fmap``."""
        groups: list[list] = []
        used = [False] * len(self.found)
        for i, (p, per, _) in enumerate(self.found):
            if used[i]:
                continue
            cyc = [p]
            x, y = np.float64(p.x), np.float64(p.y)
            for _ in range(per - 1):
                x, y = fmap.step(x, y)
                cyc.append(Point2(float(x), float(y)))
            members = []
            for j, entry in enumerate(self.found):
                q = entry[0]
                if not used[j] and any(max(abs(q.x - c.x), abs(q.y - c.y)) <= 1e-6 for c in cyc):
                    used[j] = True
                    members.append(entry)
            groups.append(members)
        return groups

    @property
    def periods(self) -> list[int]:
        return sorted(per for _, per, _ in self.found)


# ---------------------------------------------------------------------------
# sampling helpers


def _sample_region(rng, pred: Callable, n: int, window=WINDOW, far=FAR_BAND) -> np.ndarray:
    """Rejection-sample ``n`` points: half in the window, half in the far band.

    If one of the two parts of the region is empty the other supplies all
    samples.
    """
    def draw(k, in_window):
        out = []
        got = 0
        for _ in range(400):
            m = max(4 * k, 2000)
            if in_window:
                x = rng.uniform(window[0], window[1], m)
                y = rng.uniform(window[2], window[3], m)
            else:
                x = rng.uniform(-far[1], far[1], m)
                y = rng.uniform(-far[1], far[1], m)
                band = np.maximum(np.abs(x), np.abs(y)) >= far[0]
                x, y = x[band], y[band]
            ok = pred(x, y)
            if ok.any():
                out.append(np.column_stack([x[ok], y[ok]]))
                got += int(ok.sum())
            if got >= k:
                break
        if not out:
            return np.empty((0, 2))
        return np.concatenate(out)[:k]

    half = n // 2
    a = draw(n - half, True)
    b = draw(half + (n - half - len(a)), False)
    if len(a) + len(b) < n:
        a = np.concatenate([a, draw(n - len(a) - len(b), True)])
    pts = np.concatenate([a, b])
    if len(pts) < n:
        raise RuntimeError("could not draw enough samples from the region")
    return pts[:n]


def _iterate_chain(step, x, y, steps, keep: Callable, grow: Callable, limit=1e12):
    """Follow orbits while ``keep`` holds and ``grow(prev, cur)`` is strictly increasing.

    Returns a boolean array: True when each orbit reached ``limit`` (or
    overflowed) with the chain intact within ``steps`` iterations.
    """
    ok = np.ones(x.shape, dtype=bool)
    done = np.zeros(x.shape, dtype=bool)
    prev = None
    with np.errstate(all="ignore"):
        for _ in range(steps):
            cur = grow(x, y)
            fin = np.isfinite(x) & np.isfinite(y)
            big = ~fin | (np.maximum(np.abs(x), np.abs(y)) > limit)
            newly = big & ~done
            done |= newly
            live = ~done
            ok &= ~live | keep(x, y)
            if prev is not None:
                ok &= ~live | (cur > prev)
            prev = cur
            if done.all():
                break
            x, y = step(x, y)
    return ok & done


def _henon_only(rep: CheckReport, fmap: MapFamily) -> bool:
    if not fmap.is_henon:
        rep.verdict = INAPPLICABLE
        rep.metrics["reason"] = "closed-form constants only exist for the quadratic family"
        return False
    return True


def _require(rep: CheckReport, cond: bool, reason: str) -> bool:
    if not cond:
        rep.verdict = INAPPLICABLE
        rep.metrics["reason"] = reason
    return cond


def _cached(fmap: MapFamily, key, build):
    store = fmap._cache.setdefault("verify", {})
    if key not in store:
        store[key] = build()
    return store[key]


def _stable_traces(fmap):
    return _cached(
        fmap,
        ("ws",),
        lambda: [trace_manifold(fmap, ManifoldKind.STABLE, b, 50.0) for b in (Branch.PLUS, Branch.MINUS)],
    )


def _unstable_traces(fmap):
    return _cached(
        fmap,
        ("wu",),
        lambda: [trace_manifold(fmap, ManifoldKind.UNSTABLE, b, 50.0) for b in (Branch.PLUS, Branch.MINUS)],
    )


def _budget(fmap):
    return OrbitBudget.default_for(fmap)


def _fates(fmap, pts, direction=Direction.FORWARD):
    k, _, _ = classify_many(fmap, pts[:, 0], pts[:, 1], _budget(fmap), direction)
    return k


def _label(code) -> str:
    return FateKind(int(code)).label


def _in_range(mu, lo=1.0, hi=3.0) -> bool:
    return lo < mu < hi


# ---------------------------------------------------------------------------
# individual checks


def _lemma4(fmap, n, rng, rep):
    if not _henon_only(rep, fmap):
        return
    d, mu = fmap.henon.delta, fmap.henon.mu
    if not _require(rep, _in_range(mu) and 0 < d < max(mu - 1.0, 1.0), "needs 1<mu<3 and 0<delta<max(mu-1,1)"):
        return
    pts = _sample_region(rng, lambda x, y: R.in_wdelta(x, y, d), n)
    ok = _iterate_chain(
        fmap.step_inverse, pts[:, 0].copy(), pts[:, 1].copy(), 200,
        keep=lambda x, y: R.in_wdelta(x, y, d), grow=lambda x, y: np.abs(y),
    )
    for p, good in zip(pts, ok):
        if good:
            rep.passes += 1
        else:
            rep.fail(p, "backward |y| chain not strictly increasing inside the wedge")


def _beta_chain_ok(fmap, x, y, steps=200):
    d, mu = fmap.henon.delta, fmap.henon.mu
    return _iterate_chain(
        fmap.step, x, y, steps,
        keep=lambda a, b: R.in_beta_cone(a, b, d, mu), grow=lambda a, b: -a,
    )


def _lemma5(fmap, n, rng, rep):
    if not _henon_only(rep, fmap):
        return
    d, mu = fmap.henon.delta, fmap.henon.mu
    if not _require(rep, _in_range(mu) and d > 0, "needs 1<mu<3 and delta>0"):
        return
    pts = _sample_region(rng, lambda x, y: R.in_beta_cone(x, y, d, mu), n)
    ok = _beta_chain_ok(fmap, pts[:, 0].copy(), pts[:, 1].copy())
    for p, good in zip(pts, ok):
        if good:
            rep.passes += 1
        else:
            rep.fail(p, "forward x not strictly decreasing inside the cone")


def _one_step_into_cone(fmap, pts, rep, what):
    d, mu = fmap.henon.delta, fmap.henon.mu
    x1, y1 = fmap.step(pts[:, 0], pts[:, 1])
    in_cone = R.in_beta_cone(x1, y1, d, mu)
    chain = _beta_chain_ok(fmap, x1.copy(), y1.copy())
    for p, c, ch in zip(pts, in_cone, chain):
        if c and ch:
            rep.passes += 1
        elif not c:
            rep.fail(p, f"first image of {what} point misses the escaping cone")
        else:
            rep.fail(p, "cone chain broken after entry")


def _lemma6(fmap, n, rng, rep):
    if not _henon_only(rep, fmap):
        return
    d, mu = fmap.henon.delta, fmap.henon.mu
    if not _require(rep, _in_range(mu) and 0 < d < math.sqrt(mu - 1.0), "needs 1<mu<3 and 0<delta<sqrt(mu-1)"):
        return
    pts = _sample_region(rng, lambda x, y: R.in_right_wedge(x, y, d), n)
    _one_step_into_cone(fmap, pts, rep, "right-wedge")


def _prop16i(fmap, n, rng, rep):
    if not _henon_only(rep, fmap):
        return
    d, mu = fmap.henon.delta, fmap.henon.mu
    if not _require(rep, _in_range(mu) and 0 < d < math.sqrt(3 * mu * (mu - 1.0)), "needs 1<mu<3 and 0<delta<sqrt(3mu(mu-1))"):
        return
    pts = _sample_region(rng, lambda x, y: R.in_q4_right_wedge(x, y), n)
    _one_step_into_cone(fmap, pts, rep, "fourth-quadrant wedge")


def _prop16ii(fmap, n, rng, rep):
    if not _henon_only(rep, fmap):
        return
    d, mu = fmap.henon.delta, fmap.henon.mu
    if not _require(rep, _in_range(mu) and 0 < d <= 1.0, "needs 1<mu<3 and 0<delta<=1"):
        return
    pts = _sample_region(rng, lambda x, y: R.in_q4_deep_strip(x, y, d, mu), n)
    _one_step_into_cone(fmap, pts, rep, "deep-strip")


def polydisk_radius(fmap: MapFamily, n: int = 1000, seed: int = 0, steps: int = 60):
    """Largest ``r`` in ``(0.4, 0.2, 0.1, 0.05)`` with sampled max-norm contraction around ``alpha``.

    The per-step ratio bound is ``gamma + delta`` with ``gamma = |2 - mu| +
    2 delta^2 + mu r``; the linearisation coefficient at ``alpha`` is
    ``2 - mu - 2 delta^2``.  Returns ``(r, gamma, worst_ratio)`` or ``None``.
    """
    d, mu = abs(fmap.henon.delta), fmap.henon.mu
    a = attracting_fixed_point(fmap)
    for r in (0.4, 0.2, 0.1, 0.05):
        gamma = abs(2.0 - mu) + 2.0 * d * d + mu * r
        bound = gamma + d
        if not bound < 1.0:
            continue
        rng = np.random.default_rng(seed)
        s = rng.uniform(-r, r, n)
        t = rng.uniform(-r, r, n)
        ok, worst = _contracts(fmap, a, s, t, bound, steps)
        if ok.all():
            return r, gamma, worst
    return None


def _contracts(fmap, a, s, t, bound, steps):
    x, y = a.x + s, a.y + t
    prev = np.maximum(np.abs(s), np.abs(t))
    ok = np.ones(s.shape, dtype=bool)
    worst = 0.0
    for _ in range(steps):
        x, y = fmap.step(x, y)
        cur = np.maximum(np.abs(x - a.x), np.abs(y - a.y))
        live = prev > 1e-14
        ratio = np.where(live, cur / np.where(live, prev, 1.0), 0.0)
        worst = max(worst, float(ratio.max(initial=0.0)))
        ok &= ~live | (cur <= bound * prev + 1e-15)
        prev = cur
    return ok, worst


def _prop7(fmap, n, rng, rep):
    if not _henon_only(rep, fmap):
        return
    d, mu = fmap.henon.delta, fmap.henon.mu
    if not _require(rep, _in_range(mu) and d > 0, "needs 1<mu<3 and delta>0"):
        return
    found = polydisk_radius(fmap, n, int(rng.integers(2**31)))
    if found is None:
        rep.fail((float("nan"), float("nan")), "no radius in (0.4, 0.2, 0.1, 0.05) gives a contraction")
        return
    r, gamma, worst = found
    rep.metrics.update({"r": r, "gamma": gamma, "ratio_bound": gamma + d, "worst_ratio": worst})
    a = attracting_fixed_point(fmap)
    s = rng.uniform(-r, r, n)
    t = rng.uniform(-r, r, n)
    ok, _ = _contracts(fmap, a, s, t, gamma + d, 60)
    fates = classify_many(fmap, a.x + s, a.y + t, _budget(fmap))[0]
    for si, ti, good, f in zip(s, t, ok, fates):
        p = (a.x + si, a.y + ti)
        if good and f == FateKind.TO_ALPHA:
            rep.passes += 1
        else:
            rep.fail(p, f"ratio bound violated or fate {_label(f)}")


def _cor8(fmap, n, rng, rep):
    if not _henon_only(rep, fmap):
        return
    d, mu = fmap.henon.delta, fmap.henon.mu
    if not _require(rep, _in_range(mu) and d > 0, "needs 1<mu<3 and delta>0"):
        return
    found = polydisk_radius(fmap, n, 0)
    if found is None:
        rep.fail((float("nan"), float("nan")), "no polydisk radius available")
        return
    r = found[0]
    h = 1.0
    x_mu = 1.0 - 1.0 / mu
    rep.metrics.update({"r": r, "h": h})
    pts = np.column_stack([rng.uniform(x_mu - r, x_mu + r, n), rng.uniform(-h, h, n)])
    for p, f in zip(pts, _fates(fmap, pts)):
        if f == FateKind.TO_ALPHA:
            rep.passes += 1
        else:
            rep.fail(p, f"fate {_label(f)}, expected ToAlpha")


def _prop9(fmap, n, rng, rep):
    d = fmap.delta
    if fmap.is_henon and not _require(rep, _in_range(fmap.henon.mu) and d > 0, "needs 1<mu<3 and delta>0"):
        return
    # bounded region: uniform samples, no far band
    pts = np.column_stack([rng.uniform(0.0, 1.0, n), rng.uniform(0.0, 2.0 * d, n)])
    x1, y1 = fmap.step(pts[:, 0], pts[:, 1])
    inv = R.in_adelta(x1, y1, d)
    for p, f, i in zip(pts, _fates(fmap, pts), inv):
        if f == FateKind.TO_ALPHA and i:
            rep.passes += 1
        else:
            rep.fail(p, f"fate {_label(f)}, image in region: {bool(i)}")


def _trichotomy_side(fmap, ybars, xs, xb, left_fate, right_fate, rep, slack=1e-9):
    fates = classify_many(fmap, xs, ybars, _budget(fmap))[0]
    for y, x, c, f in zip(ybars, xs, xb, fates):
        if abs(x - c) <= slack:
            rep.passes += 1
            continue
        want = left_fate if x < c else right_fate
        if f == want:
            rep.passes += 1
        else:
            rep.fail((x, y), f"fate {_label(f)}, expected {_label(want)} (crossing at {c:.12g})")


def _thm10(fmap, n, rng, rep):
    if not _henon_only(rep, fmap):
        return
    d, mu = fmap.henon.delta, fmap.henon.mu
    if not _require(rep, _in_range(mu) and d > 0, "needs 1<mu<3 and delta>0"):
        return
    beta = d / (mu - 1.0)
    ys = rng.uniform(0.0, 2.0 * d, n)
    ys[0] = 2.0 * d
    xb, _ = xbar_left_many(fmap, ys)
    bad = ~((-beta * ys < xb) & (xb < 0))
    for y, c, b in zip(ys, xb, bad):
        if b:
            rep.fail((c, y), "crossing outside (-beta*ybar, 0)")
    xs = rng.uniform(-2.0 * beta * ys, 0.0)
    _trichotomy_side(fmap, ys, xs, xb, FateKind.TO_INFINITY, FateKind.TO_ALPHA, rep)
    rep.metrics["xbar_at_2delta"] = float(xb[0])


def _thm12(fmap, n, rng, rep):
    d = fmap.delta
    if fmap.is_henon and not _require(rep, _in_range(fmap.henon.mu) and d > 0, "needs 1<mu<3 and delta>0"):
        return
    ys = rng.uniform(0.0, 2.0 * d, n)
    ys[0] = 0.0
    xb, _ = xbar_right_many(fmap, ys)
    for y, c in zip(ys, xb):
        if not 1.0 < c < 2.0:
            rep.fail((c, y), "crossing outside (1, 2)")
    xs = rng.uniform(1.0, 2.0, n)
    _trichotomy_side(fmap, ys, xs, xb, FateKind.TO_ALPHA, FateKind.TO_INFINITY, rep)
    rep.metrics["xbar_at_0"] = float(xb[0])


def _predict_upper_strip(fmap, pts):
    """Predicted fate for points with ``0 < y < 2 delta`` from the two crossing curves."""
    x, y = pts[:, 0], pts[:, 1]
    pred = np.full(len(pts), FateKind.TO_INFINITY, dtype=np.int8)
    xl, _ = xbar_left_many(fmap, y)
    xr, _ = xbar_right_many(fmap, y)
    pred[(x > xl) & (x <= 1.0)] = FateKind.TO_ALPHA
    pred[(x > 1.0) & (x < xr)] = FateKind.TO_ALPHA
    near = (np.abs(x - xl) <= 1e-9) | (np.abs(x - xr) <= 1e-9)
    return pred, near


def _prop13(fmap, n, rng, rep):
    if not _henon_only(rep, fmap):
        return
    d, mu = fmap.henon.delta, fmap.henon.mu
    if not _require(rep, _in_range(mu) and d > 0, "needs 1<mu<3 and delta>0"):
        return
    pts = _sample_region(rng, lambda x, y: R.in_strip(x, y, d), n)
    pred, near = _predict_upper_strip(fmap, pts)
    for p, f, w, nr in zip(pts, _fates(fmap, pts), pred, near):
        if f == FateKind.UNDECIDED and not nr:
            rep.fail(p, "undecided")
        elif f == w or nr:
            rep.passes += 1
        else:
            rep.fail(p, f"fate {_label(f)}, expected {_label(w)}")


def _c_polygon(fmap):
    def build():
        C = curve_C(fmap, 20000)
        return C, shapely.Polygon(C.points)

    return _cached(fmap, ("curveC",), build)


def _predict_lower(fmap, pts):
    """Predicted forward fates below the x-axis; second array flags points too close to the curve C."""
    C, poly = _c_polygon(fmap)
    xq = C.points[0, 0]
    x, y = pts[:, 0], pts[:, 1]
    pred = np.full(len(pts), FateKind.TO_INFINITY, dtype=np.int8)
    above = shapely.contains_xy(poly, x, y)
    strip = (x > 0) & (x < xq)
    pred[strip & above] = FateKind.TO_ALPHA
    line = shapely.LineString(C.points)
    dist = shapely.distance(shapely.points(x, y), line)
    near = (dist <= 1e-5) | (np.abs(x - xq) <= 1e-9)
    return pred, near


def _lemma17(fmap, n, rng, rep):
    if not _henon_only(rep, fmap):
        return
    d, mu = fmap.henon.delta, fmap.henon.mu
    if not _require(rep, _in_range(mu) and d > 0, "needs 1<mu<3 and delta>0"):
        return
    C, _ = _c_polygon(fmap)
    xq = C.points[0, 0]
    ylow = float(C.points[:, 1].min()) - 1.0
    interior = C.points[1:-1, 1]
    if not (interior < 0).all():
        rep.fail(tuple(C.points[1 + int(np.argmax(interior))]), "curve C rises above the x-axis")
    rep.metrics.update({"xbar": float(xq), "curve_min_y": float(C.points[:, 1].min())})
    pts = np.column_stack([rng.uniform(0.0, xq, n), rng.uniform(ylow, 0.0, n)])
    pts = pts[(pts[:, 0] > 0) & (pts[:, 1] < 0)]
    pred, near = _predict_lower(fmap, pts)
    for p, f, w, nr in zip(pts, _fates(fmap, pts), pred, near):
        if f == w or nr:
            rep.passes += 1
        else:
            rep.fail(p, f"fate {_label(f)}, expected {_label(w)}")


def _prop18(fmap, n, rng, rep):
    if not _henon_only(rep, fmap):
        return
    d, mu = fmap.henon.delta, fmap.henon.mu
    if not _require(rep, _in_range(mu) and d > 0, "needs 1<mu<3 and delta>0"):
        return
    pts = _sample_region(rng, lambda x, y: y < 0, n)
    pred, near = _predict_lower(fmap, pts)
    for p, f, w, nr in zip(pts, _fates(fmap, pts), pred, near):
        if f == FateKind.UNDECIDED and not nr:
            rep.fail(p, "undecided")
        elif f == w or nr:
            rep.passes += 1
        else:
            rep.fail(p, f"fate {_label(f)}, expected {_label(w)}")


def _lemma19_periodic(fmap, n, rng, rep):
    if fmap.is_henon and not _require(rep, _in_range(fmap.henon.mu) and fmap.delta > 0, "needs 1<mu<3 and delta>0"):
        return
    cells = max(2, int(math.ceil(math.sqrt(n / 4.0))))
    box = GridSpec(-2.0, 3.0, -2.0, 2.0, cells, cells)
    census = find_periodic_points(fmap, 6, box, 4, int(rng.integers(2**31)))
    a = attracting_fixed_point(fmap)
    rep.metrics.update({"starts": census.starts_used, "found": len(census.found), "not_converged": census.not_converged})
    expect = [(0.0, 0.0), (a.x, a.y)]
    for p, per, res in census.found:
        if per != 1 or min(max(abs(p.x - ex), abs(p.y - ey)) for ex, ey in expect) > 1e-8:
            rep.fail(p, f"unexpected periodic point of period {per}")
    for ex, ey in expect:
        if not any(max(abs(p.x - ex), abs(p.y - ey)) <= 1e-8 for p, _, _ in census.found):
            rep.fail((ex, ey), "fixed point missing from the census")
    rep.passes = census.starts_used if not rep.failures else census.starts_used - len(rep.failures)


def _sample_trace(curves, n, rng, min_norm=0.0):
    pts = np.concatenate([c.points for c in curves])
    pts = pts[np.maximum(np.abs(pts[:, 0]), np.abs(pts[:, 1])) > min_norm]
    idx = rng.choice(len(pts), size=min(n, len(pts)), replace=len(pts) < n)
    return pts[idx]


def _normals(curves):
    out_p, out_n = [], []
    for c in curves:
        p = c.points
        t = np.gradient(p, axis=0)
        for s in c.piece_starts[1:]:
            t[s - 1] = p[s - 1] - p[s - 2] if s >= 2 else t[s - 1]
            t[s] = p[min(s + 1, len(p) - 1)] - p[s]
        nrm = np.column_stack([-t[:, 1], t[:, 0]])
        nrm /= np.maximum(np.hypot(nrm[:, 0], nrm[:, 1]), 1e-300)[:, None]
        out_p.append(p)
        out_n.append(nrm)
    return np.concatenate(out_p), np.concatenate(out_n)


def _lemma19_boundary(fmap, n, rng, rep):
    if fmap.is_henon and not _require(rep, _in_range(fmap.henon.mu) and fmap.delta > 0, "needs 1<mu<3 and delta>0"):
        return
    curves = _stable_traces(fmap)
    P, N = _normals(curves)
    keep = np.maximum(np.abs(P[:, 0]), np.abs(P[:, 1])) > 1e-3
    P, N = P[keep], N[keep]
    idx = rng.choice(len(P), size=n, replace=len(P) < n)
    P, N = P[idx], N[idx]
    eps = 1e-7
    f0 = _fates(fmap, P).astype(np.int64)
    fp = _fates(fmap, P + eps * N)
    fm = _fates(fmap, P - eps * N)
    want = {int(FateKind.TO_ALPHA), int(FateKind.TO_INFINITY)}
    # the orbit of a traced point itself is not informative: its 1e-12 error
    # is doubled by the saddle each step, so only the two sides are tested
    for p, b, c in zip(P, fp, fm):
        if {int(b), int(c)} == want:
            rep.passes += 1
        else:
            rep.fail(p, f"sides {_label(b)}/{_label(c)}")
    on = np.bincount(f0, minlength=4)
    rep.metrics["normal_offset"] = eps
    rep.metrics["on_curve_fates"] = {FateKind(k).label: int(on[k]) for k in range(4)}


def _lemma19_backward(fmap, n, rng, rep):
    if fmap.is_henon and not _require(rep, _in_range(fmap.henon.mu) and fmap.delta > 0, "needs 1<mu<3 and delta>0"):
        return
    pts = _sample_trace(_stable_traces(fmap), n, rng, min_norm=1e-6)
    for p, f in zip(pts, _fates(fmap, pts, Direction.BACKWARD)):
        if f == FateKind.TO_INFINITY:
            rep.passes += 1
        else:
            rep.fail(p, f"backward fate {_label(f)}")


def _lemma21(fmap, n, rng, rep):
    if not _henon_only(rep, fmap):
        return
    d, mu = fmap.henon.delta, fmap.henon.mu
    if not _require(rep, _in_range(mu) and d > 0, "needs 1<mu<3 and delta>0"):
        return
    plus, minus = _unstable_traces(fmap)
    a = attracting_fixed_point(fmap)
    # which unstable branch meets the bounded set: decided by forward fates
    third = n // 3
    fates = {}
    for name, c in (("Plus", plus), ("Minus", minus)):
        pts = _sample_trace([c], third, rng, min_norm=1e-6)
        fates[name] = (pts, _fates(fmap, pts))
    conv = {k: np.isin(v[1], (FateKind.TO_ALPHA, FateKind.TO_ORIGIN)).mean() for k, v in fates.items()}
    k_side = max(conv, key=conv.get)
    other = "Minus" if k_side == "Plus" else "Plus"
    rep.metrics["k_side_branch"] = k_side
    for p, f in zip(*fates[k_side]):
        if f in (FateKind.TO_ALPHA, FateKind.TO_ORIGIN):
            rep.passes += 1
        else:
            rep.fail(p, f"point on the bounded unstable branch has forward fate {_label(f)}")
    for p, f in zip(*fates[other]):
        if f == FateKind.TO_INFINITY:
            rep.passes += 1
        else:
            rep.fail(p, f"point on the other unstable branch has forward fate {_label(f)}")
    # away from the bounded branch and the fixed points, some direction escapes
    k_curve = plus if k_side == "Plus" else minus
    m = n - 2 * third
    x = rng.uniform(WINDOW[0], WINDOW[1], 4 * m)
    y = rng.uniform(WINDOW[2], WINDOW[3], 4 * m)
    pts = np.column_stack([x, y])
    dist = point_segment_distances(pts, [k_curve, np.array([[0.0, 0.0]]), np.array([[a.x, a.y]])])
    pts = pts[dist > 1e-4][:m]
    ff = _fates(fmap, pts)
    fb = _fates(fmap, pts, Direction.BACKWARD)
    for p, f, b in zip(pts, ff, fb):
        if f == FateKind.TO_INFINITY or b == FateKind.TO_INFINITY:
            rep.passes += 1
        else:
            rep.fail(p, f"bounded-looking point off the unstable branch (forward {_label(f)}, backward {_label(b)})")


def _conjugacy(fmap, n, rng, rep):
    if not _henon_only(rep, fmap):
        return
    other = fmap.flipped()
    x = rng.uniform(-10, 10, n)
    y = rng.uniform(-10, 10, n)
    ax, ay = fmap.step(x, y)
    lhs = np.column_stack([ax, -ay])
    bx, by = other.step(x, -y)
    rhs = np.column_stack([bx, by])
    dev = np.max(np.abs(lhs - rhs), axis=1)
    rep.metrics["max_deviation"] = float(dev.max())
    for p, e in zip(np.column_stack([x, y]), dev):
        if e < 1e-12:
            rep.passes += 1
        else:
            rep.fail(p, f"deviation {e:.3g}")


def _param_samples(rng, n, d_lo, d_hi, mu_lo, mu_hi):
    d = rng.uniform(d_lo, d_hi, n)
    d[d == 0] = 1e-3
    return d, rng.uniform(mu_lo, mu_hi, n)


def _flip_saddle(fmap, n, rng, rep):
    if not _henon_only(rep, fmap):
        return
    d0, mu0 = fmap.henon.delta, fmap.henon.mu
    if not _require(rep, mu0 > 1.0 and d0 != 0, "needs mu>1 and delta != 0"):
        return
    lm, lp = eigenvalues_at(fmap, (0.0, 0.0))
    own = classify_stability(lm, lp)
    rep.metrics["origin_stability"] = own.value
    if (own is Stability.FLIP_SADDLE) != (d0 * d0 < 1 + mu0):
        rep.fail((0.0, 0.0), f"origin is {own.value} at the given parameters")
    ds, mus = _param_samples(rng, n - 1, -3.0, 3.0, 1.0 + 1e-9, 3.0)
    for d, mu in zip(ds, mus):
        if abs(d * d - (1 + mu)) < 1e-9:
            rep.passes += 1
            continue
        st = classify_stability(*eigenvalues_at(make_henon(d, mu), (0.0, 0.0)))
        if (st is Stability.FLIP_SADDLE) == (d * d < 1 + mu):
            rep.passes += 1
        else:
            rep.fail((d, mu), f"stability {st.value} disagrees with delta^2 < 1 + mu")
    if not rep.failures:
        rep.passes += 1


def _eigen_signs(fmap, n, rng, rep):
    if not _henon_only(rep, fmap):
        return
    xs = rng.uniform(-10, 10, n)
    worst = 0.0
    for x in xs:
        lm, lp = eigenvalues_at(fmap, (x, 0.0))
        ref = np.sort(np.linalg.eigvals(jacobian(fmap, (x, 0.0))).real)
        err = max(abs(lm - ref[0]), abs(lp - ref[1])) / max(1.0, abs(ref).max())
        worst = max(worst, err)
        if lm < 0 < lp and err < 1e-9:
            rep.passes += 1
        else:
            rep.fail((x, 0.0), f"eigenvalues ({lm:.6g}, {lp:.6g}) vs solver {ref}")
    rep.metrics["max_solver_mismatch"] = float(worst)


def _origin_thresholds(fmap, n, rng, rep):
    if not _henon_only(rep, fmap):
        return
    ds, mus = _param_samples(rng, n, -2.0, 2.0, 0.05, 4.0)
    for d, mu in zip(ds, mus):
        lm, lp = eigenvalues_at(make_henon(d, mu), (0.0, 0.0))
        ok = True
        if abs(d * d - (1 - mu)) > 1e-9:
            ok &= (lp > 1) == (d * d > 1 - mu)
        if abs(d * d - (1 + mu)) > 1e-9:
            ok &= (lm > -1) == (d * d < 1 + mu)
        if ok:
            rep.passes += 1
        else:
            rep.fail((d, mu), f"eigenvalues ({lm:.6g}, {lp:.6g}) disagree with the closed-form thresholds")


def _alpha_threshold(fmap, n, rng, rep):
    if not _henon_only(rep, fmap):
        return
    ds, mus = _param_samples(rng, n, 0.0, 1.2, 1.0 + 1e-9, 3.0)
    for d, mu in zip(ds, mus):
        m = make_henon(d, mu)
        lm, lp = eigenvalues_at(m, attracting_fixed_point(m))
        if abs(mu - 3 * (1 - d * d)) < 1e-9:
            rep.passes += 1
            continue
        if (max(abs(lm), abs(lp)) < 1) == (mu < 3 * (1 - d * d)):
            rep.passes += 1
        else:
            rep.fail((d, mu), f"alpha eigenvalues ({lm:.6g}, {lp:.6g}) disagree with mu < 3(1-delta^2)")


def _roundtrip(fmap, n, rng, rep):
    x = rng.uniform(-10, 10, n)
    y = rng.uniform(-10, 10, n)
    with np.errstate(all="ignore"):
        u, v = fmap.step(x, y)
        bx, by = fmap.step_inverse(u, v)
    err = np.maximum(np.abs(bx - x), np.abs(by - y)) / np.maximum(1.0, np.maximum(np.abs(x), np.abs(y)))
    rep.metrics["max_relative_error"] = float(np.nanmax(err))
    for p, e in zip(np.column_stack([x, y]), err):
        if e < 1e-9:
            rep.passes += 1
        else:
            rep.fail(p, f"round-trip error {e:.3g}")


def _jacobian_fd(fmap, n, rng, rep):
    x = rng.uniform(-3, 3, n)
    y = rng.uniform(-3, 3, n)
    h = 1e-6
    a, b, c, d = fmap.jacobian_entries(x, y)
    fx1, fy1 = fmap.step(x + h, y)
    fx0, fy0 = fmap.step(x - h, y)
    gx1, gy1 = fmap.step(x, y + h)
    gx0, gy0 = fmap.step(x, y - h)
    fd = [(fx1 - fx0) / (2 * h), (gx1 - gx0) / (2 * h), (fy1 - fy0) / (2 * h), (gy1 - gy0) / (2 * h)]
    an = np.broadcast_arrays(a, b, c, d)
    err = np.max(np.abs(np.array(an) - np.array(fd)), axis=0)
    rep.metrics["max_error"] = float(err.max())
    for p, e in zip(np.column_stack([x, y]), err):
        if e < 1e-5:
            rep.passes += 1
        else:
            rep.fail(p, f"finite-difference mismatch {e:.3g}")


@dataclass(frozen=True)
class _Entry:
    fn: Callable
    label: str


CATALOG: dict[str, _Entry] = {
    "lemma4_wdelta_backward_escape": _Entry(_lemma4, "wedge |y|>=2delta, |y|>=delta|x| escapes backward"),
    "lemma5_beta_cone": _Entry(_lemma5, "cone x <= min(-beta*y, 0) escapes forward"),
    "lemma6_right_wedge": _Entry(_lemma6, "right wedge x>=2, 0<=y<=delta*x escapes forward"),
    "prop7_polydisk": _Entry(_prop7, "square around alpha contracts in the max-norm"),
    "cor8_strip": _Entry(_cor8, "vertical strip around the 1-D fixed point lies in the basin"),
    "prop9_adelta": _Entry(_prop9, "unit rectangle 0<=x<=1, 0<=y<=2delta lies in the basin"),
    "thm10_left_crossing": _Entry(_thm10, "stable manifold splits the upper strip left of the origin"),
    "thm12_right_crossing": _Entry(_thm12, "stable manifold preimage splits the strip over [1, 2]"),
    "prop13_strip_trichotomy": _Entry(_prop13, "every point of the upper strip has a decided forward fate"),
    "prop16i_q4_right_wedge": _Entry(_prop16i, "fourth-quadrant wedge x>=2, y<=0 escapes forward"),
    "prop16ii_q4_deep_strip": _Entry(_prop16ii, "deep strip 0<=x<=2, y<=-delta0 escapes forward"),
    "lemma17_curve_c": _Entry(_lemma17, "curve C splits the fourth quadrant into basin and escape"),
    "prop18_lower_half_trichotomy": _Entry(_prop18, "every point of the lower half plane has a decided forward fate"),
    "lemma19_periodic_points": _Entry(_lemma19_periodic, "only periodic points are the two fixed points"),
    "lemma19_basin_boundary": _Entry(_lemma19_boundary, "stable manifold of the saddle bounds the basin"),
    "lemma19_stable_backward_escape": _Entry(_lemma19_backward, "stable manifold minus the origin escapes backward"),
    "lemma21_filled_julia": _Entry(_lemma21, "bounded set is the fixed points plus one unstable branch"),
    "conjugacy_flip": _Entry(_conjugacy, "reflection y -> -y conjugates delta to -delta"),
    "flip_saddle": _Entry(_flip_saddle, "origin is a flip saddle iff delta^2 < 1 + mu"),
    "eigen_signs": _Entry(_eigen_signs, "Jacobian eigenvalues have opposite signs"),
    "origin_thresholds": _Entry(_origin_thresholds, "origin eigenvalue thresholds in delta^2 and mu"),
    "alpha_attracting_threshold": _Entry(_alpha_threshold, "alpha attracting iff mu < 3(1 - delta^2)"),
    "inverse_roundtrip": _Entry(_roundtrip, "inverse undoes the map to 1e-9"),
    "jacobian_finite_difference": _Entry(_jacobian_fd, "Jacobian agrees with central differences"),
}


def catalog_ids() -> list[str]:
    return list(CATALOG)


def run_check(check_id: str, fmap: MapFamily, samples: int = 1000, seed: int = 7) -> CheckReport:
    """Run one catalog check; unknown ids raise ``KeyError``."""
    if check_id not in CATALOG:
        raise KeyError(f"unknown check id {check_id!r}")
    if samples < 1:
        raise ValueError("samples must be positive")
    rep = CheckReport(check_id, fmap.describe(), samples)
    rng = np.random.default_rng(seed)
    t0 = time.perf_counter()
    try:
        CATALOG[check_id].fn(fmap, samples, rng, rep)
    except (CrossingError, TraceError, NotASaddleError) as exc:
        # the structure the check relies on is absent at these parameters
        rep.fail((math.nan, math.nan), f"{type(exc).__name__}: {exc}")
    rep.seconds = time.perf_counter() - t0
    return rep.finish()


def run_checks(ids, fmap: MapFamily, samples: int = 1000, seed: int = 7) -> list[CheckReport]:
    if ids in ("all", None):
        ids = catalog_ids()
    return [run_check(i, fmap, samples, seed) for i in ids]


def reports_to_json(reports) -> str:
    return json.dumps([r.as_dict() for r in reports], indent=2) + "\n"


# ---------------------------------------------------------------------------
# periodic points


def _power_residual(fmap, x, y, n):
    px, py = x, y
    with np.errstate(all="ignore"):
        for _ in range(n):
            px, py = fmap.step(px, py)
    return np.maximum(np.abs(px - x), np.abs(py - y))


def find_periodic_points(
    fmap: MapFamily,
    max_period: int,
    box: GridSpec,
    starts_per_cell: int = 4,
    seed: int = 7,
) -> PeriodicCensus:
    """Periodic points of period up to ``max_period`` found by damped Newton.

    Starts are drawn uniformly inside every cell of ``box``.  Roots with
    residual below 1e-9 are merged within 1e-6 and labelled with their
    minimal period.  ``not_converged`` counts Newton runs that ended without
    a root (informational).
    """
    if max_period < 1:
        raise ValueError("max_period must be at least 1")
    rng = np.random.default_rng(seed)
    ci, cj = np.meshgrid(np.arange(box.nx), np.arange(box.ny), indexing="ij")
    ci = np.repeat(ci.ravel(), starts_per_cell)
    cj = np.repeat(cj.ravel(), starts_per_cell)
    x0 = box.x_min + (ci + rng.random(ci.size)) * box.dx
    y0 = box.y_min + (cj + rng.random(cj.size)) * box.dy
    found: list[tuple[Point2, int, float]] = []
    failed = 0
    for n in range(1, max_period + 1):
        x, y, res = newton_periodic(fmap, n, x0, y0)
        good = res < 1e-9
        failed += int((~good).sum())
        for px, py in zip(x[good], y[good]):
            if any(max(abs(px - q.x), abs(py - q.y)) <= 1e-6 for q, _, _ in found):
                continue
            per = n
            for d in range(1, n):
                if n % d == 0 and _power_residual(fmap, px, py, d) < 1e-9:
                    per = d
                    break
            r = float(_power_residual(fmap, px, py, per))
            found.append((Point2(float(px), float(py)), per, r))
    found.sort(key=lambda t: (t[1], t[0].x, t[0].y))
    return PeriodicCensus(max_period, found, int(x0.size) * max_period, failed)


# ---------------------------------------------------------------------------
# hypotheses of the general family


def check_general_hypotheses(
    g: ScalarMap,
    h: ScalarMap,
    delta: float,
    interval=(-10.0, 10.0),
    samples: int = 20001,
) -> CheckReport:
    """Sampled check of the standing assumptions on ``g`` and ``h``.

    Failed hypotheses are listed in ``failures`` with the offending sample.
    """
    a, b = float(interval[0]), float(interval[1])
    if a > -1.0 or b < 2.0:
        raise ValueError("interval must contain [-1, 2]")
    rep = CheckReport("general_hypotheses", {"g": g.name, "h": h.name, "delta": delta, "interval": [a, b]}, samples)
    tests: list[tuple[str, bool, tuple]] = []

    def val(f, x):
        return float(np.asarray(f(np.float64(x))))

    tests.append(("g(0)=0", abs(val(g.f, 0.0)) <= 1e-12, (0.0, val(g.f, 0.0))))
    tests.append(("g(1)=0", abs(val(g.f, 1.0)) <= 1e-12, (1.0, val(g.f, 1.0))))
    unit = np.linspace(0.0, 1.0, samples)
    gu = g.f(unit)
    tests.append(("g([0,1]) in [0,1)", bool(gu.min() >= -1e-15 and gu.max() < 1.0), (float(unit[np.argmax(gu)]), float(gu.max()))))
    tests.append(("g'(0)>1", val(g.df, 0.0) > 1.0, (0.0, val(g.df, 0.0))))
    tests.append(("g'(1)<-1", val(g.df, 1.0) < -1.0, (1.0, val(g.df, 1.0))))
    xs = np.linspace(a, b, samples)
    outer = xs[(xs <= 0.0) | (xs >= 1.0)]
    g2 = np.broadcast_to(g.d2f(outer), outer.shape)
    g2_sup = float(g2.max())
    tests.append(("g''<gamma<0 off (0,1)", g2_sup < 0.0, (float(outer[np.argmax(g2)]), g2_sup)))
    dg = g.df(unit)
    changes = int(np.count_nonzero(np.diff(np.sign(dg[dg != 0])) != 0))
    tests.append(("g unimodal on [0,1]", changes == 1, (0.5, float(changes))))
    xg = 0.5
    with np.errstate(all="ignore"):
        for _ in range(10_000):
            xg = val(g.f, xg)
    attracting = 0.0 < xg < 1.0 and abs(val(g.df, xg)) < 1.0 and abs(val(g.f, xg) - xg) < 1e-12
    tests.append(("attracting fixed point in (0,1)", attracting, (xg, val(g.df, xg))))
    starts = np.linspace(0.0, 1.0, 402)[1:-1]
    z = starts.copy()
    with np.errstate(all="ignore"):
        for _ in range(10_000):
            z = g.f(z)
    basin_ok = bool(np.all(np.abs(z - xg) < 1e-9))
    worst = float(starts[np.argmax(np.abs(z - xg))])
    tests.append(("(0,1) in basin of the fixed point", basin_ok, (worst, float(np.max(np.abs(z - xg))))))
    tests.append(("h(0)=0", abs(val(h.f, 0.0)) <= 1e-12, (0.0, val(h.f, 0.0))))
    hp = h.df(xs)
    tests.append(("h'>0", bool(np.all(hp > 0)), (float(xs[np.argmin(hp)]), float(hp.min()))))
    eps = c2_distance_to_linear(h, delta, (a, b), samples)
    tests.append(("||h - delta x||_2 < delta/2", eps < delta / 2.0, (0.0, eps)))
    probe = np.linspace(a, b, 101)
    for name, sm in (("g", g), ("h", h)):
        err = sm.consistency_error(probe)
        tests.append((f"{name} derivatives consistent", err < 1e-5, (0.0, err)))
    for name, ok, where in tests:
        if ok:
            rep.passes += 1
        else:
            rep.fail(where, name)
    rep.samples = len(tests)
    rep.metrics.update({"c2_distance": eps, "g2_sup": g2_sup, "x_g": xg, "interval_estimate": True})
    return rep.finish()
