"""Orbit iteration and fate classification.

A fate is one of: converges to the origin, converges to the attracting fixed
point ``alpha``, escapes to infinity, or undecided within the budget.  Escape
is certified by closed-form escape regions whenever their hypotheses hold for
the current parameters (the region is then recorded as a witness), and
otherwise by a max-norm threshold.

The batch routine :func:`classify_many` is the workhorse; the scalar
functions wrap it.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from enum import Enum, IntEnum
from typing import Callable

import numpy as np

from .maps import MapFamily, Point2, as_point, attracting_fixed_point
from .regions import (
    RegionTag,
    in_beta_cone,
    in_q4_deep_strip,
    in_q4_right_wedge,
    in_right_wedge,
    in_wdelta,
)

__all__ = [
    "FateKind",
    "Fate",
    "Direction",
    "OrbitBudget",
    "Trajectory",
    "Membership",
    "iterate",
    "classify_many",
    "classify_forward",
    "classify_backward",
    "in_filled_julia",
    "certified_regions",
]


class FateKind(IntEnum):
    UNDECIDED = 0
    TO_ORIGIN = 1
    TO_ALPHA = 2
    TO_INFINITY = 3

    @property
    def label(self) -> str:
        return _LABELS[self]


_LABELS = {
    FateKind.UNDECIDED: "Undecided",
    FateKind.TO_ORIGIN: "ToOrigin",
    FateKind.TO_ALPHA: "ToAlpha",
    FateKind.TO_INFINITY: "ToInfinity",
}


class Direction(Enum):
    FORWARD = "Forward"
    BACKWARD = "Backward"


class Membership(Enum):
    YES = "Yes"
    NO = "No"
    UNDECIDED = "Undecided"


@dataclass(frozen=True)
class Fate:
    kind: FateKind
    iterations_used: int
    witness: RegionTag | None = None

    def __str__(self) -> str:
        w = self.witness.value if self.witness is not None else "none"
        return f"fate={self.kind.label} iters={self.iterations_used} witness={w}"


@dataclass(frozen=True)
class OrbitBudget:
    max_iter: int = 10_000
    escape_norm: float = 10.0
    attract_tol: float = 1e-9
    confirm_steps: int = 5

    def __post_init__(self):
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if not self.escape_norm > 0:
            raise ValueError("escape_norm must be positive")
        if not self.attract_tol > 0:
            raise ValueError("attract_tol must be positive")
        if self.confirm_steps < 1:
            raise ValueError("confirm_steps must be at least 1")

    @classmethod
    def default_for(cls, fmap: MapFamily, **overrides) -> "OrbitBudget":
        """Default budget with ``escape_norm = max(10, 3/|delta|)``."""
        overrides.setdefault("escape_norm", max(10.0, 3.0 / abs(fmap.delta)))
        return cls(**overrides)


@dataclass(frozen=True)
class Trajectory:
    points: tuple[Point2, ...]
    direction: Direction
    blowup: bool = False

    def __len__(self) -> int:
        return len(self.points)

    def as_array(self) -> np.ndarray:
        return np.array(self.points, dtype=float).reshape(-1, 2)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "x", "y"])
        for n, (x, y) in enumerate(self.points):
            w.writerow([n, f"{x:.17g}", f"{y:.17g}"])
        return buf.getvalue()


def _direction(direction) -> Direction:
    if isinstance(direction, Direction):
        return direction
    return Direction(str(direction).capitalize())


def iterate(fmap: MapFamily, p, n: int, direction=Direction.FORWARD) -> Trajectory:
    """The first ``n`` images (or preimages) of ``p``, including ``p`` itself.

    Stops early and sets ``blowup`` if an iterate is not finite.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    d = _direction(direction)
    step = fmap.step if d is Direction.FORWARD else fmap.step_inverse
    x, y = as_point(p)
    pts = [Point2(x, y)]
    blowup = False
    with np.errstate(all="ignore"):
        for _ in range(n):
            u, v = step(np.float64(x), np.float64(y))
            if not (np.isfinite(u) and np.isfinite(v)):
                blowup = True
                break
            x, y = float(u), float(v)
            pts.append(Point2(x, y))
    return Trajectory(tuple(pts), d, blowup)


def certified_regions(fmap: MapFamily, direction) -> list[tuple[RegionTag, Callable]]:
    """Escape regions whose hypotheses hold for this map, in checking order.

    Only the Hénon family has closed-form escape regions.  Each region is
    included only when the parameters satisfy the conditions under which its
    escape argument goes through.
    """
    if not fmap.is_henon:
        return []
    d, mu = fmap.henon.delta, fmap.henon.mu
    out: list[tuple[RegionTag, Callable]] = []
    if _direction(direction) is Direction.BACKWARD:
        if 0 < d < max(mu - 1.0, 1.0) and d * d < mu - 1.0:
            out.append((RegionTag.W_DELTA, lambda x, y: in_wdelta(x, y, d)))
        return out
    if d <= 0 or mu <= 1.0:
        return out
    if d < math.sqrt(mu - 1.0):
        out.append((RegionTag.RIGHT_WEDGE, lambda x, y: in_right_wedge(x, y, d)))
    if d < min(math.sqrt(3.0 * mu * (mu - 1.0)), math.sqrt(mu * (mu - 1.0))):
        out.append((RegionTag.Q4_RIGHT_WEDGE, lambda x, y: in_q4_right_wedge(x, y)))
    if d <= 1.0:
        out.append((RegionTag.Q4_DEEP_STRIP, lambda x, y: in_q4_deep_strip(x, y, d, mu)))
    if mu < 3.0:
        out.append((RegionTag.BETA_CONE, lambda x, y: in_beta_cone(x, y, d, mu)))
    return out


_WITNESS_ORDER = list(RegionTag)


def classify_many(
    fmap: MapFamily,
    xs,
    ys,
    budget: OrbitBudget | None = None,
    direction=Direction.FORWARD,
    use_regions: bool = True,
):
    """Classify a batch of starting points.

    Returns ``(kind, iters, witness)`` arrays shaped like ``xs``: ``kind``
    holds :class:`FateKind` codes (int8), ``iters`` the iteration count at
    which the fate was decided, and ``witness`` an index into
    ``list(RegionTag)`` or ``-1``.

    Convergence needs ``confirm_steps`` consecutive iterates within
    ``attract_tol`` of the fixed point; ``iters`` is the index of the first
    iterate of that run.  The norm test is skipped at the starting point
    itself so that far-away starts get at least one step.  Region
    certificates are ignored within ``attract_tol`` of the origin.
    """
    budget = budget or OrbitBudget.default_for(fmap)
    d = _direction(direction)
    step = fmap.step if d is Direction.FORWARD else fmap.step_inverse
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    shape = np.broadcast_shapes(xs.shape, ys.shape)
    x = np.broadcast_to(xs, shape).ravel().copy()
    y = np.broadcast_to(ys, shape).ravel().copy()
    n_pts = x.size
    kind = np.zeros(n_pts, dtype=np.int8)
    iters = np.zeros(n_pts, dtype=np.int64)
    witness = np.full(n_pts, -1, dtype=np.int8)
    if n_pts == 0:
        return kind.reshape(shape), iters.reshape(shape), witness.reshape(shape)

    alpha = attracting_fixed_point(fmap)
    regions = certified_regions(fmap, d) if use_regions else []
    region_codes = [_WITNESS_ORDER.index(tag) for tag, _ in regions]
    tol, need, R = budget.attract_tol, budget.confirm_steps, budget.escape_norm

    idx = np.arange(n_pts)
    run_o = np.zeros(n_pts, dtype=np.int64)
    run_a = np.zeros(n_pts, dtype=np.int64)

    with np.errstate(all="ignore"):
        for n in range(budget.max_iter + 1):
            decided = np.zeros(idx.size, dtype=bool)
            # escape
            bad = ~(np.isfinite(x) & np.isfinite(y))
            if n > 0:
                bad |= np.maximum(np.abs(x), np.abs(y)) > R
            if bad.any():
                kind[idx[bad]] = FateKind.TO_INFINITY
                iters[idx[bad]] = n
                decided |= bad
            # certificates are not trusted inside the tolerance ball around
            # the saddle, where stable-manifold orbits and escaping ones are
            # indistinguishable in floating point
            near_o = np.maximum(np.abs(x), np.abs(y)) <= tol
            for code, (_, pred) in zip(region_codes, regions):
                hit = ~decided & ~near_o & pred(x, y)
                if hit.any():
                    kind[idx[hit]] = FateKind.TO_INFINITY
                    iters[idx[hit]] = n
                    witness[idx[hit]] = code
                    decided |= hit
            # convergence
            near_a = np.maximum(np.abs(x - alpha.x), np.abs(y - alpha.y)) <= tol
            run_o = np.where(near_o, run_o + 1, 0)
            run_a = np.where(near_a, run_a + 1, 0)
            for code, run in ((FateKind.TO_ORIGIN, run_o), (FateKind.TO_ALPHA, run_a)):
                hit = ~decided & (run >= need)
                if hit.any():
                    kind[idx[hit]] = code
                    iters[idx[hit]] = n - need + 1
                    decided |= hit
            if decided.any():
                keep = ~decided
                idx, x, y, run_o, run_a = idx[keep], x[keep], y[keep], run_o[keep], run_a[keep]
            if idx.size == 0 or n == budget.max_iter:
                break
            x, y = step(x, y)
    iters[idx] = budget.max_iter
    return kind.reshape(shape), iters.reshape(shape), witness.reshape(shape)


def _fate_at(fmap, p, budget, direction) -> Fate:
    x, y = as_point(p)
    k, it, w = classify_many(fmap, np.array([x]), np.array([y]), budget, direction)
    tag = _WITNESS_ORDER[int(w[0])] if w[0] >= 0 else None
    return Fate(FateKind(int(k[0])), int(it[0]), tag)


def classify_forward(fmap: MapFamily, p, budget: OrbitBudget | None = None) -> Fate:
    return _fate_at(fmap, p, budget, Direction.FORWARD)


def classify_backward(fmap: MapFamily, p, budget: OrbitBudget | None = None) -> Fate:
    """Fate of the backward orbit; ``ToOrigin`` means ``p`` is on the unstable manifold of the origin."""
    return _fate_at(fmap, p, budget, Direction.BACKWARD)


def membership_from_fates(fwd, bwd) -> np.ndarray:
    """Combine forward and backward fate codes into 1 (yes), 0 (no) or -1 (undecided)."""
    fwd = np.asarray(fwd)
    bwd = np.asarray(bwd)
    out = np.full(np.broadcast_shapes(fwd.shape, bwd.shape), -1, dtype=np.int8)
    conv_f = (fwd == FateKind.TO_ORIGIN) | (fwd == FateKind.TO_ALPHA)
    conv_b = (bwd == FateKind.TO_ORIGIN) | (bwd == FateKind.TO_ALPHA)
    out[conv_f & conv_b] = 1
    out[(fwd == FateKind.TO_INFINITY) | (bwd == FateKind.TO_INFINITY)] = 0
    return out


def in_filled_julia(fmap: MapFamily, p, budget: OrbitBudget | None = None) -> Membership:
    """Whether ``p`` has bounded orbits in both time directions.

    ``NO`` as soon as either direction escapes; ``YES`` when both directions
    converge to a fixed point; ``UNDECIDED`` otherwise.
    """
    f = classify_forward(fmap, p, budget)
    if f.kind is FateKind.TO_INFINITY:
        return Membership.NO
    b = classify_backward(fmap, p, budget)
    code = int(membership_from_fates(int(f.kind), int(b.kind)))
    return {1: Membership.YES, 0: Membership.NO, -1: Membership.UNDECIDED}[code]
