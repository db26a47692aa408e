"""Invariant curves of the saddle at the origin.

Manifold branches are parametrised by a real ``sigma``.  With ``G`` the
double step (``F^2`` for the unstable branch, ``F^-2`` for the stable one)
and ``L`` the corresponding eigenvalue of ``G`` along the branch direction
``v``::

    point(sigma) = G^k(s0 * L**(sigma - k) * v),   k = max(0, ceil(sigma))

For ``sigma <= 0`` this is the straight local piece of length ``s0``; each
unit of ``sigma`` above zero is one fundamental domain pushed out by one
more application of ``G``.  Refinement inserts parameter midpoints, so every
inserted point is an exact image of a point on the local piece.

The double step keeps each branch invariant even when an eigenvalue is
negative.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .maps import MapFamily, Point2, Stability, eigenvalues_at, fixed_points, jacobian
from .orbits import FateKind, OrbitBudget, classify_many

__all__ = [
    "ManifoldKind",
    "Branch",
    "Side",
    "ManifoldCurve",
    "CrossingSolution",
    "NotASaddleError",
    "TraceError",
    "CrossingError",
    "DEFAULT_WINDOW",
    "local_segment",
    "trace_manifold",
    "trace_both",
    "xbar_left",
    "xbar_right",
    "xbar_left_many",
    "xbar_right_many",
    "curve_C",
    "bisect_crossing",
    "branch_direction",
]

DEFAULT_WINDOW = (-3.0, 4.0, -3.0, 3.0)
_MIN_OFFSET = 1e-13
_FAR = 1e6
_COARSE = 1.0
_PAD = 0.5
_LEVEL_POINTS = 64
_MAX_LEVELS = 200
_MAX_POINTS = 5_000_000


class ManifoldKind(Enum):
    STABLE = "Stable"
    UNSTABLE = "Unstable"


class Branch(Enum):
    PLUS = "Plus"
    MINUS = "Minus"


class Side(Enum):
    LEFT_OF_ORIGIN = "LeftOfOrigin"
    RIGHT_UNIT_INTERVAL = "RightUnitInterval"


class NotASaddleError(ValueError):
    """The origin is not a hyperbolic saddle for these parameters."""


class TraceError(RuntimeError):
    pass


class CrossingError(ValueError):
    """Bracket endpoints do not have the fates required for a crossing."""


def _kind(kind) -> ManifoldKind:
    return kind if isinstance(kind, ManifoldKind) else ManifoldKind(str(kind).capitalize())


def _branch(branch) -> Branch:
    return branch if isinstance(branch, Branch) else Branch(str(branch).capitalize())


@dataclass(frozen=True, eq=False)
class ManifoldCurve:
    """An ordered polyline on one branch of a manifold of the origin.

    ``points`` is an ``(N, 2)`` array starting at the origin.  When the
    curve leaves the tracing window it is clipped, and the remaining pieces
    start at the indices listed in ``piece_starts`` (always including 0).
    ``cumulative_arclength`` does not count the gaps between pieces.
    ``sigma`` holds the parameter of every point.
    """

    points: np.ndarray
    kind: ManifoldKind
    branch: Branch
    cumulative_arclength: np.ndarray
    sigma: np.ndarray
    piece_starts: tuple[int, ...] = (0,)
    status: str = "complete"
    window: tuple[float, float, float, float] | None = None

    def __len__(self) -> int:
        return len(self.points)

    @property
    def arclength(self) -> float:
        return float(self.cumulative_arclength[-1]) if len(self.points) else 0.0

    def segments(self) -> tuple[np.ndarray, np.ndarray]:
        """Start and end points of every segment that does not cross a piece gap."""
        p = self.points
        if len(p) < 2:
            return p[:0], p[:0]
        keep = np.ones(len(p) - 1, dtype=bool)
        for s in self.piece_starts[1:]:
            keep[s - 1] = False
        return p[:-1][keep], p[1:][keep]

    def point_list(self) -> list[Point2]:
        return [Point2(float(x), float(y)) for x, y in self.points]

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("s,x,y\n")
        for s, (x, y) in zip(self.cumulative_arclength, self.points):
            buf.write(f"{s:.17g},{x:.17g},{y:.17g}\n")
        return buf.getvalue()


@dataclass(frozen=True)
class CrossingSolution:
    ybar: float
    xbar: float
    side: Side
    bracket_width_final: float


# ---------------------------------------------------------------------------
# parametrisation


@dataclass(eq=False)
class _Param:
    fmap: MapFamily
    kind: ManifoldKind
    v: np.ndarray
    growth: float
    s0: float
    _log_growth: float = field(init=False)

    def __post_init__(self):
        self._log_growth = math.log(self.growth)

    def sigma_min(self) -> float:
        return math.log(_MIN_OFFSET / self.s0) / self._log_growth

    def sigma_for_offset(self, t: float) -> float:
        return math.log(t / self.s0) / self._log_growth

    def points(self, sig) -> tuple[np.ndarray, np.ndarray]:
        sig = np.asarray(sig, dtype=float)
        k = np.maximum(0, np.ceil(sig)).astype(np.int64)
        t = self.s0 * np.exp((sig - k) * self._log_growth)
        x = t * self.v[0]
        y = t * self.v[1]
        step = self.fmap.step_inverse if self.kind is ManifoldKind.STABLE else self.fmap.step
        kmax = int(k.max(initial=0))
        with np.errstate(all="ignore"):
            for j in range(kmax):
                sel = k > j
                if not sel.any():
                    break
                if sel.all():
                    for _ in range(2):
                        x, y = step(x, y)
                else:
                    xs, ys = x[sel], y[sel]
                    for _ in range(2):
                        xs, ys = step(xs, ys)
                    x[sel], y[sel] = xs, ys
        return x, y


def _saddle_data(fmap: MapFamily):
    origin = Point2(0.0, 0.0)
    lm, lp = eigenvalues_at(fmap, origin)
    stab = fixed_points(fmap)[0].stability if fmap.is_henon else None
    if stab is None:
        from .maps import classify_stability

        stab = classify_stability(lm, lp)
    if stab not in (Stability.SADDLE, Stability.FLIP_SADDLE):
        raise NotASaddleError(f"origin is {stab.value}, not a saddle (eigenvalues {lm:.6g}, {lp:.6g})")
    if abs(lm) < 1.0:
        ls, lu = lm, lp
    else:
        ls, lu = lp, lm
    return ls, lu


def _eigvec(fmap: MapFamily, lam: float) -> np.ndarray:
    J = jacobian(fmap, (0.0, 0.0))
    a, b = J[0]
    c, d = J[1]
    # (J - lam I) v = 0; pick the better-conditioned row
    if abs(b) + abs(a - lam) >= abs(c) + abs(d - lam):
        v = np.array([b, lam - a])
    else:
        v = np.array([lam - d, c])
    return v / np.hypot(v[0], v[1])


def branch_direction(fmap: MapFamily, kind, branch) -> np.ndarray:
    """Unit eigenvector at the origin pointing into the requested branch.

    ``Plus`` is the half whose dominant eigenvector component is positive.
    """
    kind, branch = _kind(kind), _branch(branch)
    ls, lu = _saddle_data(fmap)
    v = _eigvec(fmap, ls if kind is ManifoldKind.STABLE else lu)
    if v[np.argmax(np.abs(v))] < 0:
        v = -v
    return v if branch is Branch.PLUS else -v


def _make_param(fmap, kind, branch, s0) -> _Param:
    ls, lu = _saddle_data(fmap)
    growth = 1.0 / (ls * ls) if kind is ManifoldKind.STABLE else lu * lu
    return _Param(fmap, kind, branch_direction(fmap, kind, branch), growth, s0)


# ---------------------------------------------------------------------------
# growth


def _inside(x, y, window, pad=0.0):
    if window is None:
        return np.isfinite(x) & np.isfinite(y)
    return (x >= window[0] - pad) & (x <= window[1] + pad) & (y >= window[2] - pad) & (y <= window[3] + pad)


def _refine(param: _Param, sig, x, y, max_spacing, window):
    for _ in range(200):
        with np.errstate(all="ignore"):
            ds = np.hypot(np.diff(x), np.diff(y))
        fin = np.isfinite(x) & np.isfinite(y) & (np.abs(x) < _FAR) & (np.abs(y) < _FAR)
        near = _inside(x, y, window, _PAD)
        near_seg = near[:-1] | near[1:]
        fin_seg = fin[:-1] & fin[1:]
        need = (near_seg & fin_seg & ~(ds <= max_spacing)) | (~near_seg & fin_seg & (ds > _COARSE))
        need &= np.diff(sig) > 1e-13
        if not need.any():
            return sig, x, y
        idx = np.nonzero(need)[0]
        ns = 0.5 * (sig[idx] + sig[idx + 1])
        nx, ny = param.points(ns)
        sig = np.insert(sig, idx + 1, ns)
        x = np.insert(x, idx + 1, nx)
        y = np.insert(y, idx + 1, ny)
        if sig.size > _MAX_POINTS:
            raise TraceError("manifold refinement exceeded the point cap")
    raise TraceError("manifold refinement did not settle")


def _in_window_length(x, y, window) -> float:
    inside = _inside(x, y, window)
    with np.errstate(all="ignore"):
        ds = np.hypot(np.diff(x), np.diff(y))
    both = inside[:-1] & inside[1:]
    return float(ds[both].sum())


def _assemble(sig, x, y, window, target, kind, branch, status) -> ManifoldCurve:
    inside = _inside(x, y, window)
    inside[0] = True
    keep = np.nonzero(inside)[0]
    pts = np.column_stack([x[keep], y[keep]])
    sig = sig[keep]
    breaks = np.nonzero(np.diff(keep) > 1)[0] + 1
    ds = np.hypot(np.diff(pts[:, 0]), np.diff(pts[:, 1]))
    ds[breaks - 1] = 0.0
    cum = np.concatenate([[0.0], np.cumsum(ds)])
    if target is not None and cum[-1] >= target:
        last = int(np.searchsorted(cum, target, side="left"))
        pts, sig, cum = pts[: last + 1], sig[: last + 1], cum[: last + 1]
        breaks = breaks[breaks <= last]
        status = "complete"
    pts[0] = 0.0
    return ManifoldCurve(
        points=pts,
        kind=kind,
        branch=branch,
        cumulative_arclength=cum,
        sigma=sig,
        piece_starts=(0, *(int(b) for b in breaks)),
        status=status,
        window=window,
    )


def _grow(param: _Param, target, max_spacing, window, kind, branch) -> ManifoldCurve:
    s_lo = param.sigma_min()
    sig = np.concatenate([[-np.inf], np.linspace(s_lo, 0.0, _LEVEL_POINTS)])
    x, y = param.points(sig[1:])
    x = np.concatenate([[0.0], x])
    y = np.concatenate([[0.0], y])
    # the first segment from the exact origin is straight; refine from sigma_min on
    s2, x2, y2 = _refine(param, sig[1:], x[1:], y[1:], max_spacing, window)
    sig = np.concatenate([[s_lo - 1.0], s2])
    x = np.concatenate([[0.0], x2])
    y = np.concatenate([[0.0], y2])
    prev = _in_window_length(x, y, window)
    if prev >= target:
        return _assemble(sig, x, y, window, target, kind, branch, "complete")
    quiet = 0
    for level in range(1, _MAX_LEVELS + 1):
        ns = np.linspace(level - 1.0, float(level), _LEVEL_POINTS + 1)[1:]
        nx, ny = param.points(ns)
        s_all = np.concatenate([sig[1:], ns])
        x_all = np.concatenate([x[1:], nx])
        y_all = np.concatenate([y[1:], ny])
        s_all, x_all, y_all = _refine(param, s_all, x_all, y_all, max_spacing, window)
        sig = np.concatenate([[sig[0]], s_all])
        x = np.concatenate([[0.0], x_all])
        y = np.concatenate([[0.0], y_all])
        length = _in_window_length(x, y, window)
        if length >= target:
            return _assemble(sig, x, y, window, target, kind, branch, "complete")
        quiet = quiet + 1 if length - prev <= 1e-9 * length else 0
        prev = length
        if quiet >= 2:
            tail = _inside(x[-_LEVEL_POINTS:], y[-_LEVEL_POINTS:], window)
            status = "stalled" if tail.all() else "exited"
            return _assemble(sig, x, y, window, None, kind, branch, status)
    raise TraceError(f"arclength {prev:.6g} after {_MAX_LEVELS} levels, target {target}")


def _local_window(arm_length: float) -> tuple[float, float, float, float]:
    r = 2.0 * arm_length
    return (-r, r, -r, r)


def _endpoint_shift(fmap, kind, branch, s0, arm_length) -> float:
    a = _make_param(fmap, kind, branch, s0)
    b = _make_param(fmap, kind, branch, s0 / 2)
    ca = _grow(a, arm_length, arm_length / 50, _local_window(arm_length), kind, branch)
    s_end = float(ca.sigma[-1])
    pe = ca.points[-1]
    guess = s_end + math.log(2.0) / b._log_growth

    _, d = _nearest_sigma(b, pe, guess - 0.1, guess + 0.1)
    return d


def _seed_offset(fmap, kind, branch, arm_length) -> float:
    key = (kind, branch, arm_length)
    if key in fmap._cache.setdefault("seed", {}):
        return fmap._cache["seed"][key]
    s0 = 1e-7
    for _ in range(30):
        if _endpoint_shift(fmap, kind, branch, s0, arm_length) < 1e-9:
            break
        s0 /= 2
    fmap._cache["seed"][key] = s0
    return s0


def local_segment(fmap: MapFamily, kind, arm_length: float = 0.05) -> tuple[ManifoldCurve, ManifoldCurve]:
    """Both branches of the stable or unstable manifold out to ``arm_length``.

    Returns ``(plus, minus)``.  Raises :class:`NotASaddleError` when the
    origin is not a saddle.
    """
    kind = _kind(kind)
    if not arm_length > 0:
        raise ValueError("arm_length must be positive")
    out = []
    for br in (Branch.PLUS, Branch.MINUS):
        s0 = _seed_offset(fmap, kind, br, arm_length)
        param = _make_param(fmap, kind, br, s0)
        curve = _grow(param, arm_length, arm_length / 50, _local_window(arm_length), kind, br)
        out.append(curve)
    return out[0], out[1]


def trace_manifold(
    fmap: MapFamily,
    kind,
    branch,
    target_arclength: float,
    max_spacing: float = 1e-3,
    window: tuple[float, float, float, float] = DEFAULT_WINDOW,
    arm_length: float = 0.05,
) -> ManifoldCurve:
    """Grow one branch until its in-window arclength reaches ``target_arclength``.

    Growth continues after the branch leaves ``window`` because it may come
    back in; it stops with status ``"exited"`` (or ``"stalled"`` when the
    branch piles up inside the window) once two successive double steps add
    no in-window length.  Points outside the window are clipped.  Segments
    inside the window are refined to ``max_spacing``.

    A target no larger than ``arm_length`` returns the local segment.
    """
    kind, branch = _kind(kind), _branch(branch)
    if not max_spacing > 0:
        raise ValueError("max_spacing must be positive")
    if target_arclength <= arm_length:
        plus, minus = local_segment(fmap, kind, arm_length)
        return plus if branch is Branch.PLUS else minus
    s0 = _seed_offset(fmap, kind, branch, arm_length)
    param = _make_param(fmap, kind, branch, s0)
    return _grow(param, target_arclength, max_spacing, window, kind, branch)


def trace_both(fmap: MapFamily, kind, target_arclength: float, **kw) -> tuple[ManifoldCurve, ManifoldCurve]:
    return (
        trace_manifold(fmap, kind, Branch.PLUS, target_arclength, **kw),
        trace_manifold(fmap, kind, Branch.MINUS, target_arclength, **kw),
    )


# ---------------------------------------------------------------------------
# crossings of horizontal lines


def bisect_crossing(fmap, ybars, lo, hi, left_fate, right_fate, tol=1e-12, budget=None):
    """Bisect each horizontal bracket ``[lo, hi]`` at height ``ybar`` on the forward fate.

    ``lo`` must have ``left_fate`` and ``hi`` ``right_fate``; otherwise
    :class:`CrossingError` is raised.  A midpoint with any other fate is
    taken as the crossing itself.  Returns ``(xbars, final_widths)``.
    """
    budget = budget or OrbitBudget.default_for(fmap)
    ybars = np.asarray(ybars, dtype=float)
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)
    kl, _, _ = classify_many(fmap, lo, ybars, budget)
    kh, _, _ = classify_many(fmap, hi, ybars, budget)
    bad = (kl != left_fate) | (kh != right_fate)
    if bad.any():
        i = int(np.nonzero(bad)[0][0])
        raise CrossingError(
            f"at ybar={ybars[i]:.17g} the bracket [{lo[i]:.17g}, {hi[i]:.17g}] has fates "
            f"{FateKind(int(kl[i])).label}/{FateKind(int(kh[i])).label}; coupling too large for a single crossing?"
        )
    while True:
        open_ = (hi - lo) >= tol
        if not open_.any():
            break
        mid = np.where(open_, 0.5 * (lo + hi), lo)
        if np.array_equal(mid[open_], lo[open_]) or np.array_equal(mid[open_], hi[open_]):
            break
        km, _, _ = classify_many(fmap, mid, ybars, budget)
        go_left = open_ & (km == right_fate)
        go_right = open_ & (km == left_fate)
        hit = open_ & ~go_left & ~go_right
        hi = np.where(go_left, mid, hi)
        lo = np.where(go_right, mid, lo)
        lo = np.where(hit, mid, lo)
        hi = np.where(hit, mid, hi)
    return 0.5 * (lo + hi), hi - lo


def _check_ybar(fmap, ybars):
    delta = fmap.delta
    ybars = np.atleast_1d(np.asarray(ybars, dtype=float))
    if np.any(ybars < 0) or np.any(ybars > 2 * abs(delta) * (1 + 1e-15)):
        raise ValueError(f"ybar must lie in [0, {2 * abs(delta)}]")
    return ybars


def _beta(fmap) -> float:
    if fmap.is_henon:
        return fmap.henon.delta / (fmap.henon.mu - 1.0)
    gp0 = float(fmap.g.df(np.float64(0.0)))
    return fmap.delta / (gp0 - 1.0)


def xbar_left_many(fmap: MapFamily, ybars, tol: float = 1e-12, budget: OrbitBudget | None = None) -> np.ndarray:
    """Vectorised :func:`xbar_left`; returns ``(xbars, widths)``."""
    ybars = _check_ybar(fmap, ybars)
    budget = budget or OrbitBudget.default_for(fmap)
    xb = np.zeros_like(ybars)
    wd = np.zeros_like(ybars)
    pos = ybars > 0
    if pos.any():
        lo = -_beta(fmap) * ybars[pos]
        xb[pos], wd[pos] = bisect_crossing(
            fmap, ybars[pos], lo, np.zeros_like(lo), FateKind.TO_INFINITY, FateKind.TO_ALPHA, tol, budget
        )
    return xb, wd


def xbar_left(fmap: MapFamily, ybar: float, tol: float = 1e-12, budget: OrbitBudget | None = None) -> CrossingSolution:
    """Where the horizontal line at height ``ybar`` in the upper strip crosses the stable manifold, left of the origin.

    Bisection on ``[-beta*ybar, 0]``: escaping points lie to the left,
    points attracted to ``alpha`` to the right.  ``ybar = 0`` gives 0.
    """
    xb, wd = xbar_left_many(fmap, [ybar], tol, budget)
    return CrossingSolution(float(ybar), float(xb[0]), Side.LEFT_OF_ORIGIN, float(wd[0]))


def xbar_right_many(fmap: MapFamily, ybars, tol: float = 1e-12, budget: OrbitBudget | None = None):
    ybars = _check_ybar(fmap, ybars)
    budget = budget or OrbitBudget.default_for(fmap)
    ones = np.ones_like(ybars)
    return bisect_crossing(fmap, ybars, ones, 2 * ones, FateKind.TO_ALPHA, FateKind.TO_INFINITY, tol, budget)


def xbar_right(fmap: MapFamily, ybar: float, tol: float = 1e-12, budget: OrbitBudget | None = None) -> CrossingSolution:
    """Crossing of the stable manifold with ``[1, 2] x {ybar}``.

    Points left of it are attracted to ``alpha``, points right of it escape.
    """
    xb, wd = xbar_right_many(fmap, [ybar], tol, budget)
    return CrossingSolution(float(ybar), float(xb[0]), Side.RIGHT_UNIT_INTERVAL, float(wd[0]))


# ---------------------------------------------------------------------------
# the curve C


def _nearest_sigma(param: _Param, q: np.ndarray, s_lo: float, s_hi: float, zooms: int = 8) -> tuple[float, float]:
    """Parameter of the curve point nearest ``q`` within ``[s_lo, s_hi]``, by repeated grid zooming."""
    a, b = s_lo, s_hi
    for _ in range(zooms):
        grid = np.linspace(a, b, 401)
        x, y = param.points(grid)
        with np.errstate(all="ignore"):
            d = np.hypot(x - q[0], y - q[1])
        d = np.where(np.isfinite(d), d, np.inf)
        i = int(np.argmin(d))
        best = (float(grid[i]), float(d[i]))
        a, b = grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)]
    return best


def curve_C(fmap: MapFamily, samples: int = 2000, tol: float = 1e-9, arm_length: float = 0.05) -> ManifoldCurve:
    """Preimage of the stable arc running from ``Q = F(xbar_right(0), 0)`` to the origin.

    The result starts at ``(xbar_right(0), 0)`` and ends at the origin; its
    interior lies below the x-axis.  Points are spread evenly by arclength of
    the stable arc.  Raises :class:`CrossingError` if ``Q`` is not found on
    the upper stable branch within ``tol``.
    """
    if samples < 2:
        raise ValueError("need at least two samples")
    sol = xbar_right(fmap, 0.0)
    qx, qy = fmap.step(np.float64(sol.xbar), np.float64(0.0))
    q = np.array([float(qx), float(qy)])
    kind = ManifoldKind.STABLE
    branch = Branch.PLUS if q[1] > 0 else Branch.MINUS
    s0 = _seed_offset(fmap, kind, branch, arm_length)
    param = _make_param(fmap, kind, branch, s0)
    s_q_guess = param.sigma_for_offset(max(np.hypot(*q), _MIN_OFFSET))
    s_lo = param.sigma_min()
    s_q, miss = _nearest_sigma(param, q, s_lo, max(s_q_guess, 0.0) + 2.0)
    if miss > tol:
        raise CrossingError(f"Q = ({q[0]:.6g}, {q[1]:.6g}) is {miss:.3g} away from the traced stable branch")
    # dense arc from the origin to Q, then even arclength resampling
    fine = np.linspace(s_lo, s_q, 64)
    fx, fy = param.points(fine)
    arc_len = float(np.hypot(q[0], q[1]))
    fine, fx, fy = _refine(param, fine, fx, fy, max(arc_len / (8 * samples), 1e-12), None)
    fx = np.concatenate([[0.0], fx])
    fy = np.concatenate([[0.0], fy])
    fine = np.concatenate([[s_lo - 1.0], fine])
    cum = np.concatenate([[0.0], np.cumsum(np.hypot(np.diff(fx), np.diff(fy)))])
    targets = np.linspace(0.0, cum[-1], samples)
    s_t = np.interp(targets, cum, fine)
    wx, wy = param.points(s_t[1:-1])
    wx = np.concatenate([[0.0], wx, [q[0]]])
    wy = np.concatenate([[0.0], wy, [q[1]]])
    cx, cy = fmap.step_inverse(wx[::-1], wy[::-1])
    cx, cy = np.array(cx, dtype=float), np.array(cy, dtype=float)
    cx[0], cy[0] = sol.xbar, 0.0
    cx[-1], cy[-1] = 0.0, 0.0
    pts = np.column_stack([cx, cy])
    ds = np.hypot(np.diff(cx), np.diff(cy))
    return ManifoldCurve(
        points=pts,
        kind=kind,
        branch=branch,
        cumulative_arclength=np.concatenate([[0.0], np.cumsum(ds)]),
        sigma=s_t[::-1].copy(),
        status="preimage",
    )
