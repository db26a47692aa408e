"""Map families, inverses, derivatives and fixed points.

Two families are supported:

* the quadratic Hénon family ``F(x, y) = (mu*x*(1-x) + delta*y, delta*x)``
  with closed-form inverse, Jacobian and eigenvalues;
* the general family ``F(x, y) = (g(x) + h(y), h(x))`` where ``g`` is a
  unimodal map and ``h`` a monotone perturbation of ``x -> delta*x``.  The
  inverse is computed numerically.

All array-level routines (``MapFamily.step`` and friends) are vectorised and
never raise on overflow; the scalar API (:func:`apply`, :func:`apply_inverse`)
validates its input and raises :class:`NumericBlowup` when an image is not
finite.
"""

from __future__ import annotations

import math
import re
import warnings
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Callable, NamedTuple, Sequence

import numpy as np

__all__ = [
    "Point2",
    "HenonParams",
    "ScalarMap",
    "MapFamily",
    "Stability",
    "FixedPointInfo",
    "NumericBlowup",
    "InversionError",
    "MissedRootWarning",
    "logistic",
    "linear",
    "linear_plus_sine",
    "scalar_map_from_spec",
    "make_henon",
    "make_general",
    "apply",
    "apply_inverse",
    "jacobian",
    "eigenvalues_at",
    "fixed_points",
    "attracting_fixed_point",
    "conjugate_flip",
    "c2_distance_to_linear",
]


class Point2(NamedTuple):
    x: float
    y: float


class NumericBlowup(ArithmeticError):
    """An image left the range of finite doubles."""


class InversionError(ArithmeticError):
    """The numeric inverse of ``h`` could not be computed reliably."""


class MissedRootWarning(UserWarning):
    pass


def as_point(p) -> Point2:
    """Coerce ``p`` to a finite :class:`Point2` or raise ``ValueError``."""
    x, y = float(p[0]), float(p[1])
    if not (math.isfinite(x) and math.isfinite(y)):
        raise ValueError(f"point must have finite coordinates, got ({x}, {y})")
    return Point2(x, y)


# ---------------------------------------------------------------------------
# scalar maps


@dataclass(frozen=True)
class ScalarMap:
    """A C^2 map of the real line with its first two derivatives.

    The callables must accept and return numpy arrays elementwise.
    ``slope`` is the coefficient of the linear map this one perturbs, when
    there is a natural one.
    """

    f: Callable
    df: Callable
    d2f: Callable
    name: str = "custom"
    slope: float | None = None

    def __call__(self, x):
        return self.f(x)

    def consistency_error(self, xs) -> float:
        """Largest relative mismatch between supplied and finite-difference derivatives.

        First derivatives are compared against central differences of ``f``,
        second derivatives against central differences of ``df``.  The error
        is measured relative to ``max(1, |derivative|)``.
        """
        xs = np.asarray(xs, dtype=float)
        h = 1e-5 * np.maximum(1.0, np.abs(xs))
        fd1 = (self.f(xs + h) - self.f(xs - h)) / (2 * h)
        fd2 = (self.df(xs + h) - self.df(xs - h)) / (2 * h)
        d1 = np.broadcast_to(self.df(xs), xs.shape)
        d2 = np.broadcast_to(self.d2f(xs), xs.shape)
        e1 = np.abs(d1 - fd1) / np.maximum(1.0, np.abs(d1))
        e2 = np.abs(d2 - fd2) / np.maximum(1.0, np.abs(d2))
        return float(max(e1.max(initial=0.0), e2.max(initial=0.0)))


def logistic(mu: float) -> ScalarMap:
    mu = float(mu)
    return ScalarMap(
        f=lambda x: mu * x * (1.0 - x),
        df=lambda x: mu * (1.0 - 2.0 * x),
        d2f=lambda x: np.full_like(np.asarray(x, dtype=float), -2.0 * mu),
        name=f"logistic({mu!r})",
    )


def linear(delta: float) -> ScalarMap:
    delta = float(delta)
    return ScalarMap(
        f=lambda x: delta * x,
        df=lambda x: np.full_like(np.asarray(x, dtype=float), delta),
        d2f=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
        name=f"linear({delta!r})",
        slope=delta,
    )


def linear_plus_sine(delta: float, eta: float) -> ScalarMap:
    delta, eta = float(delta), float(eta)
    return ScalarMap(
        f=lambda x: delta * x + eta * np.sin(x),
        df=lambda x: delta + eta * np.cos(x),
        d2f=lambda x: -eta * np.sin(x),
        name=f"linear_plus_sine({delta!r}, {eta!r})",
        slope=delta,
    )


_CATALOG = {"logistic": (logistic, 1), "linear": (linear, 1), "linear_plus_sine": (linear_plus_sine, 2)}
_SPEC_RE = re.compile(r"^\s*([a-z_]+)\s*\(([^()]*)\)\s*$")


def scalar_map_from_spec(spec: str) -> ScalarMap:
    """Build a catalog map from text such as ``"linear_plus_sine(0.1, 0.001)"``."""
    m = _SPEC_RE.match(spec)
    if not m or m.group(1) not in _CATALOG:
        names = ", ".join(sorted(_CATALOG))
        raise ValueError(f"unknown scalar map {spec!r}; catalog: {names}")
    factory, nargs = _CATALOG[m.group(1)]
    args = [a for a in (s.strip() for s in m.group(2).split(",")) if a]
    if len(args) != nargs:
        raise ValueError(f"{m.group(1)} takes {nargs} argument(s), got {len(args)}")
    return factory(*(float(a) for a in args))


# ---------------------------------------------------------------------------
# map families


@dataclass(frozen=True)
class HenonParams:
    delta: float
    mu: float

    @property
    def h11_member(self) -> bool:
        """Whether the parameters lie in the region with one attracting point and one saddle."""
        d2 = self.delta * self.delta
        return 0.0 < self.delta < 1.0 and 1.0 - d2 < self.mu < 3.0 * (1.0 - d2)


@dataclass(frozen=True, eq=False)
class MapFamily:
    """A planar diffeomorphism from one of the two supported families.

    Build instances with :func:`make_henon` or :func:`make_general`.
    """

    kind: str
    henon: HenonParams | None = None
    g: ScalarMap | None = None
    h: ScalarMap | None = None
    delta_ref: float = 0.0
    interval: tuple[float, float] = (-10.0, 10.0)
    h_slack: float = 0.0
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def is_henon(self) -> bool:
        return self.kind == "henon"

    @property
    def delta(self) -> float:
        return self.henon.delta if self.is_henon else self.delta_ref

    @property
    def mu(self) -> float | None:
        return self.henon.mu if self.is_henon else None

    @property
    def h11_member(self) -> bool:
        return self.is_henon and self.henon.h11_member

    def describe(self) -> dict:
        if self.is_henon:
            return {"kind": "henon", "delta": self.henon.delta, "mu": self.henon.mu}
        return {"kind": "general", "g": self.g.name, "h": self.h.name, "delta_ref": self.delta_ref}

    def flipped(self) -> "MapFamily":
        """The Hénon map with ``delta`` replaced by ``-delta``."""
        if not self.is_henon:
            raise TypeError("only defined for the Henon family")
        return make_henon(-self.henon.delta, self.henon.mu)

    # -- vectorised kernels ------------------------------------------------

    def step(self, x, y):
        """Forward image of arrays ``x, y`` (no validation, may overflow)."""
        if self.is_henon:
            d, m = self.henon.delta, self.henon.mu
            return m * x * (1.0 - x) + d * y, d * x
        hx = self.h.f(x)
        return self.g.f(x) + self.h.f(y), hx

    def step_inverse(self, x, y):
        """Preimage of arrays ``x, y``."""
        if self.is_henon:
            d, m = self.henon.delta, self.henon.mu
            u = y / d
            return u, (x - m * u * (1.0 - u)) / d
        u = self.h_inverse(y)
        return u, self.h_inverse(x - self.g.f(u))

    def jacobian_entries(self, x, y):
        """Entries ``(a, b, c, d)`` of ``[[a, b], [c, d]]`` at the given points."""
        if self.is_henon:
            d, m = self.henon.delta, self.henon.mu
            a = m - 2.0 * m * x
            b = np.full_like(a, d, dtype=float) if isinstance(a, np.ndarray) else d
            return a, b, b, 0.0 * a
        a = self.g.df(x)
        return a, self.h.df(y), self.h.df(x), 0.0 * a

    def h_inverse(self, v):
        """Solve ``h(t) = v`` elementwise by bracketed, bisection-safeguarded Newton."""
        v = np.asarray(v, dtype=float)
        scalar = v.ndim == 0
        v = np.atleast_1d(v)
        out = np.full(v.shape, np.nan)
        fin = np.isfinite(v)
        if fin.any():
            out[fin] = _monotone_inverse(self.h, v[fin], self.delta_ref, self.h_slack)
        out[np.isinf(v)] = v[np.isinf(v)]
        return out[0] if scalar else out


def _monotone_inverse(h: ScalarMap, v: np.ndarray, delta: float, eps: float) -> np.ndarray:
    # bracket from delta - eps <= h' <= delta + eps and h(0) = 0
    lo_slope, hi_slope = delta - eps, delta + eps
    pos = v >= 0
    lo = np.where(pos, v / hi_slope, v / lo_slope)
    hi = np.where(pos, v / lo_slope, v / hi_slope)
    lo, hi = np.minimum(lo, hi), np.maximum(lo, hi)
    lo = lo - 1e-12 * np.maximum(1.0, np.abs(lo))
    hi = hi + 1e-12 * np.maximum(1.0, np.abs(hi))
    flo, fhi = h.f(lo) - v, h.f(hi) - v
    for _ in range(60):
        bad = (flo > 0) | (fhi < 0)
        if not bad.any():
            break
        width = np.maximum(hi - lo, 1e-12 * np.maximum(1.0, np.abs(v) / delta))
        lo = np.where(flo > 0, lo - width, lo)
        hi = np.where(fhi < 0, hi + width, hi)
        flo, fhi = h.f(lo) - v, h.f(hi) - v
    else:
        raise InversionError("could not bracket a root of h(t) = v")
    t = 0.5 * (lo + hi)
    for _ in range(200):
        ft = h.f(t) - v
        dft = h.df(t)
        if np.any(dft <= 0):
            raise InversionError("h' is not positive inside the inversion bracket")
        lo = np.where(ft < 0, t, lo)
        hi = np.where(ft > 0, t, hi)
        t_new = t - ft / dft
        outside = ~((t_new > lo) & (t_new < hi))
        t_new = np.where(outside, 0.5 * (lo + hi), t_new)
        done = (np.abs(t_new - t) <= 4e-16 * np.maximum(1.0, np.abs(t))) | (ft == 0)
        t = np.where(ft == 0, t, t_new)
        if done.all():
            return t
    raise InversionError("inverse of h did not converge")


def make_henon(delta: float, mu: float) -> MapFamily:
    """Hénon map ``(x, y) -> (mu*x*(1-x) + delta*y, delta*x)``.

    Raises
    ------
    ValueError
        If ``delta == 0`` (the map is not invertible) or ``mu <= 0``.
    """
    delta, mu = float(delta), float(mu)
    if not (math.isfinite(delta) and math.isfinite(mu)):
        raise ValueError("parameters must be finite")
    if delta == 0.0:
        raise ValueError("delta = 0 gives a non-invertible map")
    if mu <= 0.0:
        raise ValueError("mu must be positive")
    return MapFamily(kind="henon", henon=HenonParams(delta, mu), delta_ref=delta)


def make_general(
    g: ScalarMap,
    h: ScalarMap,
    delta_ref: float,
    interval: tuple[float, float] = (-10.0, 10.0),
    samples: int = 4001,
) -> MapFamily:
    """General family ``(x, y) -> (g(x) + h(y), h(x))``.

    ``h`` is checked on ``interval`` for ``h(0) = 0`` and ``h' > 0``; both
    ``g`` and ``h`` must have derivatives consistent with finite differences.
    The sampled C^2 distance of ``h`` to the linear map is stored as
    ``h_slack`` and seeds the inversion bracket.
    """
    delta_ref = float(delta_ref)
    if delta_ref <= 0.0:
        raise ValueError("delta_ref must be positive")
    if abs(float(h.f(np.float64(0.0)))) > 1e-12:
        raise ValueError("h(0) must vanish")
    xs = np.linspace(interval[0], interval[1], samples)
    if np.any(h.df(xs) <= 0):
        raise ValueError("h must be strictly increasing on the working interval")
    probe = np.linspace(interval[0], interval[1], 37)
    for name, sm in (("g", g), ("h", h)):
        err = sm.consistency_error(probe)
        if err >= 1e-5:
            raise ValueError(f"derivatives of {name} disagree with finite differences (rel. error {err:.2e})")
    eps = c2_distance_to_linear(h, delta_ref, interval, samples)
    if eps >= delta_ref:
        raise ValueError("h is too far from the linear map to guarantee invertibility")
    return MapFamily(kind="general", g=g, h=h, delta_ref=delta_ref, interval=tuple(interval), h_slack=eps)


# ---------------------------------------------------------------------------
# scalar API


def apply(fmap: MapFamily, p) -> Point2:
    x, y = as_point(p)
    with np.errstate(over="ignore", invalid="ignore"):
        u, v = fmap.step(np.float64(x), np.float64(y))
    if not (np.isfinite(u) and np.isfinite(v)):
        raise NumericBlowup(f"image of ({x}, {y}) is not finite")
    return Point2(float(u), float(v))


def apply_inverse(fmap: MapFamily, p) -> Point2:
    x, y = as_point(p)
    with np.errstate(over="ignore", invalid="ignore"):
        u, v = fmap.step_inverse(np.float64(x), np.float64(y))
    if not (np.isfinite(u) and np.isfinite(v)):
        raise NumericBlowup(f"preimage of ({x}, {y}) is not finite")
    return Point2(float(u), float(v))


def jacobian(fmap: MapFamily, p) -> np.ndarray:
    x, y = as_point(p)
    a, b, c, d = fmap.jacobian_entries(np.float64(x), np.float64(y))
    return np.array([[a, b], [c, d]], dtype=float)


def _eigen_pair(trace, det):
    """Roots of ``l^2 - trace*l + det`` as (minus branch, plus branch), cancellation-free."""
    disc = trace * trace - 4.0 * det
    if np.any(disc < 0):
        raise ValueError("complex eigenvalues")
    s = np.sqrt(disc)
    big = np.where(trace >= 0, 0.5 * (trace + s), 0.5 * (trace - s))
    with np.errstate(divide="ignore", invalid="ignore"):
        small = np.where(big != 0, det / big, 0.0)
    lam_minus = np.where(trace >= 0, small, big)
    lam_plus = np.where(trace >= 0, big, small)
    return lam_minus, lam_plus


def eigenvalues_at(fmap: MapFamily, p) -> tuple[float, float]:
    """Jacobian eigenvalues ``(lambda_minus, lambda_plus)`` at ``p``.

    Ordered by the sign in front of the square root, not by value or
    modulus.  For the Hénon family only ``p.x`` matters.
    """
    x, y = as_point(p)
    a, b, c, d = fmap.jacobian_entries(np.float64(x), np.float64(y))
    lm, lp = _eigen_pair(a + d, a * d - b * c)
    return float(lm), float(lp)


class Stability(Enum):
    ATTRACTING = "Attracting"
    SADDLE = "Saddle"
    FLIP_SADDLE = "FlipSaddle"
    REPELLING = "Repelling"
    NON_HYPERBOLIC = "NonHyperbolic"


def classify_stability(lam_minus: float, lam_plus: float, tol: float = 1e-12) -> Stability:
    m1, m2 = abs(lam_minus), abs(lam_plus)
    if abs(m1 - 1.0) <= tol or abs(m2 - 1.0) <= tol:
        return Stability.NON_HYPERBOLIC
    if m1 < 1 and m2 < 1:
        return Stability.ATTRACTING
    if m1 > 1 and m2 > 1:
        return Stability.REPELLING
    if (-1 < lam_minus < 0 and lam_plus > 1) or (lam_minus < -1 and m2 < 1):
        return Stability.FLIP_SADDLE
    return Stability.SADDLE


@dataclass(frozen=True)
class FixedPointInfo:
    location: Point2
    eigenvalues: tuple[float, float]
    stability: Stability


def _info(fmap: MapFamily, p: Point2) -> FixedPointInfo:
    lm, lp = eigenvalues_at(fmap, p)
    return FixedPointInfo(p, (lm, lp), classify_stability(lm, lp))


def newton_periodic(fmap: MapFamily, n: int, x0, y0, max_steps: int = 60, halvings: int = 20):
    """Damped Newton on ``F^n(p) - p`` for a batch of starting points.

    The step is halved (up to ``halvings`` times) while the max-norm residual
    increases.  Returns ``(x, y, residual)``; diverged starts carry ``nan``.
    """
    x = np.array(x0, dtype=float, copy=True).ravel()
    y = np.array(y0, dtype=float, copy=True).ravel()

    def residual_and_jac(x, y):
        px, py = x, y
        j11 = np.ones_like(x)
        j12 = np.zeros_like(x)
        j21 = np.zeros_like(x)
        j22 = np.ones_like(x)
        for _ in range(n):
            a, b, c, d = fmap.jacobian_entries(px, py)
            j11, j12, j21, j22 = a * j11 + b * j21, a * j12 + b * j22, c * j11 + d * j21, c * j12 + d * j22
            px, py = fmap.step(px, py)
        return px - x, py - y, j11 - 1.0, j12, j21, j22 - 1.0

    def resid_only(x, y):
        px, py = x, y
        for _ in range(n):
            px, py = fmap.step(px, py)
        return np.maximum(np.abs(px - x), np.abs(py - y))

    with np.errstate(all="ignore"):
        active = np.isfinite(x) & np.isfinite(y)
        res = np.full(x.shape, np.inf)
        for _ in range(max_steps):
            idx = np.nonzero(active)[0]
            if idx.size == 0:
                break
            xa, ya = x[idx], y[idx]
            rx, ry, a, b, c, d = residual_and_jac(xa, ya)
            r0 = np.maximum(np.abs(rx), np.abs(ry))
            det = a * d - b * c
            sx = -(d * rx - b * ry) / det
            sy = -(-c * rx + a * ry) / det
            t = np.ones_like(xa)
            xn, yn = xa + sx, ya + sy
            rn = resid_only(xn, yn)
            for _ in range(halvings):
                worse = ~(rn <= r0)
                if not worse.any():
                    break
                t = np.where(worse, 0.5 * t, t)
                xn = np.where(worse, xa + t * sx, xn)
                yn = np.where(worse, ya + t * sy, yn)
                rn = np.where(worse, resid_only(xn, yn), rn)
            ok = np.isfinite(rn) & np.isfinite(xn) & np.isfinite(yn)
            x[idx] = np.where(ok, xn, np.nan)
            y[idx] = np.where(ok, yn, np.nan)
            res[idx] = np.where(ok, rn, np.inf)
            step = np.maximum(np.abs(t * sx), np.abs(t * sy))
            settled = ~ok | (rn == 0) | ((rn < 1e-13) & (step < 1e-13 * np.maximum(1.0, np.abs(xn) + np.abs(yn))))
            active[idx[settled]] = False
    res[~np.isfinite(x) | ~np.isfinite(y)] = np.inf
    return x, y, res


def attracting_fixed_point(fmap: MapFamily) -> Point2:
    """The non-zero fixed point (``alpha``); closed form for the Hénon family."""
    if "alpha" in fmap._cache:
        return fmap._cache["alpha"]
    if fmap.is_henon:
        d, m = fmap.henon.delta, fmap.henon.mu
        xa = 1.0 - 1.0 / m + d * d / m
        alpha = Point2(xa, d * xa)
    else:
        # the interior fixed point of g, shifted by the coupling, seeds Newton
        xg = 0.5
        with np.errstate(all="ignore"):
            for _ in range(2000):
                xg = float(fmap.g.f(np.float64(xg)))
        x, y, res = newton_periodic(fmap, 1, [xg], [0.0])
        if not res[0] < 1e-12:
            raise ArithmeticError("could not locate the attracting fixed point")
        alpha = Point2(float(x[0]), float(y[0]))
    fmap._cache["alpha"] = alpha
    return alpha


def _cluster(x: np.ndarray, y: np.ndarray, tol: float) -> list[tuple[float, float]]:
    reps: list[tuple[float, float]] = []
    order = np.lexsort((y, x))
    for i in order:
        for rx, ry in reps:
            if max(abs(x[i] - rx), abs(y[i] - ry)) <= tol:
                break
        else:
            reps.append((float(x[i]), float(y[i])))
    return reps


def fixed_points(
    fmap: MapFamily,
    box: Sequence[float] | None = None,
    starts: int = 40,
    dedup_tol: float = 1e-8,
) -> list[FixedPointInfo]:
    """Fixed points with their eigenvalues and stability type.

    The Hénon family uses the closed forms (origin first, then alpha).  The
    general family needs ``box = (x_min, x_max, y_min, y_max)``; Newton is
    started from a ``starts x starts`` grid and roots are merged within
    ``dedup_tol`` in the max-norm.  A :class:`MissedRootWarning` is issued
    when two merged clusters sit closer than ``1e-6``.
    """
    if fmap.is_henon:
        return [_info(fmap, Point2(0.0, 0.0)), _info(fmap, attracting_fixed_point(fmap))]
    if box is None:
        raise ValueError("a search box is required for the general family")
    gx = np.linspace(box[0], box[1], starts)
    gy = np.linspace(box[2], box[3], starts)
    X, Y = np.meshgrid(gx, gy)
    x, y, res = newton_periodic(fmap, 1, X, Y)
    good = res < 1e-12
    reps = _cluster(x[good], y[good], dedup_tol)
    for i, (ax_, ay_) in enumerate(reps):
        for bx_, by_ in reps[i + 1 :]:
            if max(abs(ax_ - bx_), abs(ay_ - by_)) < 1e-6:
                warnings.warn("fixed points within 1e-6 of each other: possible missed root", MissedRootWarning)
    reps.sort(key=lambda p: (max(abs(p[0]), abs(p[1])) > dedup_tol, p[0], p[1]))
    out = []
    for rx, ry in reps:
        if abs(rx) <= dedup_tol and abs(ry) <= dedup_tol:
            rx, ry = 0.0, 0.0
        out.append(_info(fmap, Point2(rx, ry)))
    return out


def conjugate_flip(p) -> Point2:
    """The reflection ``(x, y) -> (x, -y)``; conjugates ``delta`` to ``-delta``."""
    x, y = as_point(p)
    return Point2(x, -y)


def c2_distance_to_linear(h: ScalarMap, delta: float, interval: Sequence[float], samples: int = 10_000) -> float:
    """Sampled ``sup max(|h - delta*x|, |h' - delta|, |h''|)`` over ``interval``.

    This is an estimate over the declared interval only; behaviour of ``h``
    outside it is not seen.
    """
    if samples < 100:
        raise ValueError("use at least 100 samples")
    xs = np.linspace(float(interval[0]), float(interval[1]), int(samples))
    dev0 = np.abs(h.f(xs) - delta * xs)
    dev1 = np.abs(h.df(xs) - delta)
    dev2 = np.abs(np.broadcast_to(h.d2f(xs), xs.shape))
    return float(max(dev0.max(), dev1.max(), dev2.max()))
