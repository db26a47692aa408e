"""Closed-form regions of the plane for the Hénon family.

Every predicate takes array-like ``x, y`` and returns a boolean array (or a
numpy bool for scalars).  Boundaries are closed as in the definitions; no
iteration is ever performed here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .maps import HenonParams, Point2, as_point

__all__ = [
    "RegionTag",
    "DeltaThresholds",
    "delta_thresholds",
    "classify_region",
    "in_wdelta",
    "in_beta_cone",
    "in_right_wedge",
    "in_q4_right_wedge",
    "in_q4_deep_strip",
    "in_adelta",
    "in_strip",
    "in_brect",
    "in_polydisk",
]


class RegionTag(Enum):
    W_DELTA = "WDelta"
    BETA_CONE = "BetaCone"
    RIGHT_WEDGE = "RightWedge"
    A_DELTA = "ADelta"
    STRIP_S = "StripS"
    B_RECT = "BRect"
    Q4_RIGHT_WEDGE = "Q4RightWedge"
    Q4_DEEP_STRIP = "Q4DeepStrip"
    POLYDISK = "Polydisk"
    OTHER = "Other"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class DeltaThresholds:
    lemma4_bound: float
    lemma6_bound: float
    prop16i_bound: float
    beta: float
    delta0: float


def delta_thresholds(delta: float, mu: float) -> DeltaThresholds:
    """Closed-form coupling thresholds and the derived cone/strip constants.

    ``lemma4_bound = max(mu - 1, 1)`` bounds the backward-escape wedge,
    ``lemma6_bound = sqrt(mu - 1)`` the right wedge, ``prop16i_bound =
    sqrt(3 mu (mu - 1))`` the fourth-quadrant wedge.  ``beta`` is the slope
    of the escaping cone and ``delta0`` the depth of the escaping strip.
    """
    if not (1.0 < mu < 3.0):
        raise ValueError(f"mu must lie in (1, 3), got {mu}")
    if not delta > 0.0:
        raise ValueError(f"delta must be positive, got {delta}")
    return DeltaThresholds(
        lemma4_bound=max(mu - 1.0, 1.0),
        lemma6_bound=math.sqrt(mu - 1.0),
        prop16i_bound=math.sqrt(3.0 * mu * (mu - 1.0)),
        beta=delta / (mu - 1.0),
        delta0=(2.0 * delta * delta / (mu - 1.0) + 1.0) / delta,
    )


def _beta(delta: float, mu: float) -> float:
    return delta / (mu - 1.0)


def in_wdelta(x, y, delta: float):
    ay = np.abs(y)
    d = abs(delta)
    return (ay >= 2.0 * d) & (ay >= d * np.abs(x))


def in_beta_cone(x, y, delta: float, mu: float):
    beta = _beta(delta, mu)
    return (x <= np.minimum(-beta * y, 0.0)) & ~((x == 0) & (y == 0))


def in_right_wedge(x, y, delta: float):
    return (x >= 2.0) & (y >= 0.0) & (y <= delta * x)


def in_q4_right_wedge(x, y):
    return (x >= 2.0) & (y <= 0.0)


def in_q4_deep_strip(x, y, delta: float, mu: float):
    delta0 = (2.0 * delta * delta / (mu - 1.0) + 1.0) / delta
    return (x >= 0.0) & (x <= 2.0) & (y <= -delta0)


def in_adelta(x, y, delta: float):
    return (x >= 0.0) & (x <= 1.0) & (y >= 0.0) & (y <= 2.0 * delta) & ~((x == 0) & (y == 0))


def in_strip(x, y, delta: float):
    return (y > 0.0) & (y < 2.0 * delta)


def in_brect(x, y, delta: float):
    return (x >= 1.0) & (x <= 2.0) & (y >= 0.0) & (y <= 2.0 * delta)


def in_polydisk(x, y, center: Point2, r: float):
    return (np.abs(x - center.x) <= r) & (np.abs(y - center.y) <= r)


def classify_region(params: HenonParams, p, r: float | None = None) -> frozenset[RegionTag]:
    """All region tags whose defining inequalities hold at ``p``.

    Regions that need ``mu - 1`` in a denominator are skipped when
    ``mu <= 1``.  The polydisk around the attracting fixed point is tested
    only when a radius ``r`` is given.  Returns ``{OTHER}`` when nothing holds.
    """
    x, y = as_point(p)
    d, mu = params.delta, params.mu
    tags = set()
    if in_wdelta(x, y, d):
        tags.add(RegionTag.W_DELTA)
    if mu > 1.0:
        if in_beta_cone(x, y, d, mu):
            tags.add(RegionTag.BETA_CONE)
        if in_q4_deep_strip(x, y, d, mu):
            tags.add(RegionTag.Q4_DEEP_STRIP)
    if in_right_wedge(x, y, d):
        tags.add(RegionTag.RIGHT_WEDGE)
    if in_q4_right_wedge(x, y):
        tags.add(RegionTag.Q4_RIGHT_WEDGE)
    if in_adelta(x, y, d):
        tags.add(RegionTag.A_DELTA)
    if in_strip(x, y, d):
        tags.add(RegionTag.STRIP_S)
    if in_brect(x, y, d):
        tags.add(RegionTag.B_RECT)
    if r is not None and mu != 0:
        xa = 1.0 - 1.0 / mu + d * d / mu
        if in_polydisk(x, y, Point2(xa, d * xa), r):
            tags.add(RegionTag.POLYDISK)
    return frozenset(tags) if tags else frozenset({RegionTag.OTHER})
