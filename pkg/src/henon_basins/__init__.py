"""Basins of attraction, invariant manifolds and sampled structural checks for Hénon-type maps."""

from .maps import (
    FixedPointInfo,
    MapFamily,
    Point2,
    ScalarMap,
    Stability,
    apply,
    apply_inverse,
    attracting_fixed_point,
    eigenvalues_at,
    fixed_points,
    jacobian,
    make_general,
    make_henon,
    scalar_map_from_spec,
)
from .orbits import Fate, FateKind, OrbitBudget, classify_backward, classify_forward, in_filled_julia, iterate
from .regions import RegionTag, classify_region
from .manifolds import ManifoldKind, Branch, trace_manifold, xbar_left, xbar_right, curve_C
from .basin import GridSpec, rasterize, extract_boundary, estimate_K, one_sided_hausdorff
from .verify import run_check, find_periodic_points, check_general_hypotheses

__version__ = "0.1.0"
