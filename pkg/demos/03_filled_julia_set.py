"""Bounded orbits live on one half of the unstable manifold.

Points with bounded orbits in both time directions are the two fixed points
and the part of the saddle's unstable manifold that falls into the basin of
alpha.  The origin is a flip saddle, so only one of the two unstable
branches can carry them.  We estimate the set on a grid and ask which
branch it hugs.
"""

import numpy as np

from henon_basins import GridSpec, estimate_K, make_henon, trace_manifold
from henon_basins.basin import point_segment_distances
from henon_basins.manifolds import Branch, ManifoldKind

fmap = make_henon(0.1, 2.0)
spec = GridSpec(-0.5, 1.5, -0.3, 0.3, 400, 400)
K = estimate_K(fmap, spec)
print(f"{len(K.yes)} cells with bounded orbits, {len(K.undecided)} undecided")

plus = trace_manifold(fmap, ManifoldKind.UNSTABLE, Branch.PLUS, 20.0)
minus = trace_manifold(fmap, ManifoldKind.UNSTABLE, Branch.MINUS, 20.0)
print(f"unstable Plus branch: {plus.status} after arclength {plus.arclength:.3f}, ends at {plus.points[-1].round(4)}")
print(f"unstable Minus branch: {minus.status} after arclength {minus.arclength:.3f}")

dp = point_segment_distances(K.yes, [plus])
dm = point_segment_distances(K.yes, [minus])
print(f"distance to Plus : max {dp.max():.4f}")
print(f"distance to Minus: median {np.median(dm):.4f}")
print("all bounded cells sit next to the Plus branch" if (dp <= dm).all() else "bounded cells on both branches")
