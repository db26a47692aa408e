"""Where do orbits of the Hénon map go?

At (delta, mu) = (0.1, 2) every orbit converges to the attracting fixed
point alpha, sits on the stable manifold of the saddle at the origin, or
escapes.  This script classifies a handful of points and shows which
escape region (if any) certified the escape.
"""

from henon_basins import attracting_fixed_point, classify_backward, classify_forward, classify_region, make_henon
from henon_basins.maps import HenonParams, fixed_points

fmap = make_henon(0.1, 2.0)
params = HenonParams(0.1, 2.0)

print("fixed points:")
for info in fixed_points(fmap):
    lm, lp = info.eigenvalues
    print(f"  ({info.location.x:.6f}, {info.location.y:.6f})  {info.stability.value:12s} eigenvalues {lm:+.6f} {lp:+.6f}")

alpha = attracting_fixed_point(fmap)
points = [(0.5, 0.1), (0.0, 0.0), (-1.0, 0.0), (2.0, 0.1), (3.0, -1.0), (1.0, -11.0), (1.0, 0.1), (1.01, 0.0)]
print("\nforward fates:")
for p in points:
    tags = ", ".join(sorted(t.value for t in classify_region(params, p)))
    print(f"  {str(p):14s} {classify_forward(fmap, p)}   regions: {tags}")

print("\nbackward fates (bounded backward orbits are rare):")
for p in [(0.0, 1.0), (alpha.x, alpha.y), (0.3, 0.0)]:
    print(f"  ({p[0]:.4f}, {p[1]:.4f}) {classify_backward(fmap, p)}")
