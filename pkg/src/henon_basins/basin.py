"""Grid rasters of orbit fates, basin boundaries and the bounded set.

Fates are stored as an ``(nx, ny)`` int8 array of :class:`FateKind` codes,
indexed ``fates[i, j]`` with ``i`` along x and ``j`` along y.
"""

from __future__ import annotations

import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import breadth_first_order, connected_components

from .manifolds import ManifoldCurve
from .maps import MapFamily
from .orbits import Direction, FateKind, OrbitBudget, classify_many

__all__ = [
    "GridSpec",
    "BasinRaster",
    "KEstimate",
    "rasterize",
    "extract_boundary",
    "undecided_points",
    "one_sided_hausdorff",
    "point_segment_distances",
    "estimate_K",
    "transition_graph",
    "backward_bounded_cells",
    "raster_to_ppm",
    "points_to_csv",
    "FATE_COLORS",
]

FATE_COLORS = {
    FateKind.TO_ALPHA: (0, 0, 255),
    FateKind.TO_INFINITY: (255, 255, 255),
    FateKind.TO_ORIGIN: (255, 0, 0),
    FateKind.UNDECIDED: (128, 128, 128),
}


@dataclass(frozen=True)
class GridSpec:
    x_min: float
    x_max: float
    y_min: float
    y_max: float
    nx: int
    ny: int

    def __post_init__(self):
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise ValueError("grid bounds must satisfy min < max")
        if self.nx < 1 or self.ny < 1:
            raise ValueError("grid needs at least one cell in each direction")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.nx

    @property
    def dy(self) -> float:
        return (self.y_max - self.y_min) / self.ny

    @property
    def diagonal(self) -> float:
        return float(np.hypot(self.dx, self.dy))

    def x_centers(self) -> np.ndarray:
        return self.x_min + (np.arange(self.nx) + 0.5) * self.dx

    def y_centers(self) -> np.ndarray:
        return self.y_min + (np.arange(self.ny) + 0.5) * self.dy

    def centers(self) -> tuple[np.ndarray, np.ndarray]:
        """Cell-center coordinate arrays of shape ``(nx, ny)``."""
        return np.meshgrid(self.x_centers(), self.y_centers(), indexing="ij")

    def cell_of(self, x, y) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Cell indices ``(i, j)`` containing the points, and an in-grid mask."""
        with np.errstate(invalid="ignore"):
            fi = np.floor((np.asarray(x) - self.x_min) / self.dx)
            fj = np.floor((np.asarray(y) - self.y_min) / self.dy)
        ok = (fi >= 0) & (fi < self.nx) & (fj >= 0) & (fj < self.ny)
        i = np.where(ok, fi, 0).astype(np.int64)
        j = np.where(ok, fj, 0).astype(np.int64)
        return i, j, ok


@dataclass(frozen=True, eq=False)
class BasinRaster:
    spec: GridSpec
    fates: np.ndarray
    params: dict
    iterations: np.ndarray | None = None

    def counts(self) -> dict[str, int]:
        c = np.bincount(self.fates.ravel().astype(np.int64), minlength=4)
        return {FateKind(k).label: int(c[k]) for k in range(4)}


@dataclass(frozen=True)
class KEstimate:
    yes: np.ndarray
    undecided: np.ndarray
    backward_bounded: np.ndarray
    spec: GridSpec


def rasterize(
    fmap: MapFamily,
    spec: GridSpec,
    budget: OrbitBudget | None = None,
    workers: int = 1,
) -> BasinRaster:
    """Forward fate of every cell center.

    With ``workers > 1`` column blocks are classified on a thread pool; each
    block writes a disjoint slice, so the result does not depend on the
    worker count.
    """
    budget = budget or OrbitBudget.default_for(fmap)
    X, Y = spec.centers()
    fates = np.empty((spec.nx, spec.ny), dtype=np.int8)
    iters = np.empty((spec.nx, spec.ny), dtype=np.int64)

    def work(sl: slice):
        k, it, _ = classify_many(fmap, X[sl], Y[sl], budget, Direction.FORWARD)
        fates[sl] = k
        iters[sl] = it

    workers = max(1, int(workers))
    if workers == 1:
        work(slice(0, spec.nx))
    else:
        bounds = np.linspace(0, spec.nx, min(workers * 4, spec.nx) + 1).astype(int)
        blocks = [slice(a, b) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(work, blocks))
    return BasinRaster(spec, fates, fmap.describe(), iters)


def _neighbor_differs(fates: np.ndarray, decided_only: bool = True) -> np.ndarray:
    out = np.zeros(fates.shape, dtype=bool)
    for axis in (0, 1):
        for shift in (1, -1):
            nb = np.roll(fates, shift, axis=axis)
            valid = np.ones(fates.shape, dtype=bool)
            edge = [slice(None)] * 2
            edge[axis] = 0 if shift == 1 else -1
            valid[tuple(edge)] = False
            diff = nb != fates
            if decided_only:
                diff &= nb != FateKind.UNDECIDED
            out |= valid & diff
    return out


def extract_boundary(raster: BasinRaster) -> np.ndarray:
    """Centers of ``ToAlpha`` cells with a 4-neighbour of another decided fate.

    Returns an ``(N, 2)`` array, empty when there is no such cell.
    """
    f = raster.fates
    mask = (f == FateKind.TO_ALPHA) & _neighbor_differs(f)
    X, Y = raster.spec.centers()
    return np.column_stack([X[mask], Y[mask]])


def undecided_points(raster: BasinRaster) -> np.ndarray:
    X, Y = raster.spec.centers()
    mask = raster.fates == FateKind.UNDECIDED
    return np.column_stack([X[mask], Y[mask]])


def _as_segments(curves) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(curves, ManifoldCurve):
        curves = [curves]
    a_list, b_list = [], []
    for c in curves:
        if isinstance(c, ManifoldCurve):
            a, b = c.segments()
            if len(c.points) == 1:
                a = b = c.points
        else:
            p = np.asarray(c, dtype=float).reshape(-1, 2)
            a, b = (p[:-1], p[1:]) if len(p) > 1 else (p, p)
        a_list.append(a)
        b_list.append(b)
    return np.concatenate(a_list), np.concatenate(b_list)


def point_segment_distances(points, curves, chunk: int = 256) -> np.ndarray:
    """Euclidean distance from each point to the nearest segment of ``curves``.

    ``curves`` is a :class:`ManifoldCurve`, an ``(M, 2)`` polyline array, or a
    sequence of either.  A single-point polyline acts as a point.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    a, b = _as_segments(curves)
    if len(a) == 0:
        raise ValueError("curve has no segments")
    ab = b - a
    L2 = np.einsum("ij,ij->i", ab, ab)
    safe = np.where(L2 > 0, L2, 1.0)
    out = np.empty(len(pts))
    for s in range(0, len(pts), chunk):
        p = pts[s : s + chunk, None, :]
        ap = p - a[None]
        t = np.clip(np.einsum("mkj,kj->mk", ap, ab) / safe, 0.0, 1.0)
        t = np.where(L2 > 0, t, 0.0)
        proj = a[None] + t[..., None] * ab[None]
        d = np.hypot(p[..., 0] - proj[..., 0], p[..., 1] - proj[..., 1])
        out[s : s + chunk] = d.min(axis=1)
    return out


def one_sided_hausdorff(points, curves) -> float:
    """Largest distance from a point of ``points`` to the polyline(s)."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(pts) == 0:
        raise ValueError("point set is empty")
    return float(point_segment_distances(pts, curves).max())


def transition_graph(fmap: MapFamily, spec: GridSpec, sub: int = 4) -> sp.csr_matrix:
    """Cell-to-cell graph of the forward map.

    Each cell is sampled on a ``(sub+1) x (sub+1)`` lattice including its
    corners; an edge ``c -> d`` is present when some sample of ``c`` lands in
    ``d``.  Images leaving the grid are dropped.
    """
    n = spec.nx * spec.ny
    I, J = np.meshgrid(np.arange(spec.nx), np.arange(spec.ny), indexing="ij")
    I, J = I.ravel(), J.ravel()
    cid = I * spec.ny + J
    src, dst = [], []
    frac = np.arange(sub + 1) / sub
    with np.errstate(all="ignore"):
        for a in frac:
            for b in frac:
                px = spec.x_min + (I + a) * spec.dx
                py = spec.y_min + (J + b) * spec.dy
                fx, fy = fmap.step(px, py)
                ti, tj, ok = spec.cell_of(fx, fy)
                src.append(cid[ok])
                dst.append((ti * spec.ny + tj)[ok])
    src = np.concatenate(src)
    dst = np.concatenate(dst)
    G = sp.csr_matrix((np.ones(src.size, dtype=np.int8), (src, dst)), shape=(n, n))
    G.data[:] = 1
    return G


def backward_bounded_cells(G: sp.csr_matrix) -> np.ndarray:
    """Cells reachable in the transition graph from a recurrent cell.

    A cell is recurrent when it lies on a cycle (a strongly connected
    component with more than one cell, or a self-loop).  Returns a flat
    boolean mask.
    """
    n = G.shape[0]
    _, lab = connected_components(G, directed=True, connection="strong")
    sizes = np.bincount(lab)
    rec = (sizes[lab] > 1) | (G.diagonal() != 0)
    if not rec.any():
        return np.zeros(n, dtype=bool)
    # super-source feeding every recurrent cell
    rec_idx = np.nonzero(rec)[0]
    row = sp.csr_matrix((np.ones(rec_idx.size, dtype=np.int8), (np.zeros(rec_idx.size, dtype=np.int64), rec_idx)), shape=(1, n))
    Gs = sp.bmat([[G, sp.csr_matrix((n, 1), dtype=np.int8)], [row, sp.csr_matrix((1, 1), dtype=np.int8)]], format="csr")
    order = breadth_first_order(Gs, n, directed=True, return_predecessors=False)
    out = np.zeros(n + 1, dtype=bool)
    out[order] = True
    return out[:n]


def estimate_K(
    fmap: MapFamily,
    spec: GridSpec,
    budget: OrbitBudget | None = None,
    sub: int = 4,
    workers: int = 1,
) -> KEstimate:
    """Cell centers estimated to have bounded orbits in both time directions.

    The forward half classifies every cell center.  Backward boundedness is
    read off the cell transition graph: a cell counts when it can be reached
    from a recurrent cell, i.e. it carries an image of a long backward orbit
    that stays in the grid.  Pointwise backward iteration is useless here
    because the inverse expands transversally to the unstable manifold.

    ``yes`` holds centers that are backward-bounded and converge forward;
    ``undecided`` those that are backward-bounded with an undecided forward
    fate.
    """
    raster = rasterize(fmap, spec, budget, workers)
    G = transition_graph(fmap, spec, sub)
    bb = backward_bounded_cells(G).reshape(spec.nx, spec.ny)
    f = raster.fates
    yes = bb & ((f == FateKind.TO_ALPHA) | (f == FateKind.TO_ORIGIN))
    und = bb & (f == FateKind.UNDECIDED)
    X, Y = spec.centers()
    return KEstimate(
        yes=np.column_stack([X[yes], Y[yes]]),
        undecided=np.column_stack([X[und], Y[und]]),
        backward_bounded=bb,
        spec=spec,
    )


def raster_to_ppm(raster: BasinRaster) -> bytes:
    """Binary PPM image, top row at ``y_max``."""
    spec = raster.spec
    lut = np.zeros((4, 3), dtype=np.uint8)
    for k, rgb in FATE_COLORS.items():
        lut[int(k)] = rgb
    img = lut[raster.fates.T[::-1].astype(np.int64)]
    header = f"P6\n{spec.nx} {spec.ny}\n255\n".encode("ascii")
    return header + img.tobytes()


def points_to_csv(points: Iterable[Sequence[float]]) -> str:
    buf = io.StringIO()
    buf.write("x,y\n")
    for x, y in np.asarray(list(points) if not isinstance(points, np.ndarray) else points, dtype=float).reshape(-1, 2):
        buf.write(f"{x:.17g},{y:.17g}\n")
    return buf.getvalue()
