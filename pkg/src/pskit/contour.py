"""Level sets of sampled fields, polygon areas and curve distances."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np
from scipy.spatial import cKDTree

from .wigner import ScalarField

# cell corners: bit 0 = (i, j), bit 1 = (i+1, j), bit 2 = (i+1, j+1), bit 3 = (i, j+1)
# edges:        0 = bottom (p=j), 1 = right (x=i+1), 2 = top (p=j+1), 3 = left (x=i)
_SEGMENTS = {
    1: ((3, 0),), 2: ((0, 1),), 3: ((3, 1),), 4: ((1, 2),),
    6: ((0, 2),), 7: ((3, 2),), 8: ((2, 3),), 9: ((0, 2),),
    11: ((1, 2),), 12: ((3, 1),), 13: ((0, 1),), 14: ((3, 0),),
}
# saddles, keyed by (case, center_is_high)
_SADDLES = {
    (5, True): ((0, 1), (2, 3)), (5, False): ((3, 0), (1, 2)),
    (10, True): ((3, 0), (1, 2)), (10, False): ((0, 1), (2, 3)),
}


@dataclass(frozen=True)
class Polyline:
    points: np.ndarray
    closed: bool = False

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float).reshape(-1, 2)
        if pts.shape[0] < 2:
            raise ValueError("a polyline needs at least 2 points")
        if np.any(np.all(np.diff(pts, axis=0) == 0, axis=1)):
            raise ValueError("consecutive polyline points must be distinct")
        object.__setattr__(self, "points", pts)

    def __len__(self):
        return self.points.shape[0]

    @classmethod
    def from_points(cls, points, closed: bool = False) -> "Polyline":
        """Build a polyline after dropping repeated consecutive points."""
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        if len(pts) > 1:
            keep = np.r_[True, np.any(np.diff(pts, axis=0) != 0, axis=1)]
            pts = pts[keep]
        if closed and len(pts) > 2 and np.all(pts[0] == pts[-1]):
            pts = pts[:-1]
        return cls(pts, closed)

    def densify(self, step: float) -> np.ndarray:
        pts = np.vstack([self.points, self.points[:1]]) if self.closed else self.points
        out = [pts[:1]]
        for a, b in zip(pts[:-1], pts[1:]):
            m = max(1, int(np.ceil(np.hypot(*(b - a)) / step)))
            t = np.arange(1, m + 1)[:, None] / m
            out.append(a + t * (b - a))
        return np.vstack(out)


PolylineSet = Union[Polyline, Sequence[Polyline]]


def _edge_point(edge, i, j, xs, ps, v, level):
    if edge == 0:
        a, b = (i, j), (i + 1, j)
    elif edge == 1:
        a, b = (i + 1, j), (i + 1, j + 1)
    elif edge == 2:
        a, b = (i, j + 1), (i + 1, j + 1)
    else:
        a, b = (i, j), (i, j + 1)
    va, vb = v[a], v[b]
    t = (level - va) / (vb - va)
    x = xs[a[0]] + t * (xs[b[0]] - xs[a[0]])
    p = ps[a[1]] + t * (ps[b[1]] - ps[a[1]])
    key = ("h", a[0], a[1]) if edge in (0, 2) else ("v", a[0], a[1])
    return key, (x, p)


def _walk(start, links, seen):
    chain = [start]
    seen.add(start)
    prev, cur = None, start
    while True:
        nxt = next((k for k in links[cur] if k != prev), None)
        if nxt is None:
            return chain, False
        if nxt == start:
            return chain, True
        if nxt in seen:
            return chain, False
        chain.append(nxt)
        seen.add(nxt)
        prev, cur = cur, nxt


def extract_level_set(field: ScalarField, level: float) -> list[Polyline]:
    """Marching squares with linear edge interpolation.

    Corners at or above ``level`` count as high. Saddle cells are split by
    comparing the mean of the four corners with the level. Cells touching a
    NaN sample are skipped.
    """
    v = field.values
    xs, ps = field.grid.xs, field.grid.ps
    high = v >= level
    bl, br, tr, tl = high[:-1, :-1], high[1:, :-1], high[1:, 1:], high[:-1, 1:]
    case = bl * 1 + br * 2 + tr * 4 + tl * 8
    finite = np.isfinite(v)
    usable = finite[:-1, :-1] & finite[1:, :-1] & finite[1:, 1:] & finite[:-1, 1:]
    active = usable & (case != 0) & (case != 15)

    points = {}
    links = defaultdict(list)
    for i, j in zip(*np.nonzero(active)):
        c = int(case[i, j])
        if c in (5, 10):
            center = 0.25 * (v[i, j] + v[i + 1, j] + v[i + 1, j + 1] + v[i, j + 1])
            segs = _SADDLES[(c, bool(center >= level))]
        else:
            segs = _SEGMENTS[c]
        for e0, e1 in segs:
            k0, pt0 = _edge_point(e0, i, j, xs, ps, v, level)
            k1, pt1 = _edge_point(e1, i, j, xs, ps, v, level)
            points[k0], points[k1] = pt0, pt1
            links[k0].append(k1)
            links[k1].append(k0)

    # open chains start at degree-1 keys (grid boundary); the rest are cycles
    seen = set()
    polylines = []
    starts = sorted(k for k, nb in links.items() if len(nb) == 1) + sorted(links)
    for start in starts:
        if start in seen:
            continue
        chain, closed = _walk(start, links, seen)
        try:
            polylines.append(Polyline.from_points([points[k] for k in chain],
                                                  closed=closed and len(chain) > 2))
        except ValueError:
            continue  # chain collapsed onto a single point
    return polylines


def shoelace(points: np.ndarray) -> float:
    x, y = points[:, 0], points[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def enclosed_area(poly: Polyline) -> float:
    if not poly.closed:
        raise ValueError("enclosed area is defined only for closed polylines")
    if len(poly) < 3:
        raise ValueError("a closed polyline needs at least 3 points")
    return abs(shoelace(poly.points))


def _as_list(curves: PolylineSet) -> list[Polyline]:
    if isinstance(curves, Polyline):
        return [curves]
    return list(curves)


def _default_step(curves: Iterable[Polyline]) -> float:
    seg = [np.hypot(*np.diff(c.points, axis=0).T) for c in curves]
    lengths = np.concatenate(seg) if seg else np.array([])
    lengths = lengths[lengths > 0]
    pts = np.vstack([c.points for c in curves])
    extent = float(np.hypot(*np.ptp(pts, axis=0)))
    if not lengths.size or extent == 0:
        return 1.0
    # near-duplicate vertices must not drive the densification to huge sizes
    return max(0.5 * float(np.median(lengths)), 1e-4 * extent)


def hausdorff_distance(a: PolylineSet, b: PolylineSet, step: float | None = None) -> float:
    """Symmetric Hausdorff distance between two curves (or unions of curves).

    Both sides are densified to ``step`` before the point-set comparison.
    Pass half the finest grid cell as ``step`` when comparing gridded
    contours; the default is half the median segment length of the inputs,
    floored at 1e-4 of their bounding-box diagonal.
    """
    a, b = _as_list(a), _as_list(b)
    if not a or not b:
        raise ValueError("both curve sets must be nonempty")
    if step is None:
        step = _default_step(a + b)
    pa = np.vstack([c.densify(step) for c in a])
    pb = np.vstack([c.densify(step) for c in b])
    d_ab = cKDTree(pb).query(pa)[0].max()
    d_ba = cKDTree(pa).query(pb)[0].max()
    return float(max(d_ab, d_ba))
