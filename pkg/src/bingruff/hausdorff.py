"""Hausdorff distance between realized complexes.

Each directed distance is computed by branch and bound: source simplices are
bisected along their longest edge while an AABB tree over the target
simplices supplies exact nearest-element distances for the bounds.  The
upper bound for a source piece uses the element nearest its centroid --
distance to a convex set is convex, so the maximum over the piece is
attained at a vertex.
"""

from __future__ import annotations

import heapq
import itertools

import numpy as np

from .errors import MismatchedAmbient

_LEAF = 4
_TINY = 1e-30


def _point_segment(p, a, b):
    ab = b - a
    denom = float(ab @ ab)
    if denom < _TINY:
        return float(np.linalg.norm(p - a))
    t = min(1.0, max(0.0, float((p - a) @ ab) / denom))
    return float(np.linalg.norm(p - (a + t * ab)))


def _point_triangle(p, a, b, c):
    # Region classification (Ericson); degenerate triangles fall back to edges.
    ab, ac, ap = b - a, c - a, p - a
    d1, d2 = float(ab @ ap), float(ac @ ap)
    if d1 <= 0 and d2 <= 0:
        return float(np.linalg.norm(ap))
    bp = p - b
    d3, d4 = float(ab @ bp), float(ac @ bp)
    if d3 >= 0 and d4 <= d3:
        return float(np.linalg.norm(bp))
    cp = p - c
    d5, d6 = float(ab @ cp), float(ac @ cp)
    if d6 >= 0 and d5 <= d6:
        return float(np.linalg.norm(cp))
    vc = d1 * d4 - d3 * d2
    if vc <= 0 and d1 >= 0 and d3 <= 0 and d1 - d3 > _TINY:
        return float(np.linalg.norm(p - (a + (d1 / (d1 - d3)) * ab)))
    vb = d5 * d2 - d1 * d6
    if vb <= 0 and d2 >= 0 and d6 <= 0 and d2 - d6 > _TINY:
        return float(np.linalg.norm(p - (a + (d2 / (d2 - d6)) * ac)))
    va = d3 * d6 - d5 * d4
    if va <= 0 and d4 - d3 >= 0 and d5 - d6 >= 0 and (d4 - d3) + (d5 - d6) > _TINY:
        w = (d4 - d3) / ((d4 - d3) + (d5 - d6))
        return float(np.linalg.norm(p - (b + w * (c - b))))
    total = va + vb + vc
    if abs(total) < _TINY:
        return min(
            _point_segment(p, a, b),
            _point_segment(p, b, c),
            _point_segment(p, a, c),
        )
    v, w = vb / total, vc / total
    return float(np.linalg.norm(p - (a + v * ab + w * ac)))


def _point_simplex(p, pts):
    """Exact distance from a point to a solid simplex of dimension <= 3."""
    k = len(pts)
    if k == 1:
        return float(np.linalg.norm(p - pts[0]))
    if k == 2:
        return _point_segment(p, pts[0], pts[1])
    if k == 3:
        return _point_triangle(p, pts[0], pts[1], pts[2])
    m = np.column_stack([pts[1] - pts[0], pts[2] - pts[0], pts[3] - pts[0]])
    try:
        lam = np.linalg.solve(m, p - pts[0])
        if lam.min() >= -1e-12 and lam.sum() <= 1 + 1e-12:
            return 0.0
    except np.linalg.LinAlgError:
        pass
    return min(
        _point_triangle(p, pts[i], pts[j], pts[k3])
        for i, j, k3 in itertools.combinations(range(4), 3)
    )


class _AABBTree:
    """Static tree over target simplices answering exact nearest queries."""

    __slots__ = ("elems", "root")

    def __init__(self, elems):
        self.elems = elems
        idx = list(range(len(elems)))
        self.root = self._build(idx)

    def _build(self, idx):
        pts = np.vstack([self.elems[i] for i in idx])
        lo, hi = pts.min(axis=0), pts.max(axis=0)
        if len(idx) <= _LEAF:
            return (lo, hi, None, None, idx)
        cents = np.array([self.elems[i].mean(axis=0) for i in idx])
        axis = int(np.argmax(cents.max(axis=0) - cents.min(axis=0)))
        order = sorted(range(len(idx)), key=lambda j: cents[j, axis])
        half = len(idx) // 2
        left = self._build([idx[j] for j in order[:half]])
        right = self._build([idx[j] for j in order[half:]])
        return (lo, hi, left, right, None)

    @staticmethod
    def _box_dist(p, lo, hi):
        d = np.maximum(np.maximum(lo - p, 0.0), p - hi)
        return float(np.linalg.norm(d))

    def nearest(self, p):
        """(distance, element index) of the nearest element to ``p``."""
        best = (np.inf, -1)
        heap = [(self._box_dist(p, self.root[0], self.root[1]), 0, self.root)]
        count = itertools.count(1)
        while heap:
            d_box, _, node = heapq.heappop(heap)
            if d_box >= best[0]:
                break
            lo, hi, left, right, idx = node
            if idx is not None:
                for i in idx:
                    d = _point_simplex(p, self.elems[i])
                    if d < best[0]:
                        best = (d, i)
                continue
            for child in (left, right):
                d = self._box_dist(p, child[0], child[1])
                if d < best[0]:
                    heapq.heappush(heap, (d, next(count), child))
        return best


def _realized_elements(x):
    verts = x.verts
    out = []
    for s in x.top_simplices():
        pts = np.array([verts[v] for v in s], dtype=float)
        if pts.shape[1] != 3:
            raise MismatchedAmbient(f"simplex {s} not realized in R^3")
        out.append(pts)
    return out


def _directed(src_elems, tree, tol):
    """max over the source of the distance to the target, to within tol/2."""
    lb = 0.0
    heap = []
    count = itertools.count()

    def push(pts):
        nonlocal lb
        for v in pts:
            lb = max(lb, tree.nearest(v)[0])
        e_idx = tree.nearest(pts.mean(axis=0))[1]
        epts = tree.elems[e_idx]
        ub = max(_point_simplex(v, epts) for v in pts)
        heapq.heappush(heap, (-ub, next(count), pts))

    for pts in src_elems:
        push(pts)
    while heap:
        ub = -heap[0][0]
        if ub - lb <= tol:
            return (ub + lb) / 2.0
        _, _, pts = heapq.heappop(heap)
        if len(pts) == 1:
            continue
        pairs = list(itertools.combinations(range(len(pts)), 2))
        i, j = max(pairs, key=lambda ij: np.linalg.norm(pts[ij[0]] - pts[ij[1]]))
        if np.linalg.norm(pts[i] - pts[j]) < 1e-14:
            continue  # piece has collapsed to a point; lb already exact here
        mid = (pts[i] + pts[j]) / 2.0
        for drop in (i, j):
            child = pts.copy()
            child[drop] = mid
            push(child)
    return lb


def hausdorff_distance(a, b, tol):
    """Symmetric Hausdorff distance between two realized complexes.

    Parameters
    ----------
    a, b : Complex or Subcomplex
        Realized in the same ambient R^3 coordinates.
    tol : float
        Absolute accuracy; the returned value is within tol of the true
        distance.

    Raises
    ------
    MismatchedAmbient
        If either input is not realized in R^3 coordinates.
    """
    assert tol > 0
    ea, eb = _realized_elements(a), _realized_elements(b)
    if not ea and not eb:
        return 0.0
    if not ea or not eb:
        return float("inf")
    d_ab = _directed(ea, _AABBTree(eb), tol)
    d_ba = _directed(eb, _AABBTree(ea), tol)
    return max(d_ab, d_ba)


__all__ = ["hausdorff_distance"]
