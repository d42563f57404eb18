"""Simplexwise-linear boundary maps and pushing them through collapses.

A :class:`BoundaryMap` tracks the boundary surface of a manifold through a
collapse sequence.  The source is its own complex (the fixed domain, which
only ever gets subdivided); every source vertex stores an image as
barycentric coordinates in a *carrier* simplex of the target, and every top
source cell records one target cell whose closure contains its whole image.
The map is affine on each source cell, so continuity is automatic and the
"star maps into one target star" condition holds by construction.

The elementary retraction of a collapse ``(sigma, tau)`` is central
projection away from ``center = 2*b_tau - v_op``: that point lies behind
the free face, sees ``sigma`` entering through ``tau`` and exiting through
the far faces, and sends ``b_tau`` to ``v_op``.  In barycentric coordinates
of ``sigma`` the exit point has a closed form, and the basin mapping onto
the far face opposite tau-vertex ``t`` is exactly the region where ``t``'s
coordinate is minimal among tau-coordinates.  Source cells are cut along
the pullbacks of those coordinate-difference walls, new vertices get exact
retraction images, and the map stays affine per piece.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .complex_core import Complex, boundary, closure
from .errors import EmptyBoundary, IllegalStep

_CUT_KEY_DECIMALS = 9
_DEDUP = 1e-12


@dataclass(frozen=True, eq=False)
class BoundaryMap:
    """Simplexwise-affine map from a boundary surface into a complex.

    Fields
    ------
    source : Complex
        Triangulation of the (fixed) boundary; subdivided as steps demand.
    target : Complex
        The current partially collapsed complex.
    vertex_images : dict
        Source vertex id -> (carrier simplex of target, barycentric tuple).
    cell_carrier : dict
        Top source cell -> target cell whose closure contains its image.
    """

    source: Complex
    target: Complex
    vertex_images: dict
    cell_carrier: dict

    def image_point(self, vid):
        carrier, bary = self.vertex_images[vid]
        pts = self.target.points(carrier)
        return np.asarray(bary) @ pts

    def cell_image(self, cell):
        return np.array([self.image_point(v) for v in cell])


def initial_boundary_map(M):
    """Identity inclusion of the boundary surface of ``M``."""
    b = boundary(M)
    if not b.simps:
        raise EmptyBoundary("complex is closed; no boundary to map")
    src = b.as_complex()
    vertex_images = {v: ((v,), (1.0,)) for s in src.simps for v in s}
    cell_carrier = {cell: cell for cell in src.simplices_of_dim(src.dim)}
    return BoundaryMap(src, M, vertex_images, cell_carrier)


def image_support(bm):
    """All target simplices touched by the image (carriers and their faces)."""
    return frozenset(closure(set(bm.cell_carrier.values())))


def displacement(bm):
    """Exact sup-distance moved by the map: ``max |bm(x) - x|``.

    The map is affine on each source cell, so ``bm(x) - x`` is too, and the
    norm is convex: the maximum over each cell sits at a corner.  Scanning
    vertices is therefore exact, not a sample bound.
    """
    worst = 0.0
    for v in {w for s in bm.cell_carrier for w in s}:
        worst = max(worst, float(np.linalg.norm(bm.image_point(v) - bm.source.verts[v])))
    return worst


# -- geometry helpers ------------------------------------------------------


def barycentric_in(pts, y):
    """Barycentric coordinates of ``y`` with respect to simplex rows ``pts``."""
    pts = np.asarray(pts, dtype=float)
    a = np.vstack([pts.T, np.ones(len(pts))])
    b = np.append(np.asarray(y, dtype=float), 1.0)
    lam, *_ = np.linalg.lstsq(a, b, rcond=None)
    return lam


def evaluate(bm, point, cell=None):
    """Image of a source point (affine on its containing source cell)."""
    cells = [cell] if cell is not None else bm.cell_carrier
    point = np.asarray(point, dtype=float)
    best = None
    for c in cells:
        lam = barycentric_in(bm.source.points(c), point)
        err = -min(lam.min(), 0.0)
        res = np.linalg.norm(np.asarray(lam) @ bm.source.points(c) - point)
        score = err + res
        if best is None or score < best[0]:
            best = (score, c, lam)
    if best is None or best[0] > 1e-6:
        raise ValueError(f"point {point} not on the source surface")
    _, c, lam = best
    lam = np.clip(lam, 0.0, None)
    return lam / lam.sum() @ bm.cell_image(c)


def preimage_points(bm, y, tol=1e-7):
    """Distinct source points mapping to ``y`` (sheet count at ``y``)."""
    y = np.asarray(y, dtype=float)
    found = []
    for cell in bm.cell_carrier:
        img = bm.cell_image(cell)
        lam = barycentric_in(img, y)
        if lam.min() < -1e-9:
            continue
        lam = np.clip(lam, 0.0, None)
        lam = lam / lam.sum()
        if np.linalg.norm(lam @ img - y) > tol:
            continue
        found.append(lam @ bm.source.points(cell))
    out = []
    for p in found:
        if all(np.linalg.norm(p - q) > 10 * tol for q in out):
            out.append(p)
    return out


# -- pushing through one collapse ------------------------------------------


def _exit_through_far_faces(sigma, tau, lam):
    """Central-projection exit for a point with sigma-barycentrics ``lam``.

    Returns (far-face-or-smaller carrier tuple, barycentric tuple).
    """
    idx_tau = [sigma.index(t) for t in tau]
    lam = np.asarray(lam, dtype=float)
    lc = np.zeros(len(sigma))
    for i in idx_tau:
        lc[i] = 2.0 / len(tau)
    (op,) = set(range(len(sigma))) - set(idx_tau)
    lc[op] = -1.0
    # along p(u) = lc + u*(lam - lc) the tau-coordinate i vanishes at
    # u_i = lc_i / (lc_i - lam_i); only coordinates decreasing forward
    # (lam_i < lc_i) can exit, and the smallest one exits first
    u = np.inf
    kill = None
    for i in idx_tau:
        denom = lc[i] - lam[i]
        if denom > 1e-15:
            ui = lc[i] / denom
            if ui < u:
                u, kill = ui, i
    u = max(u, 1.0)
    out = lc + u * (lam - lc)
    if kill is not None:
        out[kill] = 0.0
    out = np.clip(out, 0.0, None)
    out = out / out.sum()
    carrier = tuple(v for v, l in zip(sigma, out) if l > 1e-12)
    bary = tuple(float(l) for l, v in zip(out, sigma) if v in carrier)
    total = sum(bary)
    bary = tuple(b / total for b in bary)
    return carrier, bary


def _dedup(corners):
    out = []
    for c in corners:
        if not out or np.linalg.norm(c[1] - out[-1][1]) > _DEDUP:
            out.append(c)
    if len(out) > 1 and np.linalg.norm(out[0][1] - out[-1][1]) <= _DEDUP:
        out.pop()
    return out


def _cut(a, b, t):
    return (None, a[1] + t * (b[1] - a[1]), a[2] + t * (b[2] - a[2]), a[3] + t * (b[3] - a[3]))


def _clip_polygon_lo(poly, vals, eps=1e-12):
    """Nonpositive side of a convex polygon (cyclic corner list).

    Corners are (vid_or_None, src_point, img_point, sigma_barycentrics);
    cut corners interpolate all three payloads (they are affine in the
    source point).
    """
    out = []
    n = len(poly)
    for i in range(n):
        a, va = poly[i], vals[i]
        b, vb = poly[(i + 1) % n], vals[(i + 1) % n]
        if va <= eps:
            out.append(a)
        if (va < -eps and vb > eps) or (va > eps and vb < -eps):
            out.append(_cut(a, b, va / (va - vb)))
    return _dedup(out)


def _clip_segment_lo(seg, vals, eps=1e-12):
    (a, b), (va, vb) = seg, vals
    if va <= eps and vb <= eps:
        return [a, b]
    if va >= -eps and vb >= -eps:
        return []
    cut = _cut(a, b, va / (va - vb))
    return [a, cut] if va < 0 else [cut, b]


def _basin_pieces(corners, ts, idx):
    """Clip a cell to the basin of each tau vertex (minimal coordinate).

    The basin of ``t`` is the region where ``t``'s sigma-barycentric is
    smallest among tau coordinates; clipping each basin independently keeps
    its walls exactly on the basin boundary, so edges shared with
    unaffected neighbor cells are never cut.  A functional vanishing on a
    whole piece is a tie between two basins; the smaller-labeled vertex
    claims it (the caller drops duplicate output cells anyway).
    """
    is_seg = len(corners) == 2
    min_c = 2 if is_seg else 3
    clip = _clip_segment_lo if is_seg else _clip_polygon_lo
    out = []
    for ti in ts:
        poly = corners
        alive = True
        for tj in ts:
            if tj == ti:
                continue
            vals = [c[3][idx[ti]] - c[3][idx[tj]] for c in poly]
            if max(abs(v) for v in vals) <= 1e-12:
                if tj < ti:
                    alive = False
                    break
                continue
            poly = clip(poly, vals)
            if len(poly) < min_c:
                alive = False
                break
        if alive and len(poly) >= min_c:
            out.append((ti, poly))
    return out


def _source_measure(poly):
    pts = [c[1] for c in poly]
    if len(pts) == 2:
        return np.linalg.norm(pts[1] - pts[0])
    area = 0.0
    for i in range(1, len(pts) - 1):
        area += 0.5 * np.linalg.norm(np.cross(pts[i] - pts[0], pts[i + 1] - pts[0]))
    return area


def push_through_collapse(bm, step, rr):
    """Compose the boundary map with one elementary retraction.

    Source cells whose carrier is ``sigma`` or ``tau`` are subdivided along
    the pullbacks of the basin walls and remapped onto the far faces; all
    other cells keep their assignment (the retraction is the identity off
    ``sigma``).  The target becomes the collapsed complex.
    """
    sigma, tau = step.sigma, step.tau
    if bm.target.parents(tau) != (sigma,) or bm.target.parents(sigma):
        raise IllegalStep(f"{tau} is not a free face of {sigma} in the target")

    from .collapse import collapse_step  # local import to avoid a cycle

    new_target = collapse_step(bm.target, step)
    affected = [c for c, car in bm.cell_carrier.items() if car == sigma or car == tau]
    if not affected:
        return BoundaryMap(bm.source, new_target, dict(bm.vertex_images), dict(bm.cell_carrier))

    sigma_pts = bm.target.points(sigma)
    far = {t: tuple(v for v in sigma if v != t) for t in tau}
    idx = {t: sigma.index(t) for t in tau}
    ts = list(tau)

    verts = dict(bm.source.verts)
    vertex_images = dict(bm.vertex_images)
    cell_carrier = dict(bm.cell_carrier)
    next_id = max(verts) + 1
    registry = {}
    remapped = set()
    emitted = set()

    for cell in affected:
        del cell_carrier[cell]

    new_cells = []
    for cell in affected:
        corners = [
            (v, bm.source.verts[v].copy(), bm.image_point(v), barycentric_in(sigma_pts, bm.image_point(v)))
            for v in cell
        ]
        for winner, poly in _basin_pieces(corners, ts, idx):
            if _source_measure(poly) < 1e-16:
                continue
            carrier = far[winner]
            ids = []
            for vid, src_pt, _img_pt, lam in poly:
                if vid is None:
                    key = tuple(np.round(src_pt, _CUT_KEY_DECIMALS))
                    vid = registry.get(key)
                    if vid is None:
                        vid = next_id
                        next_id += 1
                        registry[key] = vid
                        verts[vid] = src_pt
                        vertex_images[vid] = _exit_through_far_faces(sigma, tau, lam)
                elif vid not in remapped:
                    remapped.add(vid)
                    vertex_images[vid] = _exit_through_far_faces(sigma, tau, lam)
                ids.append(vid)
            if len(ids) == 2:
                seg = tuple(sorted(ids))
                if seg not in emitted:
                    emitted.add(seg)
                    new_cells.append((seg, carrier))
                continue
            apex = min(range(len(ids)), key=lambda i: ids[i])
            order = ids[apex:] + ids[:apex]
            for k in range(1, len(order) - 1):
                tri = tuple(sorted((order[0], order[k], order[k + 1])))
                if len(set(tri)) == 3 and tri not in emitted:
                    emitted.add(tri)
                    new_cells.append((tri, carrier))

    simps = set(cell_carrier)
    for c, car in new_cells:
        simps.add(c)
        cell_carrier[c] = car
    live = {v for s in simps for v in s}
    new_source = Complex({v: p for v, p in verts.items() if v in live}, simps, bm.source.labels)
    vertex_images = {v: im for v, im in vertex_images.items() if v in live}
    return BoundaryMap(new_source, new_target, vertex_images, cell_carrier)
