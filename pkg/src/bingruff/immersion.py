"""Immersion certificates for boundary maps, and collapse classification.

A simplexwise-affine map of a closed surface is a locally flat immersion
iff around every source vertex: (1) the star maps injectively, (2) the
link maps to an embedded circle of directions, and (3) the image is
two-sided along every incident edge.  For carrier-respecting maps these
reduce to checks we can do exactly:

* different target 2-cells only meet along shared faces, so genuine sheet
  overlaps are always *same-carrier* overlaps — a 2-D polygon intersection
  test per same-carrier cell pair;
* the star is the cone over the link (affine maps send segments from the
  vertex to segments from the image), so distinct, non-crossing direction
  arcs on a small sphere force ray-level injectivity;
* a fold flat onto one cell shows up as two cells of the same carrier on
  the same side of their shared edge's image line.

``classify_collapse`` simulates one elementary collapse on a scratch copy
of the map and re-checks only the vertices whose stars changed; the input
map is never mutated.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .collapse import RetractionRecord
from .plmaps import BoundaryMap, barycentric_in, push_through_collapse

_AREA_TOL = 1e-13
_DIR_TOL = 1e-9


@dataclass(frozen=True)
class VertexWitness:
    star_injective: bool
    link_embedded: bool
    bicollar: bool
    location: tuple | None = None  # image coordinates, recorded on failure

    @property
    def ok(self):
        return self.star_injective and self.link_embedded and self.bicollar


@dataclass(frozen=True, eq=False)
class ImmersionCertificate:
    """Per-vertex witness table for one boundary map."""

    witnesses: dict
    valid: bool
    checked: tuple

    def failing(self):
        return tuple(v for v in self.checked if not self.witnesses[v].ok)


@dataclass(frozen=True, eq=False)
class DangerReport:
    step: object
    verdict: str  # "safe" | "dangerous"
    failing_vertices: tuple
    certificate: ImmersionCertificate = field(repr=False, default=None)
    pushed: BoundaryMap = field(repr=False, default=None)

    @property
    def dangerous(self):
        return self.verdict == "dangerous"


def certificate_text(cert):
    """Line-oriented export: one pass/fail row per vertex."""
    lines = [
        "immersion-certificate v1",
        f"vertices {len(cert.checked)} valid {'yes' if cert.valid else 'no'}",
    ]
    for v in cert.checked:
        w = cert.witnesses[v]
        row = (
            f"v {v}"
            f" star {'ok' if w.star_injective else 'FAIL'}"
            f" link {'ok' if w.link_embedded else 'FAIL'}"
            f" collar {'ok' if w.bicollar else 'FAIL'}"
        )
        if w.location is not None:
            row += " at " + " ".join(repr(float(t)) for t in w.location)
        lines.append(row)
    return "\n".join(lines) + "\n"


# -- small 2-D / spherical primitives ---------------------------------------


def _plane_basis(pts):
    p0 = pts[0]
    e1 = pts[1] - p0
    n1 = np.linalg.norm(e1)
    if n1 < 1e-14:
        return None
    e1 = e1 / n1
    n = np.cross(e1, pts[2] - p0)
    nn = np.linalg.norm(n)
    if nn < 1e-14:
        return None
    n = n / nn
    return p0, e1, np.cross(n, e1), n


def _project(basis, x):
    p0, e1, e2, _ = basis
    d = x - p0
    return np.array([d @ e1, d @ e2])


def _shoelace(poly):
    a = 0.0
    for i in range(len(poly)):
        x1, y1 = poly[i]
        x2, y2 = poly[(i + 1) % len(poly)]
        a += x1 * y2 - x2 * y1
    return 0.5 * a


def _clip_convex(subject, clip):
    """Area of intersection of two convex 2-D polygons (any winding)."""
    if _shoelace(clip) < 0:
        clip = clip[::-1]
    out = list(subject)
    for i in range(len(clip)):
        a, b = clip[i], clip[(i + 1) % len(clip)]
        edge = np.array([b[0] - a[0], b[1] - a[1]])
        inside = lambda p: edge[0] * (p[1] - a[1]) - edge[1] * (p[0] - a[0]) >= -1e-14
        cur, out = out, []
        for j in range(len(cur)):
            p, q = cur[j], cur[(j + 1) % len(cur)]
            if inside(p):
                out.append(p)
            if inside(p) != inside(q):
                t_num = edge[1] * (p[0] - a[0]) - edge[0] * (p[1] - a[1])
                t_den = edge[0] * (q[1] - p[1]) - edge[1] * (q[0] - p[0])
                if abs(t_den) > 1e-30:
                    t = t_num / t_den
                    out.append((p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])))
        if not out:
            return 0.0
    return abs(_shoelace(out))


def _arc_contains(p, q, n, w):
    return np.dot(np.cross(p, w), n) >= -1e-12 and np.dot(np.cross(w, q), n) >= -1e-12


def _arcs_cross(p, q, r, s):
    """Do the minor great-circle arcs p->q and r->s share a point?

    Endpoint coincidences are ruled out before calling (directions are
    pairwise distinct), so on a shared great circle any overlap contains
    some endpoint of the other arc.
    """
    n1 = np.cross(p, q)
    n2 = np.cross(r, s)
    w = np.cross(n1, n2)
    norm = np.linalg.norm(w)
    if norm < 1e-12:
        return (
            _arc_contains(p, q, n1, r)
            or _arc_contains(p, q, n1, s)
            or _arc_contains(r, s, n2, p)
            or _arc_contains(r, s, n2, q)
        )
    w = w / norm
    for cand in (w, -w):
        if _arc_contains(p, q, n1, cand) and _arc_contains(r, s, n2, cand):
            return True
    return False


# -- the three local checks --------------------------------------------------


def _star_cells(source):
    stars = {}
    for cell in source.simplices_of_dim(source.dim):
        for v in cell:
            stars.setdefault(v, []).append(cell)
    return stars


def _cell_area(img):
    return 0.5 * np.linalg.norm(np.cross(img[1] - img[0], img[2] - img[0]))


def _star_injective(bm, v, cells, img):
    for c in cells:
        pts = [img[w] for w in c]
        if len(c) == 2:
            if np.linalg.norm(pts[1] - pts[0]) < _AREA_TOL:
                return False
        elif _cell_area(np.array(pts)) < _AREA_TOL:
            return False
    if bm.source.dim == 1:
        return True
    for i in range(len(cells)):
        for j in range(i + 1, len(cells)):
            a, b = cells[i], cells[j]
            if bm.cell_carrier[a] != bm.cell_carrier[b]:
                continue
            # nondegeneracy above guarantees a 2-D carrier here
            basis = _plane_basis(np.array([img[w] for w in a]))
            if basis is None:
                return False
            pa = [tuple(_project(basis, img[w])) for w in a]
            pb = [tuple(_project(basis, img[w])) for w in b]
            area = _clip_convex(pa, pb)
            limit = 1e-6 * min(abs(_shoelace(pa)), abs(_shoelace(pb))) + 1e-13
            if area > limit:
                return False
    return True


def _link_cycle(v, cells):
    """Ordered link of v: (vertices, closed?) or None if not a circle/arc."""
    adj = {}
    for c in cells:
        rest = [w for w in c if w != v]
        if len(rest) != 2:
            return None
        a, b = rest
        adj.setdefault(a, []).append(b)
        adj.setdefault(b, []).append(a)
    if any(len(nb) > 2 for nb in adj.values()):
        return None
    ends = sorted(w for w, nb in adj.items() if len(nb) == 1)
    if len(ends) not in (0, 2):
        return None
    closed = not ends
    start = min(adj) if closed else ends[0]
    walk = [start, adj[start][0]]
    while True:
        prev, cur = walk[-2], walk[-1]
        nbs = adj[cur]
        if len(nbs) == 1:
            break
        nxt = nbs[0] if nbs[0] != prev else nbs[1]
        if closed and nxt == start:
            break
        walk.append(nxt)
        if len(walk) > 2 * len(cells) + 2:
            return None
    return (walk, closed) if len(walk) == len(adj) else None


def _link_embedded(bm, v, cells, img):
    y = img[v]
    if bm.source.dim == 1:
        rest = {w for c in cells for w in c if w != v}
        if len(rest) != 2:
            return False
        dirs = []
        for w in rest:
            d = img[w] - y
            nd = np.linalg.norm(d)
            if nd < _AREA_TOL:
                return False
            dirs.append(d / nd)
        return np.linalg.norm(dirs[0] - dirs[1]) > _DIR_TOL
    link = _link_cycle(v, cells)
    if link is None:
        return False
    walk, closed = link
    dirs = []
    for w in walk:
        d = img[w] - y
        nd = np.linalg.norm(d)
        if nd < _AREA_TOL:
            return False
        dirs.append(d / nd)
    k = len(dirs)
    for i in range(k):
        for j in range(i + 1, k):
            if np.linalg.norm(dirs[i] - dirs[j]) < _DIR_TOL:
                return False
    n_arcs = k if closed else k - 1
    arcs = [(dirs[i], dirs[(i + 1) % k]) for i in range(n_arcs)]
    for i in range(n_arcs):
        for j in range(i + 1, n_arcs):
            adjacent = j == i + 1 or (closed and (j + 1) % n_arcs == i)
            if adjacent:
                continue
            if _arcs_cross(arcs[i][0], arcs[i][1], arcs[j][0], arcs[j][1]):
                return False
    return True


def _collar_failures(bm, edges, stars):
    """Source vertices at which some incident edge folds flat."""
    bad = set()
    for e in edges:
        cells = [c for c in stars.get(e[0], ()) if set(e) <= set(c)]
        if len(cells) != 2:
            continue
        c1, c2 = cells
        if bm.cell_carrier[c1] != bm.cell_carrier[c2]:
            continue
        carrier = bm.cell_carrier[c1]
        if len(carrier) < 3:
            bad.update(e)
            continue
        basis = _plane_basis(bm.target.points(carrier))
        if basis is None:
            bad.update(e)
            continue
        n = basis[3]
        pu, pw = bm.image_point(e[0]), bm.image_point(e[1])
        axis = pw - pu
        alen = np.linalg.norm(axis)
        if alen < _AREA_TOL:
            bad.update(e)
            continue
        sides = []
        for c in (c1, c2):
            (o,) = set(c) - set(e)
            off = bm.image_point(o) - pu
            olen = np.linalg.norm(off)
            # normalized: the sine of the angle off the shared image line
            sides.append(np.dot(np.cross(axis, off), n) / (alen * max(olen, 1e-30)))
        if sides[0] * sides[1] > -1e-12:
            bad.update(e)
    return bad


def check_immersion(bm, only_vertices=None):
    """Certify local flat-immersedness of a boundary map, vertex by vertex."""
    stars = _star_cells(bm.source)
    scope = sorted(stars) if only_vertices is None else sorted(set(only_vertices) & set(stars))
    img = {}
    for v in stars:
        img[v] = bm.image_point(v)

    if bm.source.dim == 1:
        collar_bad = set()
    else:
        edges = {
            tuple(sorted((v, w)))
            for v in scope
            for c in stars[v]
            for w in c
            if w != v
        }
        collar_bad = _collar_failures(bm, sorted(edges), stars)

    witnesses = {}
    all_ok = True
    for v in scope:
        cells = stars[v]
        star_ok = _star_injective(bm, v, cells, img)
        link_ok = _link_embedded(bm, v, cells, img)
        collar_ok = v not in collar_bad
        ok = star_ok and link_ok and collar_ok
        witnesses[v] = VertexWitness(
            star_ok,
            link_ok,
            collar_ok,
            None if ok else tuple(float(t) for t in img[v]),
        )
        all_ok = all_ok and ok
    return ImmersionCertificate(witnesses, all_ok, tuple(scope))


def classify_collapse(bm, step):
    """Simulate one collapse on a scratch copy and re-check what moved.

    Pure: ``bm`` is not modified.  Only vertices of remapped cells (plus
    the subdivision vertices they spawned) can change any of the three
    local certificates, so the re-check is restricted to them.
    """
    rr = RetractionRecord.from_complex(bm.target, step)
    pushed = push_through_collapse(bm, step, rr)
    moved = {
        v
        for cell, car in bm.cell_carrier.items()
        if car == step.sigma or car == step.tau
        for v in cell
    }
    moved |= set(pushed.vertex_images) - set(bm.vertex_images)
    if moved:
        cert = check_immersion(pushed, only_vertices=moved)
    else:
        cert = ImmersionCertificate({}, True, ())
    fails = cert.failing()
    return DangerReport(
        step=step,
        verdict="dangerous" if fails else "safe",
        failing_vertices=fails,
        certificate=cert,
        pushed=pushed,
    )
