"""Finite simplicial complexes embedded in R^3.

The central type is :class:`Complex`: vertices carry coordinates, simplices
are sorted tuples of vertex ids, and the simplex set is closed under taking
faces.  Complexes are treated as immutable values; every operation returns a
new object.  Homology is computed over Z/2 only, which is all the rest of the
package needs.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import (
    DanglingVertexId,
    DuplicateSimplex,
    NonManifoldFace,
    NonManifoldTopDim,
    NotPure,
)

EPS = 1e-9

Simplex = tuple  # sorted tuple of vertex ids


def proper_faces(s):
    """All proper faces of a simplex, as sorted tuples."""
    out = []
    for k in range(1, len(s)):
        out.extend(itertools.combinations(s, k))
    return out


def facets(s):
    """Codimension-1 faces of a simplex."""
    return [s[:i] + s[i + 1 :] for i in range(len(s))]


def closure(simplices):
    out = set()
    for s in simplices:
        out.add(tuple(s))
        out.update(proper_faces(tuple(s)))
    return out


class Complex:
    """An embedded simplicial complex of dimension <= 3.

    Parameters
    ----------
    vertices : dict
        Map from vertex id to a length-3 coordinate array.  2-dimensional
        input lives in the z=0 plane.
    simplices : iterable
        Simplices as tuples of vertex ids.  The face closure is computed,
        so passing only top simplices is enough.
    labels : dict, optional
        Partial map from simplex to a short string tag.
    """

    __slots__ = ("verts", "simps", "dim", "labels", "_parents", "_tops")

    def __init__(self, vertices, simplices, labels=None, _closed=False):
        self.verts = {int(v): np.asarray(p, dtype=float).reshape(3) for v, p in vertices.items()}
        simps = set()
        for s in simplices:
            t = tuple(sorted(int(v) for v in s))
            if len(set(t)) != len(t):
                raise DuplicateSimplex(f"repeated vertex in simplex {s}")
            simps.add(t)
        if not _closed:
            simps = closure(simps)
        for s in simps:
            for v in s:
                if v not in self.verts:
                    raise DanglingVertexId(f"simplex {s} references unknown vertex {v}")
        self.simps = frozenset(simps)
        self.dim = max((len(s) - 1 for s in simps), default=-1)
        if self.dim > 3:
            raise ValueError(f"simplex of dimension {self.dim} > 3 not supported")
        self.labels = dict(labels) if labels else {}
        self._parents = None
        self._tops = None

    # -- basic queries ---------------------------------------------------

    def coords(self, v):
        return self.verts[v]

    def points(self, s):
        """Coordinate rows for the vertices of simplex ``s``."""
        return np.array([self.verts[v] for v in s])

    def simplices_of_dim(self, d):
        return [s for s in self.simps if len(s) == d + 1]

    def parents(self, s):
        """Cofaces of codimension 1."""
        return self.parent_map().get(s, ())

    def parent_map(self):
        if self._parents is None:
            pm = {}
            for s in self.simps:
                if len(s) == 1:
                    continue
                for f in facets(s):
                    pm.setdefault(f, []).append(s)
            self._parents = {f: tuple(sorted(v)) for f, v in pm.items()}
        return self._parents

    def top_simplices(self):
        if self._tops is None:
            pm = self.parent_map()
            self._tops = tuple(sorted(s for s in self.simps if not pm.get(s)))
        return self._tops

    def star(self, s):
        """All simplices containing ``s`` (including ``s``)."""
        s = tuple(s)
        return [t for t in self.simps if set(s) <= set(t)]

    def __contains__(self, s):
        return tuple(s) in self.simps

    def __eq__(self, other):
        if not isinstance(other, Complex):
            return NotImplemented
        if self.simps != other.simps or set(self.verts) != set(other.verts):
            return False
        return all(np.allclose(self.verts[v], other.verts[v], atol=EPS) for v in self.verts)

    def __hash__(self):
        return hash(self.simps)

    def __repr__(self):
        counts = [len(self.simplices_of_dim(d)) for d in range(self.dim + 1)]
        return f"Complex(dim={self.dim}, cells={counts})"

    def subcomplex(self, simplices):
        return Subcomplex(self, frozenset(closure(simplices)))

    def replace(self, vertices=None, simplices=None, labels=None, _closed=False):
        return Complex(
            vertices if vertices is not None else self.verts,
            simplices if simplices is not None else self.simps,
            labels if labels is not None else self.labels,
            _closed=_closed,
        )


class Subcomplex:
    """A face-closed subset of a parent complex."""

    __slots__ = ("parent", "simps", "dim")

    def __init__(self, parent, simplices):
        simps = frozenset(tuple(s) for s in simplices)
        for s in simps:
            if s not in parent.simps:
                raise DanglingVertexId(f"simplex {s} not in parent complex")
        self.parent = parent
        self.simps = simps
        self.dim = max((len(s) - 1 for s in simps), default=-1)

    @property
    def verts(self):
        return {v: self.parent.verts[v] for s in self.simps for v in s}

    def points(self, s):
        return self.parent.points(s)

    def simplices_of_dim(self, d):
        return [s for s in self.simps if len(s) == d + 1]

    def top_simplices(self):
        pm = {}
        for s in self.simps:
            if len(s) == 1:
                continue
            for f in facets(s):
                pm.setdefault(f, []).append(s)
        return tuple(sorted(s for s in self.simps if not pm.get(s)))

    def as_complex(self):
        return Complex(self.verts, self.simps, _closed=True)

    def __contains__(self, s):
        return tuple(s) in self.simps

    def __eq__(self, other):
        if not isinstance(other, Subcomplex):
            return NotImplemented
        return self.simps == other.simps and self.parent == other.parent

    def __repr__(self):
        return f"Subcomplex(dim={self.dim}, n={len(self.simps)})"


@dataclass(frozen=True)
class HomologyProfile:
    """Betti numbers b0..b3 over Z/2 and the Euler characteristic."""

    betti: tuple
    euler: int

    def __post_init__(self):
        alt = sum((-1) ** k * b for k, b in enumerate(self.betti))
        assert alt == self.euler, (self.betti, self.euler)


def build_complex(vertices, simplices, labels=None, manifold=False):
    """Validate raw data and build a :class:`Complex`.

    Parameters
    ----------
    vertices : dict
        Vertex id -> coordinates.
    simplices : iterable
        Simplex rows (top simplices suffice; closure is computed).
    labels : dict, optional
    manifold : bool
        When true, additionally require every codimension-1 face of a top
        simplex to have at most two cofaces.

    Raises
    ------
    DuplicateSimplex
        If the same simplex is listed twice (or a simplex repeats a vertex).
    DanglingVertexId
        If a simplex references a vertex id without coordinates.
    NonManifoldTopDim
        Manifold flag set and some face has more than two top cofaces.
    """
    seen = set()
    for s in simplices:
        t = tuple(sorted(s))
        if len(t) > 4:
            raise ValueError(f"simplex {s} has dimension {len(t) - 1} > 3")
        if t in seen:
            raise DuplicateSimplex(f"simplex {t} listed twice")
        seen.add(t)
    c = Complex(dict(vertices), simplices, labels)
    if manifold and c.dim >= 1:
        counts = {}
        for s in c.simplices_of_dim(c.dim):
            for f in facets(s):
                counts[f] = counts.get(f, 0) + 1
        bad = sorted(f for f, n in counts.items() if n > 2)
        if bad:
            raise NonManifoldTopDim(f"face {bad[0]} has {counts[bad[0]]} cofaces")
    return c


def boundary(c):
    """Boundary subcomplex of a pure complex: faces with exactly one coface.

    Raises ``NotPure`` when top simplices of different dimension coexist and
    ``NonManifoldFace`` when some codimension-1 face has more than two
    cofaces.
    """
    tops = c.top_simplices()
    if not tops:
        return c.subcomplex([])
    dims = {len(s) for s in tops}
    if len(dims) != 1:
        raise NotPure(f"top simplices of dimensions {sorted(d - 1 for d in dims)}")
    counts = {}
    for s in c.simplices_of_dim(c.dim):
        for f in facets(s):
            counts[f] = counts.get(f, 0) + 1
    bad = [f for f, n in counts.items() if n > 2]
    if bad:
        raise NonManifoldFace(f"faces with more than two cofaces: {sorted(bad)[:3]}")
    return c.subcomplex([f for f, n in counts.items() if n == 1])


def _z2_rank(columns, row_index):
    """Rank of a Z/2 matrix given as {column simplex: iterable of row simplices}."""
    pivots = {}
    for col in sorted(columns):
        cur = {row_index[r] for r in columns[col]}
        while cur:
            low = max(cur)
            if low not in pivots:
                pivots[low] = cur
                break
            cur = cur ^ pivots[low]
    return len(pivots)


def euler_and_homology(x):
    """Z/2 Betti numbers and Euler characteristic of a complex or subcomplex.

    The Euler characteristic is computed from cell counts; the dataclass
    invariant cross-checks it against the alternating Betti sum.
    """
    simps = x.simps
    by_dim = [sorted(s for s in simps if len(s) == k + 1) for k in range(4)]
    counts = [len(b) for b in by_dim]
    euler = counts[0] - counts[1] + counts[2] - counts[3]
    ranks = [0, 0, 0, 0]  # rank of boundary_k : C_k -> C_{k-1}, k = 1..3 at idx 1..3
    for k in range(1, 4):
        if not by_dim[k]:
            continue
        rows = {s: i for i, s in enumerate(by_dim[k - 1])}
        cols = {s: [f for f in facets(s)] for s in by_dim[k]}
        ranks[k] = _z2_rank(cols, rows)
    betti = []
    for k in range(4):
        cycles = counts[k] - (ranks[k] if k >= 1 else 0)
        boundaries = ranks[k + 1] if k + 1 <= 3 else 0
        betti.append(cycles - boundaries if counts[k] else 0)
    return HomologyProfile(tuple(betti), euler)


# -- serialization -------------------------------------------------------


def serialize_cplx(c):
    """Plain-text form: ``dim``, ``v`` and ``s`` lines (top simplices only)."""
    lines = [f"dim {c.dim}"]
    for v in sorted(c.verts):
        x, y, z = (float(t) for t in c.verts[v])
        lines.append(f"v {v} {x!r} {y!r} {z!r}")
    for s in c.top_simplices():
        lines.append("s " + " ".join(str(v) for v in s))
    return "\n".join(lines) + "\n"


def parse_cplx(text):
    verts = {}
    simps = []
    declared_dim = None
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "dim":
            declared_dim = int(parts[1])
        elif parts[0] == "v":
            verts[int(parts[1])] = np.array([float(parts[2]), float(parts[3]), float(parts[4])])
        elif parts[0] == "s":
            simps.append(tuple(int(p) for p in parts[1:]))
        else:
            raise ValueError(f"unrecognized line: {raw!r}")
    c = build_complex(verts, simps)
    if declared_dim is not None and c.dim >= 0 and c.dim != declared_dim:
        raise ValueError(f"declared dim {declared_dim} != actual {c.dim}")
    return c


def export_off(x):
    """OFF text for the 2-skeleton of a complex or subcomplex."""
    vids = sorted({v for s in x.simps for v in s})
    index = {v: i for i, v in enumerate(vids)}
    tris = sorted(s for s in x.simps if len(s) == 3)
    verts = x.verts if isinstance(x, Complex) else {v: x.parent.verts[v] for v in vids}
    lines = ["OFF", f"{len(vids)} {len(tris)} 0"]
    for v in vids:
        x0, y0, z0 = (float(t) for t in verts[v])
        lines.append(f"{x0!r} {y0!r} {z0!r}")
    for t in tris:
        lines.append("3 " + " ".join(str(index[v]) for v in t))
    return "\n".join(lines) + "\n"


from .hausdorff import hausdorff_distance  # noqa: E402  (re-export)

__all__ = [
    "EPS",
    "Complex",
    "Subcomplex",
    "HomologyProfile",
    "build_complex",
    "boundary",
    "euler_and_homology",
    "hausdorff_distance",
    "serialize_cplx",
    "parse_cplx",
    "export_off",
    "closure",
    "facets",
    "proper_faces",
]
