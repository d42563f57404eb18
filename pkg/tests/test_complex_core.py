import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bingruff.complex_core import (
    Complex,
    boundary,
    build_complex,
    euler_and_homology,
    export_off,
    parse_cplx,
    serialize_cplx,
)
from bingruff.errors import (
    DanglingVertexId,
    DuplicateSimplex,
    NonManifoldFace,
    NonManifoldTopDim,
    NotPure,
)

TET_VERTS = {
    0: (0.0, 0.0, 0.0),
    1: (1.0, 0.0, 0.0),
    2: (0.0, 1.0, 0.0),
    3: (0.0, 0.0, 1.0),
}


def tet():
    return build_complex(TET_VERTS, [(0, 1, 2, 3)])


def tet_boundary_complex():
    return build_complex(TET_VERTS, list(itertools.combinations(range(4), 3)))


def two_tets():
    verts = dict(TET_VERTS)
    verts[4] = (1.0, 1.0, 1.0)
    return build_complex(verts, [(0, 1, 2, 3), (1, 2, 3, 4)])


def test_tet_closure_has_15_simplices():
    c = tet()
    assert len(c.simps) == 15
    assert c.dim == 3
    assert sorted(len(s) for s in c.simps) == [1] * 4 + [2] * 6 + [3] * 4 + [4]


def test_closure_is_face_closed():
    c = two_tets()
    for s in c.simps:
        for i in range(len(s)):
            assert s[:i] + s[i + 1 :] in c.simps or len(s) == 1


def test_dangling_vertex_rejected():
    with pytest.raises(DanglingVertexId):
        build_complex(TET_VERTS, [(0, 1, 2, 9)])


def test_duplicate_simplex_rejected():
    with pytest.raises(DuplicateSimplex):
        build_complex(TET_VERTS, [(0, 1, 2), (2, 1, 0)])


def test_repeated_vertex_in_simplex_rejected():
    with pytest.raises(DuplicateSimplex):
        build_complex(TET_VERTS, [(0, 1, 1)])


def test_manifold_flag_rejects_triple_coface():
    verts = dict(TET_VERTS)
    verts[4] = (1.0, 1.0, 1.0)
    verts[5] = (-1.0, -1.0, -1.0)
    tets = [(0, 1, 2, 3), (0, 1, 2, 4), (0, 1, 2, 5)]
    with pytest.raises(NonManifoldTopDim):
        build_complex(verts, tets, manifold=True)
    # same data without the flag is accepted
    build_complex(verts, tets)


def test_boundary_of_single_tet_is_sphere():
    b = boundary(tet())
    assert len(b.simplices_of_dim(2)) == 4
    prof = euler_and_homology(b)
    assert prof.euler == 2
    assert prof.betti == (1, 0, 1, 0)


def test_boundary_of_two_glued_tets():
    b = boundary(two_tets())
    assert len(b.simplices_of_dim(2)) == 6
    assert (1, 2, 3) not in b  # the shared interior face
    assert euler_and_homology(b).euler == 2


def test_boundary_of_closed_surface_is_empty():
    b = boundary(tet_boundary_complex())
    assert b.simps == frozenset()


def test_boundary_of_pure_3_complex_is_closed():
    """Every edge of the boundary surface has exactly two boundary triangles."""
    b = boundary(two_tets())
    counts = {}
    for t in b.simplices_of_dim(2):
        for i in range(3):
            e = t[:i] + t[i + 1 :]
            counts[e] = counts.get(e, 0) + 1
    assert counts and set(counts.values()) == {2}


def test_boundary_rejects_mixed_dimension():
    verts = dict(TET_VERTS)
    verts[4] = (2.0, 2.0, 2.0)
    verts[5] = (3.0, 2.0, 2.0)
    verts[6] = (2.0, 3.0, 2.0)
    with pytest.raises(NotPure):
        boundary(build_complex(verts, [(0, 1, 2, 3), (4, 5, 6)]))


def test_boundary_rejects_triple_coface():
    verts = dict(TET_VERTS)
    verts[4] = (1.0, 1.0, 1.0)
    verts[5] = (-1.0, -1.0, -1.0)
    with pytest.raises(NonManifoldFace):
        boundary(build_complex(verts, [(0, 1, 2, 3), (0, 1, 2, 4), (0, 1, 2, 5)]))


def test_homology_of_solid_tet():
    prof = euler_and_homology(tet())
    assert prof.euler == 1
    assert prof.betti == (1, 0, 0, 0)


def test_homology_of_circle():
    verts = {0: (0, 0, 0), 1: (1, 0, 0), 2: (0, 1, 0)}
    c = build_complex(verts, [(0, 1), (1, 2), (0, 2)])
    prof = euler_and_homology(c)
    assert prof.euler == 0
    assert prof.betti == (1, 1, 0, 0)


def test_homology_of_disjoint_union_adds():
    verts = dict(TET_VERTS)
    for i in range(4):
        verts[10 + i] = tuple(np.array(TET_VERTS[i]) + 10.0)
    c = build_complex(verts, [(0, 1, 2, 3), (10, 11, 12, 13)])
    assert euler_and_homology(c).betti == (2, 0, 0, 0)


def test_torus_like_annulus():
    # triangulated annulus: S^1 x I as 6 triangles
    outer = [(np.cos(a), np.sin(a), 0.0) for a in np.linspace(0, 2 * np.pi, 4)[:3]]
    inner = [(2 * np.cos(a), 2 * np.sin(a), 0.0) for a in np.linspace(0, 2 * np.pi, 4)[:3]]
    verts = {i: outer[i] for i in range(3)}
    verts.update({i + 3: inner[i] for i in range(3)})
    tris = []
    for i in range(3):
        j = (i + 1) % 3
        tris.append((i, j, i + 3))
        tris.append((j, i + 3, j + 3))
    prof = euler_and_homology(build_complex(verts, tris))
    assert prof.euler == 0
    assert prof.betti == (1, 1, 0, 0)


def test_star_and_subcomplex():
    c = tet()
    st_ = c.star((0,))
    assert (0, 1, 2, 3) in st_ and (1, 2, 3) not in st_
    sub = c.subcomplex([(0, 1, 2)])
    assert (0, 1) in sub and len(sub.simps) == 7


def test_roundtrip_identity():
    c = two_tets()
    assert parse_cplx(serialize_cplx(c)) == c


def test_roundtrip_with_awkward_floats():
    verts = {0: (0.1 + 0.2, -1e-17, 3.0), 1: (np.pi, 1.0, 2.0), 2: (0.0, np.e, 0.0)}
    c = build_complex(verts, [(0, 1, 2)])
    c2 = parse_cplx(serialize_cplx(c))
    assert c2 == c
    for v in verts:
        assert tuple(c2.verts[v]) == tuple(c.verts[v])  # bit-exact


def test_parse_comments_and_declared_dim():
    text = "# a triangle\ndim 2\nv 0 0.0 0.0 0.0\nv 1 1.0 0.0 0.0\nv 2 0.0 1.0 0.0\ns 0 1 2\n"
    c = parse_cplx(text)
    assert c.dim == 2 and len(c.simps) == 7
    with pytest.raises(ValueError):
        parse_cplx(text.replace("dim 2", "dim 3"))


def test_export_off_counts():
    c = tet_boundary_complex()
    off = export_off(c)
    lines = off.strip().splitlines()
    assert lines[0] == "OFF"
    nv, nf, ne = map(int, lines[1].split())
    assert (nv, nf, ne) == (4, 4, 0)
    assert len(lines) == 2 + 4 + 4


# ---------------------------------------------------------------------------
# randomized properties

POOL = list(range(6))
CANDIDATES = [
    t for k in (1, 2, 3, 4) for t in itertools.combinations(POOL, k)
]
# fixed general-position coordinates for the vertex pool
_rng = np.random.default_rng(7)
COORDS = {i: tuple(_rng.normal(size=3)) for i in POOL}

simplex_sets = st.sets(st.sampled_from(CANDIDATES), min_size=1, max_size=12)


@given(simplex_sets)
@settings(max_examples=60, deadline=None)
def test_euler_matches_betti_on_random_complexes(simps):
    c = build_complex(COORDS, list(simps))
    prof = euler_and_homology(c)  # dataclass invariant cross-checks chi
    counts = [len(c.simplices_of_dim(d)) for d in range(4)]
    assert prof.euler == counts[0] - counts[1] + counts[2] - counts[3]
    assert prof.betti[0] >= 1


@given(simplex_sets)
@settings(max_examples=40, deadline=None)
def test_roundtrip_on_random_complexes(simps):
    c = build_complex(COORDS, list(simps))
    assert parse_cplx(serialize_cplx(c)) == c


@given(simplex_sets)
@settings(max_examples=40, deadline=None)
def test_disjoint_union_betti_adds(simps):
    c = build_complex(COORDS, list(simps))
    shifted = {i + 10: tuple(np.asarray(COORDS[i]) + 50.0) for i in POOL}
    both = dict(COORDS)
    both.update(shifted)
    union = build_complex(
        both, list(simps) + [tuple(v + 10 for v in s) for s in simps]
    )
    b1 = euler_and_homology(c).betti
    b2 = euler_and_homology(union).betti
    assert b2 == tuple(2 * x for x in b1)
