import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bingruff.collapse import CollapseStep, RetractionRecord, collapse_to_spine
from bingruff.complex_core import build_complex
from bingruff.errors import EmptyBoundary, IllegalStep
from bingruff.plmaps import (
    BoundaryMap,
    barycentric_in,
    displacement,
    evaluate,
    image_support,
    initial_boundary_map,
    preimage_points,
    push_through_collapse,
)

TET_VERTS = {
    0: (0.0, 0.0, 0.0),
    1: (1.0, 0.0, 0.0),
    2: (0.0, 1.0, 0.0),
    3: (0.0, 0.0, 1.0),
}
STEP = CollapseStep((0, 1, 2, 3), (0, 1, 2))


def tet():
    return build_complex(TET_VERTS, [(0, 1, 2, 3)])


def pushed_tet():
    bm = initial_boundary_map(tet())
    rr = RetractionRecord.from_complex(bm.target, STEP)
    return bm, push_through_collapse(bm, STEP, rr)


def carrier_containment(bm):
    """Worst violation of "vertex image lies inside its cell's carrier"."""
    worst = 0.0
    for cell, car in bm.cell_carrier.items():
        for v in cell:
            lam = barycentric_in(bm.target.points(car), bm.image_point(v))
            worst = max(worst, -float(lam.min()))
    return worst


# -- initial map -------------------------------------------------------------


def test_initial_map_is_identity_on_boundary():
    bm = initial_boundary_map(tet())
    assert set(bm.cell_carrier) == {(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)}
    for cell, car in bm.cell_carrier.items():
        assert cell == car
    for v in range(4):
        assert bm.vertex_images[v] == ((v,), (1.0,))
        assert np.allclose(bm.image_point(v), TET_VERTS[v])
    assert displacement(bm) == 0.0


def test_initial_map_rejects_closed_complex():
    # boundary of a tet is a closed surface: no boundary left to map
    octa = boundary_surface = build_complex(TET_VERTS, [(0, 1, 2, 3)])
    from bingruff.complex_core import boundary

    sphere = boundary(octa).as_complex()
    with pytest.raises(EmptyBoundary):
        initial_boundary_map(sphere)


# -- one collapse on the single tet ------------------------------------------
# The free face (0,1,2) is squashed onto the three far faces by central
# projection.  The basin walls cut the face into the three median triangles,
# adding exactly one source vertex (the barycenter, which lands on the
# opposite vertex), and the far-face cells keep their identity assignment.


def test_tet_push_combinatorics():
    _, out = pushed_tet()
    assert len(out.cell_carrier) == 6
    assert len(out.source.verts) == 5
    sup2 = sorted(s for s in image_support(out) if len(s) == 3)
    assert sup2 == [(0, 1, 3), (0, 2, 3), (1, 2, 3)]
    assert carrier_containment(out) <= 1e-9


def test_tet_push_moves_barycenter_to_opposite_vertex():
    _, out = pushed_tet()
    centroid = np.mean([TET_VERTS[v] for v in (0, 1, 2)], axis=0)
    assert np.allclose(evaluate(out, centroid), (0.0, 0.0, 1.0), atol=1e-12)
    # the only moved point with positive displacement is that barycenter
    assert abs(displacement(out) - np.sqrt(11) / 3) < 1e-12


def test_tet_push_doubles_every_far_face():
    _, out = pushed_tet()
    for f in [(0, 1, 3), (0, 2, 3), (1, 2, 3)]:
        y = np.mean([TET_VERTS[v] for v in f], axis=0)
        assert len(preimage_points(out, y)) == 2
    assert len(preimage_points(out, np.array([0.0, 0.0, 1.0]))) == 2


def test_push_leaves_input_map_untouched():
    bm, _ = pushed_tet()
    fresh = initial_boundary_map(tet())
    assert bm.cell_carrier == fresh.cell_carrier
    assert bm.vertex_images == fresh.vertex_images
    assert (0, 1, 2, 3) in bm.target.simps


def test_push_keeps_unaffected_vertex_entries_identical():
    bm, out = pushed_tet()
    # vertex 3 sits on no cell carried by sigma or tau; its record survives
    # as the same object, not a recomputed equal one
    assert out.vertex_images[3] is bm.vertex_images[3]


def test_push_off_support_is_constant_time_identity():
    verts = dict(TET_VERTS)
    verts.update({20: (5.0, 0, 0), 21: (6.0, 0, 0), 22: (5.0, 1, 0), 23: (5.0, 0, 1)})
    big = build_complex(verts, [(0, 1, 2, 3), (20, 21, 22, 23)])
    src = initial_boundary_map(tet()).source
    vi = {v: ((v,), (1.0,)) for v in range(4)}
    cc = {c: c for c in src.simplices_of_dim(2)}
    bm = BoundaryMap(src, big, vi, cc)
    step = CollapseStep((20, 21, 22, 23), (20, 21, 22))
    out = push_through_collapse(bm, step, RetractionRecord.from_complex(big, step))
    assert out.source is bm.source
    assert out.cell_carrier == bm.cell_carrier
    assert (20, 21, 22, 23) not in out.target.simps


def test_push_rejects_non_free_face():
    verts = dict(TET_VERTS)
    verts[4] = (1.0, 1.0, 1.0)
    m = build_complex(verts, [(0, 1, 2, 3), (1, 2, 3, 4)])
    bm = initial_boundary_map(m)
    bad = CollapseStep((0, 1, 2, 3), (1, 2, 3))
    rr = RetractionRecord.from_complex(m, CollapseStep((0, 1, 2, 3), (0, 1, 2)))
    with pytest.raises(IllegalStep):
        push_through_collapse(bm, bad, rr)


# -- full sequences ----------------------------------------------------------


@pytest.mark.parametrize(
    "extra,tets,spine",
    [
        ({}, [(0, 1, 2, 3)], (3,)),
        ({4: (1.0, 1.0, 1.0)}, [(0, 1, 2, 3), (1, 2, 3, 4)], (4,)),
    ],
)
def test_full_collapse_support_tracks_spine(extra, tets, spine):
    verts = dict(TET_VERTS)
    verts.update(extra)
    m = build_complex(verts, tets)
    seq = collapse_to_spine(m)
    assert set(seq.end.simps) == {spine}
    bm = initial_boundary_map(m)
    for st_ in seq.steps:
        rr = RetractionRecord.from_complex(bm.target, st_)
        bm = push_through_collapse(bm, st_, rr)
        assert set(image_support(bm)) <= set(bm.target.simps)
        assert carrier_containment(bm) <= 1e-9
    assert set(image_support(bm)) == {spine}


def test_pushed_source_stays_closed():
    """Subdividing along basin walls must not tear the source surface."""
    verts = {
        0: (0.0, 0.0, 0.0),
        1: (1.0, 0.0, 0.0),
        2: (0.0, 1.0, 0.0),
        3: (1 / 3, 1 / 3, 0.8),
        4: (0.5, -0.5, 0.8),
        5: (-0.5, 0.5, 0.8),
        6: (1.0, 1.0, 0.8),
    }
    tets = [
        (0, 1, 2, 3), (0, 1, 3, 4), (0, 2, 3, 5), (1, 2, 3, 6),
        (0, 3, 4, 5), (1, 3, 4, 6), (2, 3, 5, 6),
    ]
    m = build_complex(verts, tets)
    bm = initial_boundary_map(m)
    rr = RetractionRecord.from_complex(m, STEP)
    out = push_through_collapse(bm, STEP, rr)
    assert carrier_containment(out) <= 1e-9
    counts = {}
    for c in out.source.simplices_of_dim(2):
        for i in range(3):
            e = tuple(sorted((c[i], c[(i + 1) % 3])))
            counts[e] = counts.get(e, 0) + 1
    assert set(counts.values()) == {2}


# -- barycentric helper ------------------------------------------------------


@given(
    st.lists(
        st.floats(min_value=0.01, max_value=1.0), min_size=4, max_size=4
    )
)
@settings(max_examples=60, deadline=None)
def test_barycentric_roundtrip(weights):
    pts = np.array([TET_VERTS[v] for v in range(4)])
    lam = np.array(weights) / sum(weights)
    y = lam @ pts
    back = barycentric_in(pts, y)
    assert np.allclose(back, lam, atol=1e-9)
    assert np.allclose(back @ pts, y, atol=1e-9)


def test_evaluate_rejects_point_off_surface():
    bm = initial_boundary_map(tet())
    with pytest.raises(ValueError):
        evaluate(bm, np.array([10.0, 10.0, 10.0]))
