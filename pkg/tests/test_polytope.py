import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.spatial import ConvexHull as QhullReference

from quermass.core import RngStream, gaussian_matrix, orthonormalize
from quermass.polytope import (
    CapabilityError,
    DegenerateHullError,
    UnboundedError,
    convex_hull,
    halfspace_intersection_vertices,
    hull_volume,
    planar_intrinsics,
    vertex_enumeration,
    volume_and_centroid,
)


def cube_corners(d=3):
    return np.array(np.meshgrid(*[[0.0, 1.0]] * d, indexing="ij")).reshape(d, -1).T


def test_square_hull():
    hull = convex_hull(np.array([[0, 0], [1, 0], [1, 1], [0, 1.0]]))
    assert len(hull.vertices) == 4
    assert len(hull.facets) == 4


def test_cube_hull_structure():
    hull = convex_hull(cube_corners())
    assert len(hull.vertices) == 8
    assert len(hull.facets) == 6
    assert len(hull.vertices) - hull.edge_count() + len(hull.facets) == 2
    for facet in hull.facets:
        slack = hull.vertices @ facet.normal - facet.offset
        assert slack.max() <= 1e-9
        assert len(facet.vertex_ids) >= 3


def test_hull_containment_oracle(rng):
    pts = rng.generator().standard_normal((100, 2))
    pts = pts[np.linalg.norm(pts, axis=1) <= 1.5]
    hull = convex_hull(pts)
    assert hull.contains(pts).all()
    # every hull vertex is one of the inputs
    for v in hull.vertices:
        assert np.min(np.linalg.norm(pts - v, axis=1)) < 1e-12


@pytest.mark.parametrize("dim,count", [(2, 60), (3, 80), (4, 60), (5, 40), (6, 24)])
def test_hull_volume_matches_qhull(dim, count, rng):
    pts = rng.split(dim).generator().standard_normal((count, dim))
    mine = hull_volume(pts)
    reference = QhullReference(pts)
    assert mine == pytest.approx(reference.volume, rel=1e-9)
    hull = convex_hull(pts)
    my_vertices = {tuple(np.round(v, 9)) for v in hull.vertices}
    ref_vertices = {tuple(np.round(pts[i], 9)) for i in reference.vertices}
    assert my_vertices == ref_vertices


def test_hull_surface_matches_qhull(rng):
    pts = rng.split(99).generator().standard_normal((50, 3))
    hull = convex_hull(pts)
    reference = QhullReference(pts)
    assert hull.surface_area() == pytest.approx(reference.area, rel=1e-9)


def test_hull_degenerate_rank():
    flat = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 0.0]])
    with pytest.raises(DegenerateHullError) as err:
        convex_hull(flat)
    assert err.value.rank == 2


def test_hull_dim_cap():
    with pytest.raises(CapabilityError):
        convex_hull(np.zeros((10, 7)))


@settings(max_examples=15, deadline=None)
@given(st.integers(min_value=0, max_value=10_000))
def test_hull_volume_permutation_and_rotation_invariant(seed):
    pts = RngStream(seed).generator().standard_normal((30, 3))
    base = hull_volume(pts)
    perm = RngStream(seed, 1).generator().permutation(len(pts))
    assert hull_volume(pts[perm]) == pytest.approx(base, rel=1e-9)
    q = orthonormalize(gaussian_matrix(3, 3, RngStream(seed, 2)))
    assert hull_volume(pts @ q.T) == pytest.approx(base, rel=1e-9)


@settings(max_examples=10, deadline=None)
@given(st.integers(min_value=0, max_value=10_000))
def test_hull_volume_monotone_in_points(seed):
    pts = RngStream(seed).generator().standard_normal((40, 3))
    assert hull_volume(pts[:15]) <= hull_volume(pts) + 1e-12


def test_vertex_enumeration_cube():
    a = np.vstack([np.eye(3), -np.eye(3)])
    b = np.array([1, 1, 1, 0, 0, 0.0])
    verts = vertex_enumeration(a, b)
    assert len(verts) == 8


def test_vertex_enumeration_simplex_and_crosspoly():
    a = np.vstack([-np.eye(3), np.ones((1, 3))])
    b = np.array([0, 0, 0, 1.0])
    assert len(vertex_enumeration(a, b)) == 4
    signs = np.array(np.meshgrid(*[[-1.0, 1.0]] * 3, indexing="ij")).reshape(3, -1).T
    assert len(vertex_enumeration(signs, np.ones(8))) == 6


def test_vertex_enumeration_unbounded():
    a = np.eye(2)
    b = np.ones(2)
    with pytest.raises(UnboundedError):
        vertex_enumeration(a, b)


def test_vertex_enumeration_recovers_hull_vertices(rng):
    pts = rng.split(5).generator().standard_normal((20, 3))
    hull = convex_hull(pts)
    a, b = hull.facet_matrix()
    verts = vertex_enumeration(a, b)
    found = {tuple(np.round(v, 7)) for v in verts}
    expected = {tuple(np.round(v, 7)) for v in hull.vertices}
    assert found == expected


def test_halfspace_intersection_matches_enumeration(rng):
    pts = rng.split(6).generator().standard_normal((25, 3))
    hull = convex_hull(pts)
    a, b = hull.facet_matrix()
    via_dual = halfspace_intersection_vertices(a, b, hull.interior_point)
    via_combi = vertex_enumeration(a, b, check_bounded=False)
    assert len(via_dual) == len(via_combi)
    assert hull_volume(via_dual) == pytest.approx(hull_volume(via_combi), rel=1e-9)


def test_volume_and_centroid_examples():
    cube = convex_hull(cube_corners())
    vol, cen = volume_and_centroid(cube)
    assert vol == pytest.approx(1.0, rel=1e-12)
    assert np.allclose(cen, 0.5, atol=1e-12)

    simplex = convex_hull(np.vstack([np.zeros(3), np.eye(3)]))
    vol, cen = volume_and_centroid(simplex)
    assert vol == pytest.approx(1 / 6, rel=1e-12)
    assert np.allclose(cen, 0.25, atol=1e-12)

    crosspoly = convex_hull(np.vstack([np.eye(3), -np.eye(3)]))
    vol, cen = volume_and_centroid(crosspoly)
    assert vol == pytest.approx(4 / 3, rel=1e-12)
    assert np.allclose(cen, 0.0, atol=1e-12)


def test_planar_intrinsics_examples():
    area, perim = planar_intrinsics(np.array([[0, 0], [1, 0], [1, 1], [0, 1.0]]))
    assert area == pytest.approx(1.0, rel=1e-12)
    assert perim == pytest.approx(4.0, rel=1e-12)

    area, perim = planar_intrinsics(np.array([[0, 0], [1, 0], [0, 1.0]]))
    assert area == pytest.approx(0.5, rel=1e-12)
    assert perim == pytest.approx(2 + math.sqrt(2), rel=1e-12)


def test_planar_regular_polygon_approximates_disk():
    m = 1024
    theta = np.linspace(0, 2 * math.pi, m, endpoint=False)
    poly = np.column_stack([np.cos(theta), np.sin(theta)])
    area, perim = planar_intrinsics(poly)
    assert abs(area - math.pi) < 1e-4
    assert abs(perim - 2 * math.pi) < 1e-4
    # closed forms of the regular polygon itself
    assert area == pytest.approx(0.5 * m * math.sin(2 * math.pi / m), rel=1e-12)
    assert perim == pytest.approx(2 * m * math.sin(math.pi / m), rel=1e-12)


def test_planar_degenerate_flagged(caplog):
    segment = np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]])
    with caplog.at_level("WARNING"):
        area, perim = planar_intrinsics(segment)
    assert area == 0.0
    assert perim == pytest.approx(2 * math.sqrt(8), rel=1e-9)
    assert any("degenerate" in rec.message for rec in caplog.records)
