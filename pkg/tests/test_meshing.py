import io

import numpy as np
import pytest

from meshmotion.meshing import (
    AnchorFrame,
    TriMesh,
    centroid_subdivide,
    convex_hull_vertex_count,
    evaluate_bound,
    longest_side,
    mesh_area,
    read_mesh,
    reposition,
    triangulate,
    write_mesh,
)
from meshmotion.synthetic import canonical_face_anchors

from conftest import hull_area, hull_indices, in_circumcircle


def frame_from(points, width=1000, height=1000, index=0):
    return AnchorFrame(index, width, height, np.asarray(points, dtype=float))


def random_frame(rng, n, width=1000, height=1000):
    pts = np.column_stack(
        [rng.uniform(1.0, width - 2.0, n), rng.uniform(1.0, height - 2.0, n)]
    )
    return frame_from(pts, width, height)


class TestAnchorFrame:
    def test_rejects_too_few(self):
        with pytest.raises(ValueError, match="at least 3"):
            AnchorFrame(0, 10, 10, [(1, 1), (2, 2)])

    def test_rejects_out_of_bounds(self):
        with pytest.raises(ValueError, match="within"):
            AnchorFrame(0, 10, 10, [(1, 1), (2, 2), (10, 5)])

    def test_rejects_nan(self):
        with pytest.raises(ValueError, match="finite"):
            AnchorFrame(0, 10, 10, [(1, 1), (2, 2), (np.nan, 5)])


class TestTriangulate:
    def test_three_points_one_triangle(self):
        mesh = triangulate(frame_from([(0, 0), (4, 0), (0, 4)], 10, 10))
        assert mesh.triangle_count == 1
        assert sorted(mesh.connectivity[0]) == [0, 1, 2]

    def test_unit_square_two_triangles(self):
        mesh = triangulate(frame_from([(0, 0), (1, 0), (1, 1), (0, 1)], 10, 10))
        assert mesh.triangle_count == 2

    def test_all_collinear_rejected(self):
        with pytest.raises(ValueError, match="collinear"):
            triangulate(frame_from([(0, 0), (1, 1), (2, 2), (3, 3)], 10, 10))

    def test_duplicates_rejected_with_indices(self):
        with pytest.raises(ValueError, match="1==3"):
            triangulate(frame_from([(0, 0), (2, 3), (5, 1), (2, 3)], 10, 10))

    def test_euler_relation_random_sets(self, rng):
        for _ in range(100):
            n = int(rng.integers(3, 60))
            frame = random_frame(rng, n)
            mesh = triangulate(frame)
            h = len(hull_indices(frame.anchors))
            assert mesh.triangle_count == 2 * n - 2 - h

    def test_empty_circumcircle_property(self, rng):
        for _ in range(20):
            n = int(rng.integers(4, 40))
            frame = random_frame(rng, n, width=100, height=100)
            mesh = triangulate(frame)
            pts = frame.anchors
            for k in range(mesh.triangle_count):
                ia, ib, ic = mesh.connectivity[k]
                a, b, c = pts[ia], pts[ib], pts[ic]
                span = max(np.ptp(pts[:, 0]), np.ptp(pts[:, 1]), 1.0)
                for j in range(n):
                    if j in (ia, ib, ic):
                        continue
                    assert in_circumcircle(a, b, c, pts[j]) <= 1e-9 * span**4

    def test_canonical_68_layout_euler(self):
        anchors = canonical_face_anchors(512, 512)
        frame = frame_from(anchors, 512, 512)
        mesh = triangulate(frame)
        h = len(hull_indices(anchors))
        assert mesh.triangle_count == 2 * 68 - 2 - h
        assert convex_hull_vertex_count(anchors) == h

    def test_deterministic_connectivity(self, rng):
        frame = random_frame(rng, 30)
        a = triangulate(frame)
        b = triangulate(frame)
        assert np.array_equal(a.connectivity, b.connectivity)

    def test_ccw_orientation(self, rng):
        from meshmotion.geometry import signed_area

        mesh = triangulate(random_frame(rng, 25))
        for k in range(mesh.triangle_count):
            assert signed_area(mesh.triangle(k)) > 0


class TestReposition:
    def test_identity(self, rng):
        frame = random_frame(rng, 12)
        mesh = triangulate(frame)
        again = reposition(mesh, frame)
        assert np.array_equal(again.connectivity, mesh.connectivity)
        assert np.array_equal(again.positions, mesh.positions)

    def test_translation_moves_every_triangle(self, rng):
        frame = random_frame(rng, 12, width=500, height=500)
        mesh = triangulate(frame)
        shifted = frame_from(frame.anchors + [7.0, -3.0], 1000, 1000)
        moved = reposition(mesh, shifted)
        for k in range(mesh.triangle_count):
            assert np.allclose(moved.triangle(k), mesh.triangle(k) + [7.0, -3.0])

    def test_single_moved_point_is_local(self, rng):
        frame = random_frame(rng, 15)
        mesh = triangulate(frame)
        coords = frame.anchors.copy()
        coords[4] += [0.5, 0.5]
        moved = reposition(mesh, frame_from(coords))
        for k in range(mesh.triangle_count):
            changed = not np.array_equal(moved.triangle(k), mesh.triangle(k))
            assert changed == (4 in mesh.connectivity[k])

    def test_count_mismatch(self, rng):
        mesh = triangulate(random_frame(rng, 10))
        with pytest.raises(ValueError, match="anchors"):
            reposition(mesh, random_frame(rng, 11))

    def test_double_reposition_roundtrip(self, rng):
        frame = random_frame(rng, 10)
        mesh = triangulate(frame)
        other = random_frame(rng, 10)
        back = reposition(reposition(mesh, other), frame)
        assert np.array_equal(back.positions, mesh.positions)


class TestMeshMeasures:
    def test_single_triangle_area(self):
        mesh = TriMesh([[0, 1, 2]], [(0, 0), (1, 0), (0, 1)])
        assert mesh_area(mesh) == 0.5

    def test_square_area(self):
        mesh = triangulate(frame_from([(0, 0), (1, 0), (1, 1), (0, 1)], 10, 10))
        assert mesh_area(mesh) == pytest.approx(1.0, abs=1e-12)

    def test_area_equals_hull_area(self, rng):
        for _ in range(50):
            n = int(rng.integers(4, 40))
            frame = random_frame(rng, n, width=10, height=10)
            mesh = triangulate(frame)
            assert mesh_area(mesh) == pytest.approx(hull_area(frame.anchors), abs=1e-9)

    def test_longest_side_unit_right(self):
        mesh = TriMesh([[0, 1, 2]], [(0, 0), (1, 0), (0, 1)])
        assert longest_side(mesh) == pytest.approx(np.sqrt(2), abs=1e-12)

    def test_longest_side_square(self):
        mesh = triangulate(frame_from([(0, 0), (1, 0), (1, 1), (0, 1)], 10, 10))
        assert longest_side(mesh) == pytest.approx(np.sqrt(2), abs=1e-12)

    def test_subdivision_never_grows_longest_side(self, rng):
        for _ in range(20):
            mesh = triangulate(random_frame(rng, int(rng.integers(4, 25))))
            sub = centroid_subdivide(mesh)
            assert longest_side(sub) <= longest_side(mesh) + 1e-12


class TestCentroidSubdivide:
    def test_triangle_count_triples(self, rng):
        mesh = triangulate(random_frame(rng, 10))
        sub = centroid_subdivide(mesh)
        assert sub.triangle_count == 3 * mesh.triangle_count

    def test_area_preserved(self, rng):
        mesh = triangulate(random_frame(rng, 10, width=10, height=10))
        sub = centroid_subdivide(mesh)
        assert mesh_area(sub) == pytest.approx(mesh_area(mesh), abs=1e-9)


class TestEvaluateBound:
    def test_zero_lambda(self, rng):
        mesh = triangulate(random_frame(rng, 8))
        rep = evaluate_bound(mesh, mesh, 0.0, 68)
        assert rep.term1 == 0.0

    def test_term1_at_68_anchors(self, rng):
        mesh = triangulate(random_frame(rng, 8))
        rep = evaluate_bound(mesh, mesh, 1.0, 68)
        assert rep.term1 == 2.0 / 68**2
        assert rep.term1 == pytest.approx(4.3253e-4, rel=1e-4)

    def test_unit_square_bound(self):
        mesh = triangulate(frame_from([(0, 0), (1, 0), (1, 1), (0, 1)], 10, 10))
        rep = evaluate_bound(mesh, mesh, 0.0, 68)
        assert rep.bound == pytest.approx(np.sqrt(2) * 1.0, abs=1e-9)

    def test_bound_fields_consistent(self, rng):
        src = triangulate(random_frame(rng, 9))
        dst = triangulate(random_frame(rng, 9))
        rep = evaluate_bound(src, dst, 2.5, 40)
        assert rep.term1 == 2.0 * 2.5 / 40**2
        assert rep.term2 == longest_side(dst) * mesh_area(src)
        assert rep.bound == rep.term1 + rep.term2
        assert rep.term1 >= 0 and rep.term2 >= 0 and rep.bound >= 0

    def test_monotone_under_dst_subdivision(self, rng):
        for _ in range(20):
            src = triangulate(random_frame(rng, int(rng.integers(4, 20))))
            dst = triangulate(random_frame(rng, int(rng.integers(4, 20))))
            before = evaluate_bound(src, dst, 1.0, 68).bound
            after = evaluate_bound(src, centroid_subdivide(dst), 1.0, 68).bound
            assert after <= before + 1e-12

    def test_rejects_zero_contour_count(self, rng):
        mesh = triangulate(random_frame(rng, 8))
        with pytest.raises(ValueError, match="contour_count"):
            evaluate_bound(mesh, mesh, 1.0, 0)

    def test_rejects_negative_lambda(self, rng):
        mesh = triangulate(random_frame(rng, 8))
        with pytest.raises(ValueError, match="lam"):
            evaluate_bound(mesh, mesh, -0.5, 68)


class TestMeshIO:
    def test_round_trip(self, rng):
        mesh = triangulate(random_frame(rng, 14))
        buf = io.StringIO()
        write_mesh(mesh, buf)
        text = buf.getvalue()
        assert text.splitlines()[0] == f"{mesh.triangle_count} 14"
        back = read_mesh(io.StringIO(text), mesh.positions)
        assert np.array_equal(back.connectivity, mesh.connectivity)

    def test_byte_stable(self, rng):
        frame = random_frame(rng, 14)
        a, b = io.StringIO(), io.StringIO()
        write_mesh(triangulate(frame), a)
        write_mesh(triangulate(frame), b)
        assert a.getvalue() == b.getvalue()
