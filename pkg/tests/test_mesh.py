from collections import Counter

import numpy as np
import pytest

from wearfem.fe_space import FeSpace
from wearfem.mesh import BoundaryTag, Mesh, MeshError, unit_square_mesh


def test_smallest_grid():
    m = unit_square_mesh(1)
    assert m.n_vertices == 4
    assert m.n_triangles == 2
    edges = m.contact_edges()
    assert len(edges) == 1
    a, b = edges[0].vertices
    assert np.linalg.norm(m.vertices[a] - m.vertices[b]) == pytest.approx(1.0)


def test_two_by_two_grid():
    m = unit_square_mesh(2)
    assert m.n_vertices == 9
    assert m.n_triangles == 8
    assert len(m.dirichlet_nodes) == 3
    assert len(m.contact_nodes) == 3
    assert np.allclose(m.vertices[m.contact_nodes], [[0, 0], [0.5, 0], [1, 0]])


def test_contact_side_has_16_edges():
    m = unit_square_mesh(16)
    assert len(m.contact_edges()) == 16
    assert m.h_contact == pytest.approx(1 / 16)


def test_rejects_zero():
    with pytest.raises(MeshError):
        unit_square_mesh(0)


def test_corner_is_clamped_not_contact():
    m = unit_square_mesh(4)
    corner = int(np.flatnonzero(np.all(m.vertices == 0.0, axis=1))[0])
    assert corner in m.dirichlet_nodes
    assert corner in m.contact_nodes
    space = FeSpace(m)
    assert corner not in space.contact_nodes
    assert space.n_contact == 4


@pytest.mark.parametrize("n", [1, 2, 3, 8, 17])
def test_areas_and_contact_lengths(n):
    m = unit_square_mesh(n)
    assert np.all(m.areas > 0)
    assert m.areas.sum() == pytest.approx(1.0, abs=1e-12)
    lengths = [np.linalg.norm(np.subtract(*m.vertices[list(e.vertices)])) for e in m.contact_edges()]
    assert sum(lengths) == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(lengths, 1.0 / n, atol=1e-15)


@pytest.mark.parametrize("n", [1, 3, 6])
def test_boundary_tags_cover_boundary(n):
    m = unit_square_mesh(n)
    count = Counter()
    for tri in m.triangles:
        for k in range(3):
            count[frozenset((int(tri[k]), int(tri[(k + 1) % 3])))] += 1
    # conforming: interior edges shared by exactly two triangles
    assert set(count.values()) <= {1, 2}
    boundary = {e for e, c in count.items() if c == 1}
    tagged = [frozenset(e.vertices) for e in m.boundary_edges]
    assert len(tagged) == len(set(tagged))
    assert set(tagged) == boundary
    dirichlet_len = sum(np.linalg.norm(np.subtract(*m.vertices[list(e.vertices)]))
                        for e in m.edges_with_tag(BoundaryTag.DIRICHLET))
    assert dirichlet_len > 0


def test_normals_unit_and_outward():
    m = unit_square_mesh(5)
    for e in m.boundary_edges:
        nu = m.outward_normal(e)
        assert np.linalg.norm(nu) == pytest.approx(1.0, abs=1e-14)
        mid = m.vertices[list(e.vertices)].mean(axis=0)
        probe = mid + 1e-3 * nu
        assert not (0 < probe[0] < 1 and 0 < probe[1] < 1)
    bottom = m.contact_edges()[0]
    assert np.array_equal(m.outward_normal(bottom), [0.0, -1.0])
    right = [e for e in m.edges_with_tag(BoundaryTag.NEUMANN) if np.all(m.vertices[list(e.vertices), 0] == 1)]
    assert np.array_equal(m.outward_normal(right[0]), [1.0, 0.0])


def _single(verts):
    return Mesh(np.array(verts, dtype=float), np.array([[0, 1, 2]]), [], np.array([], dtype=int),
                np.array([], dtype=int), 1.0, 1)


def test_reference_triangle_geometry():
    area, grads = _single([(0, 0), (1, 0), (0, 1)]).element_geometry(0)
    assert area == pytest.approx(0.5)
    assert np.allclose(grads, [[-1, -1], [1, 0], [0, 1]])


def test_translated_triangle_geometry():
    a0, g0 = _single([(0, 0), (1, 0), (0, 1)]).element_geometry(0)
    a1, g1 = _single([(3.5, -2), (4.5, -2), (3.5, -1)]).element_geometry(0)
    assert a1 == pytest.approx(a0, abs=1e-14)
    assert np.allclose(g1, g0, atol=1e-14)


def test_degenerate_triangle_rejected():
    with pytest.raises(MeshError):
        _single([(0, 0), (1, 0), (2, 0)])


@pytest.mark.parametrize("n", [2, 7])
def test_gradients_sum_to_zero(n):
    m = unit_square_mesh(n)
    assert np.allclose(m.gradients.sum(axis=1), 0.0, atol=1e-12)


@pytest.mark.parametrize("n", [2, 4, 8, 16, 32])
def test_meshes_are_nested(n):
    coarse, fine = unit_square_mesh(n), unit_square_mesh(2 * n)
    fine_set = {tuple(np.round(v * 2 * n).astype(int)) for v in fine.vertices}
    assert all(tuple(np.round(v * 2 * n).astype(int)) in fine_set for v in coarse.vertices)
    # every fine triangle lies inside one coarse triangle
    centroids = fine.vertices[fine.triangles].mean(axis=1)
    _, bary = coarse.locate(centroids)
    assert np.all(bary > -1e-12)


def test_locate_and_evaluate_linear():
    m = unit_square_mesh(4)
    nodal = np.column_stack([2 * m.vertices[:, 0] - m.vertices[:, 1], m.vertices[:, 1] + 1])
    pts = np.random.default_rng(0).random((50, 2))
    vals = m.evaluate(nodal, pts)
    assert np.allclose(vals, np.column_stack([2 * pts[:, 0] - pts[:, 1], pts[:, 1] + 1]), atol=1e-13)


def test_vtk_export(tmp_path):
    m = unit_square_mesh(2)
    path = m.write_vtk(tmp_path / "m.vtk")
    lines = path.read_text().splitlines()
    assert lines[0] == "# vtk DataFile Version 3.0"
    assert "DATASET UNSTRUCTURED_GRID" in lines
    assert "POINTS 9 double" in lines
    assert "CELLS 8 32" in lines
    i = lines.index("CELL_TYPES 8")
    assert lines[i + 1:i + 9] == ["5"] * 8
