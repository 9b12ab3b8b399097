import numpy as np
import pytest

from reggecurv.errors import DegenerateMeshError
from reggecurv.mesh import DIRICHLET, NEUMANN, Mesh, perturb_interior, structured_square, unit_square


def counts_test():
    mesh = structured_square(0)
    assert (mesh.num_triangles, mesh.num_vertices, mesh.num_edges) == (2, 4, 5)

    mesh = structured_square(2)
    assert (mesh.num_triangles, mesh.num_vertices, mesh.num_edges) == (32, 25, 56)


@pytest.mark.parametrize("level", range(6))
def euler_test(level):
    mesh = structured_square(level)
    n = 2**level
    assert mesh.num_triangles == 2 * n**2
    assert mesh.num_edges == 3 * n**2 + 2 * n
    assert mesh.num_vertices - mesh.num_edges + mesh.num_triangles == 1
    assert np.all(mesh.signed_areas() > 0)
    assert mesh.h == pytest.approx(np.sqrt(2.0) * 2.0**-level)


def edge_incidence_test():
    mesh = structured_square(3)
    boundary = mesh.boundary_edge_mask
    assert np.count_nonzero(boundary) == 4 * 8
    assert np.all(mesh.edge_triangles[~boundary] >= 0)

    # every triangle refers back to its edges
    for t in range(mesh.num_triangles):
        for i in range(3):
            e = mesh.triangle_edges[t, i]
            assert t in mesh.edge_triangles[e]


def boundary_labels_test():
    mesh = structured_square(2)
    midpoints = mesh.vertices[mesh.edges].mean(axis=1)

    dirichlet = mesh.edges_with_label(DIRICHLET)
    neumann = mesh.edges_with_label(NEUMANN)
    assert len(dirichlet) + len(neumann) == np.count_nonzero(mesh.boundary_edge_mask)

    m = midpoints[dirichlet]
    assert np.all(np.isclose(m[:, 0], 1.0) | np.isclose(m[:, 1], 0.0))
    m = midpoints[neumann]
    assert np.all(np.isclose(m[:, 0], 0.0) | np.isclose(m[:, 1], 1.0))


def local_frames_test():
    mesh = structured_square(1)
    for i in range(3):
        tangent, normal, length = mesh.local_frames(i)
        np.testing.assert_allclose(np.linalg.norm(tangent, axis=1), 1.0)
        np.testing.assert_allclose(np.sum(tangent * normal, axis=1), 0.0, atol=1e-15)
        assert np.all(length > 0)

    # first triangle (0,0), (1/2,0), (1/2,1/2): its bottom edge is local edge 2, triangle above it
    tangent, normal, _ = mesh.local_frames(2)
    np.testing.assert_allclose(tangent[0], [1.0, 0.0])
    np.testing.assert_allclose(normal[0], [0.0, 1.0])


def interior_edge_normals_test():
    mesh = structured_square(2)
    frames = [mesh.local_frames(i) for i in range(3)]
    for e in np.flatnonzero(~mesh.boundary_edge_mask):
        (t0, t1), (i0, i1) = mesh.edge_triangles[e], mesh.edge_local_index[e]
        np.testing.assert_allclose(frames[i0][1][t0], -frames[i1][1][t1], atol=1e-15)


def perturb_test():
    mesh = structured_square(3)
    a = perturb_interior(mesh, seed=11)
    b = perturb_interior(mesh, seed=11)
    np.testing.assert_array_equal(a.vertices, b.vertices)

    boundary = mesh.boundary_vertex_mask
    np.testing.assert_array_equal(a.vertices[boundary], mesh.vertices[boundary])

    displacement = np.abs(a.vertices - mesh.vertices)
    assert displacement.max() <= mesh.h / 2**2.5
    assert displacement[~boundary].max() > 0
    assert np.all(a.signed_areas() > 0)
    np.testing.assert_array_equal(a.edge_labels, mesh.edge_labels)


@pytest.mark.parametrize("level", range(7))
def perturb_sweep_test(level):
    mesh = structured_square(level)
    for seed in range(100):
        moved = perturb_interior(mesh, seed)
        assert moved.signed_areas().min() > 0.0

    np.testing.assert_array_equal(
        unit_square(level, perturb=True, seed=7).vertices, perturb_interior(mesh, 7).vertices
    )


def with_vertices_test():
    mesh = structured_square(1)
    with pytest.raises(ValueError):
        mesh.with_vertices(mesh.vertices[:-1])

    flipped = mesh.vertices.copy()
    flipped[4] = [2.0, 2.0]
    with pytest.raises(DegenerateMeshError):
        mesh.with_vertices(flipped)


def edge_frames_test():
    mesh = unit_square(2, perturb=True, seed=3)
    for e in range(mesh.num_edges):
        tangent, triangles, normals, length = mesh.edge_frames(e)
        a, b = mesh.vertices[mesh.edges[e]]
        np.testing.assert_allclose(tangent * length, b - a, atol=1e-14)
        assert len(triangles) == (1 if mesh.boundary_edge_mask[e] else 2)
        np.testing.assert_allclose(normals @ tangent, 0.0, atol=1e-14)

        for t, normal in zip(triangles, normals):
            opposite = mesh.vertices[mesh.triangles[t]].sum(axis=0) - a - b
            assert np.dot(opposite - 0.5 * (a + b), normal) > 0.0

            # agrees with the element frame up to the orientation sign
            i = list(mesh.triangle_edges[t]).index(e)
            local_tangent, local_normal, _ = mesh.local_frames(i, np.array([t]))
            np.testing.assert_allclose(local_tangent[0], mesh.triangle_edge_signs[t, i] * tangent, atol=1e-15)
            np.testing.assert_allclose(local_normal[0], normal, atol=1e-15)
        if len(triangles) == 2:
            np.testing.assert_allclose(normals[0], -normals[1], atol=1e-15)


def degenerate_test():
    vertices = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]
    with pytest.raises(DegenerateMeshError):
        Mesh(vertices, [[0, 2, 1]])


def dump_test(tmp_path):
    import pandas as pds

    mesh = structured_square(1)
    vfile, tfile = mesh.dump(tmp_path / "mesh.csv")
    vertices = pds.read_csv(vfile, index_col=0)
    triangles = pds.read_csv(tfile, index_col=0)
    np.testing.assert_array_equal(vertices.values, mesh.vertices)
    np.testing.assert_array_equal(triangles.values, mesh.triangles)
