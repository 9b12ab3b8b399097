"""
Conforming triangle meshes of polygonal domains.

Conventions used throughout the package:

- Triangles are stored counterclockwise. Local edge ``i`` of a triangle is the
  edge opposite local vertex ``i`` and runs from local vertex ``(i + 1) % 3`` to
  ``(i + 2) % 3``, so the element lies to the left of it.
- Every edge carries a global orientation from its lower to its higher vertex
  index.
- Boundary edges carry a label (``DIRICHLET`` or ``NEUMANN``).
"""

import copy

import numpy as np
import pandas as pds

from .errors import DegenerateMeshError


INTERIOR = 0
DIRICHLET = 1
NEUMANN = 2


def local_edge_vertices(i):
    """Local vertex indices (start, end) of local edge ``i``."""
    return (i + 1) % 3, (i + 2) % 3


def unit_square_labels(midpoints, tol=1e-12):
    """Label boundary edges of the unit square by their midpoint.

    The right (x = 1) and bottom (y = 0) sides are Dirichlet, the left (x = 0)
    and top (y = 1) sides Neumann.
    """
    midpoints = np.asarray(midpoints)
    dirichlet = (np.abs(midpoints[:, 0] - 1.0) < tol) | (np.abs(midpoints[:, 1]) < tol)
    return np.where(dirichlet, DIRICHLET, NEUMANN)


class ElementMaps(object):
    """Affine maps x = x0 + F x_hat of all triangles, stored as arrays."""

    def __init__(self, vertices, triangles):
        corners = vertices[triangles]
        self.x0 = corners[:, 0, :]
        self.F = np.stack([corners[:, 1, :] - corners[:, 0, :], corners[:, 2, :] - corners[:, 0, :]], axis=-1)
        self.det = self.F[:, 0, 0] * self.F[:, 1, 1] - self.F[:, 0, 1] * self.F[:, 1, 0]
        self.inverse = np.linalg.inv(self.F)

    def __len__(self):
        return len(self.det)

    def to_physical(self, ref_points, elements=None):
        """Map reference points (n, 2) to physical points (T, n, 2)."""
        if elements is None:
            elements = slice(None)
        return self.x0[elements, None, :] + np.einsum("tij,nj->tni", self.F[elements], np.asarray(ref_points))


class Mesh(object):
    """A conforming, counterclockwise triangulation with labelled boundary.

    Parameters
    ----------
    vertices : array_like
        Vertex coordinates, shape (V, 2).
    triangles : array_like
        Vertex index triples, shape (T, 3), counterclockwise.
    labeler : callable, optional
        Maps boundary edge midpoints (B, 2) to labels (B,). Defaults to the
        unit square convention of :func:`unit_square_labels`.
    nominal_h : float, optional
        Mesh size reported for convergence studies. Defaults to the longest
        edge.
    """

    def __init__(self, vertices, triangles, labeler=None, nominal_h=None):
        self.vertices = np.array(vertices, dtype=float)
        self.triangles = np.array(triangles, dtype=np.int64)

        if self.vertices.ndim != 2 or self.vertices.shape[1] != 2:
            raise ValueError("vertices must have shape (V, 2), got {}".format(self.vertices.shape))
        if self.triangles.ndim != 2 or self.triangles.shape[1] != 3:
            raise ValueError("triangles must have shape (T, 3), got {}".format(self.triangles.shape))

        self.labeler = unit_square_labels if labeler is None else labeler
        self._nominal_h = nominal_h

        self.check_orientation()
        self._build_edges()
        self._maps = None

    # Construction
    ########################################

    def _build_edges(self):
        edge_index = {}
        edges = []
        edge_triangles = []
        edge_locals = []

        num_triangles = len(self.triangles)
        self.triangle_edges = np.zeros((num_triangles, 3), dtype=np.int64)
        self.triangle_edge_signs = np.zeros((num_triangles, 3), dtype=np.int64)

        for t, tri in enumerate(self.triangles):
            for i in range(3):
                a, b = local_edge_vertices(i)
                va, vb = int(tri[a]), int(tri[b])
                key = (min(va, vb), max(va, vb))
                e = edge_index.get(key)
                if e is None:
                    e = len(edges)
                    edge_index[key] = e
                    edges.append(key)
                    edge_triangles.append([t, -1])
                    edge_locals.append([i, -1])
                else:
                    if edge_triangles[e][1] != -1:
                        raise ValueError("Edge {} is shared by more than two triangles".format(key))
                    edge_triangles[e][1] = t
                    edge_locals[e][1] = i
                self.triangle_edges[t, i] = e
                self.triangle_edge_signs[t, i] = 1 if va < vb else -1

        self.edges = np.array(edges, dtype=np.int64).reshape(-1, 2)
        self.edge_triangles = np.array(edge_triangles, dtype=np.int64).reshape(-1, 2)
        self.edge_local_index = np.array(edge_locals, dtype=np.int64).reshape(-1, 2)

        self.edge_labels = np.full(len(self.edges), INTERIOR, dtype=np.int64)
        boundary = self.boundary_edge_mask
        if np.any(boundary):
            midpoints = self.vertices[self.edges[boundary]].mean(axis=1)
            self.edge_labels[boundary] = self.labeler(midpoints)

    # Basic queries
    ########################################

    @property
    def num_vertices(self):
        return len(self.vertices)

    @property
    def num_edges(self):
        return len(self.edges)

    @property
    def num_triangles(self):
        return len(self.triangles)

    @property
    def boundary_edge_mask(self):
        return self.edge_triangles[:, 1] < 0

    @property
    def boundary_vertex_mask(self):
        mask = np.zeros(self.num_vertices, dtype=bool)
        mask[self.edges[self.boundary_edge_mask].ravel()] = True
        return mask

    def signed_areas(self):
        p = self.vertices[self.triangles]
        d1 = p[:, 1] - p[:, 0]
        d2 = p[:, 2] - p[:, 0]
        return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])

    def check_orientation(self):
        """Raise DegenerateMeshError unless every triangle is counterclockwise."""
        areas = self.signed_areas()
        bad = np.flatnonzero(areas <= 0.0)
        if len(bad) > 0:
            raise DegenerateMeshError(bad[0], areas[bad[0]])

    @property
    def maps(self):
        if self._maps is None:
            self._maps = ElementMaps(self.vertices, self.triangles)
        return self._maps

    def edge_lengths(self):
        d = self.vertices[self.edges[:, 1]] - self.vertices[self.edges[:, 0]]
        return np.hypot(d[:, 0], d[:, 1])

    @property
    def h(self):
        """Nominal mesh size used in convergence tables."""
        if self._nominal_h is not None:
            return self._nominal_h
        return float(self.edge_lengths().max())

    @property
    def max_edge_length(self):
        return float(self.edge_lengths().max())

    def edges_with_label(self, *labels):
        """Indices of boundary edges carrying one of ``labels``."""
        return np.flatnonzero(np.isin(self.edge_labels, labels) & self.boundary_edge_mask)

    def vertices_with_label(self, *labels):
        """Boolean mask of vertices on the closure of the labelled boundary part."""
        mask = np.zeros(self.num_vertices, dtype=bool)
        mask[self.edges[self.edges_with_label(*labels)].ravel()] = True
        return mask

    def local_frames(self, i, elements=None):
        """Unit counterclockwise tangent, inward unit normal and length of local edge ``i``.

        The counterclockwise tangent equals ``triangle_edge_signs[t, i]`` times
        the tangent of the global (low to high vertex) edge orientation.

        Returns
        -------
        tangent, normal : ndarray
            Euclidean unit vectors, shape (T, 2).
        length : ndarray
            Edge lengths, shape (T,).
        """
        if elements is None:
            elements = slice(None)
        tri = self.triangles[elements]
        a, b = local_edge_vertices(i)
        d = self.vertices[tri[:, b]] - self.vertices[tri[:, a]]
        length = np.hypot(d[:, 0], d[:, 1])
        tangent = d / length[:, None]
        normal = np.stack([-tangent[:, 1], tangent[:, 0]], axis=-1)
        return tangent, normal, length

    def edge_frames(self, e):
        """Frame of global edge ``e`` as seen from each incident triangle.

        Returns
        -------
        tangent : ndarray
            Unit tangent (2,) from the lower to the higher vertex index.
        triangles : ndarray
            The one or two incident triangles.
        normals : ndarray
            Unit normal pointing into each incident triangle, shape (m, 2).
        length : float
        """
        triangles = self.edge_triangles[e]
        triangles = triangles[triangles >= 0]
        locals_ = self.edge_local_index[e][: len(triangles)]
        d = self.vertices[self.edges[e, 1]] - self.vertices[self.edges[e, 0]]
        length = float(np.hypot(d[0], d[1]))
        tangent = d / length

        signs = self.triangle_edge_signs[triangles, locals_]
        normals = signs[:, None] * np.array([-tangent[1], tangent[0]])[None, :]
        return tangent, triangles, normals, length

    def vertex_boundary_neighbours(self, v):
        """The two vertices joined to boundary vertex ``v`` by boundary edges."""
        boundary = np.flatnonzero(self.boundary_edge_mask)
        touching = boundary[np.any(self.edges[boundary] == v, axis=1)]
        others = [int(e[0]) if e[1] == v else int(e[1]) for e in self.edges[touching]]
        if len(others) != 2:
            raise ValueError("Vertex {} touches {} boundary edges, expected 2".format(v, len(others)))
        return others

    # Derived meshes
    ########################################

    def with_vertices(self, vertices):
        """Same connectivity and labels, moved vertices."""
        vertices = np.array(vertices, dtype=float)
        if vertices.shape != self.vertices.shape:
            raise ValueError("Expected vertices of shape {}, got {}".format(self.vertices.shape, vertices.shape))
        mesh = copy.copy(self)
        mesh.vertices = vertices
        mesh._maps = None
        mesh.check_orientation()
        return mesh

    def dump(self, path):
        """Write vertices and triangles as two CSV files next to ``path``."""
        stem = str(path)
        if stem.endswith(".csv"):
            stem = stem[:-4]
        pds.DataFrame(self.vertices, columns=["x", "y"]).to_csv(
            stem + "_vertices.csv", index_label="vertex", float_format="%.17g"
        )
        pds.DataFrame(self.triangles, columns=["v0", "v1", "v2"]).to_csv(stem + "_triangles.csv", index_label="triangle")
        return stem + "_vertices.csv", stem + "_triangles.csv"

    def __repr__(self):
        return "<Mesh V={} E={} T={}>".format(self.num_vertices, self.num_edges, self.num_triangles)


def structured_square(level):
    """Structured triangulation of the unit square with 2**level cells per side.

    Each square cell is split along its lower-left to upper-right diagonal.
    Vertex ``j * (n + 1) + i`` sits at ``(i / n, j / n)``.
    """
    level = int(level)
    if level < 0:
        raise ValueError("Mesh level must be nonnegative, got {}".format(level))

    n = 2**level
    ticks = np.linspace(0.0, 1.0, n + 1)
    X, Y = np.meshgrid(ticks, ticks, indexing="xy")
    vertices = np.stack([X.ravel(), Y.ravel()], axis=-1)

    i, j = np.meshgrid(np.arange(n), np.arange(n), indexing="xy")
    v00 = (j * (n + 1) + i).ravel()
    v10 = v00 + 1
    v01 = v00 + (n + 1)
    v11 = v01 + 1
    lower = np.stack([v00, v10, v11], axis=-1)
    upper = np.stack([v00, v11, v01], axis=-1)
    triangles = np.stack([lower, upper], axis=1).reshape(-1, 3)

    return Mesh(vertices, triangles, nominal_h=np.sqrt(2.0) * 2.0**-level)


def perturb_interior(mesh, seed, amplitude=None):
    """Move every interior vertex by an independent uniform offset per coordinate.

    Offsets are drawn from U(-a, a) with ``a = h / 2**2.5`` by default, using
    numpy's PCG64 generator seeded with ``seed``, in ascending order of the
    interior vertex indices.
    """
    if amplitude is None:
        amplitude = mesh.h / 2.0**2.5

    interior = np.flatnonzero(~mesh.boundary_vertex_mask)
    rng = np.random.default_rng(seed)
    offsets = rng.uniform(-amplitude, amplitude, size=(len(interior), 2))

    vertices = mesh.vertices.copy()
    vertices[interior] += offsets
    return mesh.with_vertices(vertices)


def unit_square(level, perturb=False, seed=0):
    """Structured unit-square mesh, optionally with perturbed interior vertices."""
    mesh = structured_square(level)
    if perturb:
        mesh = perturb_interior(mesh, seed)
    return mesh
