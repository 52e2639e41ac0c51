"""Periodic honeycomb lattice with three-coloured faces.

Faces sit on a triangular lattice with integer coordinates (i, j) and colour
(i - j) mod 3. Three faces, one of each colour, form a super-cell spanned by
b1 = (1, 1) and b2 = (-1, 2); ``L`` super-cells per direction close the colouring
on the torus for every L. Vertices are the triangles of the face lattice: the
up triangle of (i, j) touches faces (i, j), (i+1, j), (i, j+1); the down
triangle touches (i+1, j), (i, j+1), (i+1, j+1). Up vertices are black and
down vertices white.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..cells import CellLayout

COLORS = ("red", "green", "blue")
BICOLORS = ("black", "white")


def face_cell(i, j):
    """Super-cell coordinates and colour of triangular face (i, j), unwrapped."""
    i = np.asarray(i, dtype=np.int64)
    j = np.asarray(j, dtype=np.int64)
    c = np.mod(i - j, 3)
    s2 = (j - i + c) // 3
    s1 = i - c + s2
    return s1, s2, c


def face_ij(s1, s2, c):
    return c + s1 - s2, s1 + 2 * s2


@dataclass(frozen=True)
class HexLattice:
    L1: int
    L2: int
    vertex_color: np.ndarray  # 0 black, 1 white
    edges: np.ndarray  # (9L^2, 2) black endpoint first
    edge_color: np.ndarray
    faces: np.ndarray  # (3L^2, 6) vertex ids
    face_color: np.ndarray
    face_edges: np.ndarray  # (3L^2, 6) edge ids
    vertex_pos: np.ndarray
    face_pos: np.ndarray

    @property
    def L(self) -> int:
        return self.L1

    @property
    def vertex_layout(self) -> CellLayout:
        return CellLayout((self.L1, self.L2, 1), 6)

    @property
    def edge_layout(self) -> CellLayout:
        return CellLayout((self.L1, self.L2, 1), 9)

    @property
    def n_vertices(self) -> int:
        return len(self.vertex_color)


def _vertex(vl: CellLayout, i, j, down):
    s1, s2, c = face_cell(i, j)
    return vl.index(np.stack([s1, s2, np.zeros_like(s1)], -1), 2 * c + down)


def build_hex_lattice(L: int) -> HexLattice:
    if L < 2:
        raise ValueError("L must be at least 2")
    return hex_torus(L, L)


def hex_torus(L1: int, L2: int) -> HexLattice:
    """Honeycomb torus of L1 x L2 super-cells (thin tori are used internally)."""
    vl = CellLayout((L1, L2, 1), 6)
    el = CellLayout((L1, L2, 1), 9)
    n_f = 3 * L1 * L2
    cells = vl.all_cells()
    s1, s2 = cells[:, 0], cells[:, 1]

    vertex_color = np.tile(np.array([0, 1] * 3), L1 * L2)
    a1, a2 = np.array([1.0, 0.0]), np.array([0.5, np.sqrt(3) / 2])

    edges = np.zeros((el.size, 2), np.int64)
    edge_color = np.zeros(el.size, np.int64)
    face_pos = np.zeros((n_f, 2))
    vertex_pos = np.zeros((vl.size, 2))
    for c in range(3):
        i, j = face_ij(s1, s2, c)
        up = vl.index(cells, 2 * c)
        nbrs = [(i, j), (i, j - 1), (i - 1, j)]
        colors = [c, (c - 1) % 3, (c + 1) % 3]
        for d in range(3):
            e = el.index(cells, 3 * c + d)
            edges[e, 0] = up
            edges[e, 1] = _vertex(vl, *nbrs[d], 1)
            edge_color[e] = colors[d]
        f = cells[:, 0] * L2 * 3 + cells[:, 1] * 3 + c
        face_pos[f] = i[:, None] * a1 + j[:, None] * a2
        vertex_pos[up] = (i[:, None] + 1 / 3) * a1 + (j[:, None] + 1 / 3) * a2
        vertex_pos[vl.index(cells, 2 * c + 1)] = (i[:, None] + 2 / 3) * a1 + (j[:, None] + 2 / 3) * a2

    # faces: the six triangles around (i, j), in cyclic order
    faces = np.zeros((n_f, 6), np.int64)
    face_color = np.zeros(n_f, np.int64)
    for c in range(3):
        i, j = face_ij(s1, s2, c)
        f = cells[:, 0] * L2 * 3 + cells[:, 1] * 3 + c
        ring = [(i, j, 0), (i - 1, j, 1), (i - 1, j, 0), (i - 1, j - 1, 1), (i, j - 1, 0), (i, j - 1, 1)]
        for k, (a, b, dn) in enumerate(ring):
            faces[f, k] = _vertex(vl, a, b, dn)
        face_color[f] = c

    lookup = {}
    for e, (u, v) in enumerate(edges):
        lookup[(int(u), int(v))] = e
        lookup[(int(v), int(u))] = e
    face_edges = np.array([[lookup[(int(r[k]), int(r[(k + 1) % 6]))] for k in range(6)] for r in faces],
                          dtype=np.int64)
    return HexLattice(L1, L2, vertex_color, edges, edge_color, faces, face_color, face_edges,
                      vertex_pos, face_pos)
