"""Foliated lattices: the FFCC, its branched variant, and the Raussendorf lattice.

Layers are indexed tau = 0..T-1. Check nodes at layer tau sit on the edges of
colour ``schedule_color(tau)``: blue, green, red, repeating. FFCC cells are one
honeycomb super-cell times six layers, so T must be a multiple of 6.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from ..cells import CellLayout
from .hexagonal import HexLattice, build_hex_lattice, hex_torus
from ..pattern import StabilizerPattern, Template, graph_state_pattern, local_templates

BLOCK = 6  # layers per FFCC time cell
DATA_SUBS = 6 * BLOCK
CHECK_SUBS = 3 * BLOCK


def schedule_color(tau):
    """Edge colour measured at layer tau (0 red, 1 green, 2 blue)."""
    return np.mod(2 - np.asarray(tau), 3)


@dataclass
class FoliatedLattice:
    """A measurement-based lattice together with the pattern it realises.

    ``nodes`` are the measured, noisy qubits of the lattice; their ids are the
    outcome ids used by the decoder. ``edges`` is the resource graph over those
    nodes (for the branched variant, the graph after removing the virtual
    check nodes).
    """

    kind: str  # "ffcc", "ffcc_branched", "raussendorf"
    L: int
    T: int
    node_kind: np.ndarray  # str per node
    node_coords: np.ndarray  # (n, 4) integers, meaning depends on kind
    edges: np.ndarray  # (m, 2)
    pattern: StabilizerPattern = field(repr=False)
    hex: HexLattice | None = field(default=None, repr=False)

    @property
    def n_nodes(self) -> int:
        return len(self.node_kind)

    @property
    def dims(self):
        return self.pattern.dims

    def valency(self) -> np.ndarray:
        return np.bincount(self.edges.ravel(), minlength=self.n_nodes)

    def templates(self) -> list[Template]:
        return family_templates(self.kind)


# FFCC --------------------------------------------------------------------------


def _ffcc_ids(dims):
    """Qubit layout and id helpers for an FFCC instance with super-cell dims."""
    L1, L2, nb = dims
    lay = CellLayout((L1, L2, nb), DATA_SUBS + CHECK_SUBS)
    hx = hex_torus(L1, L2)
    vl = hx.vertex_layout
    el = hx.edge_layout

    def data(v, tau):
        cell = vl.cell_of(v).copy()
        cell[..., 2] = np.floor_divide(tau, BLOCK)
        return lay.index(cell, np.mod(tau, BLOCK) * 6 + vl.sub_of(v))

    def check(e, tau):
        cell = el.cell_of(e).copy()
        cell[..., 2] = np.floor_divide(tau, BLOCK)
        # within a colour class, the edge's slot is its direction index d = sub % 3
        return lay.index(cell, DATA_SUBS + np.mod(tau, BLOCK) * 3 + el.sub_of(e) % 3)

    return lay, hx, data, check


def _ffcc_graph(dims):
    lay, hx, data, check = _ffcc_ids(dims)
    T = dims[2] * BLOCK
    n_v = hx.n_vertices
    v = np.arange(n_v)
    temporal, check_edges, direct = [], [], []
    check_nodes = []
    for tau in range(T):
        temporal.append(np.c_[data(v, tau), data(v, tau + 1)])
        es = np.flatnonzero(hx.edge_color == schedule_color(tau))
        c = check(es, tau)
        a = data(hx.edges[es, 0], tau)
        b = data(hx.edges[es, 1], tau)
        check_edges.append(np.c_[c, a])
        check_edges.append(np.c_[c, b])
        direct.append(np.c_[a, b])
        check_nodes.append(np.c_[c, es, np.full(es.size, tau)])
    return (lay, hx, np.concatenate(temporal), np.concatenate(check_edges),
            np.concatenate(direct), np.concatenate(check_nodes))


def ffcc_pattern(dims, virtual_checks: bool = False) -> StabilizerPattern:
    lay, hx, temporal, check_edges, _, _ = _ffcc_graph(dims)
    n = lay.size
    noisy = np.ones(n, bool)
    if virtual_checks:
        noisy = lay.sub_of(np.arange(n)) < DATA_SUBS
    eye = sp.identity(n, np.uint8, format="csr")
    return graph_state_pattern(lay, np.r_[temporal, check_edges], eye, sp.csr_matrix((n, n), dtype=np.uint8),
                               noisy, lambda d: ffcc_pattern(d, virtual_checks))


def foliate_ffcc(hx: HexLattice, T: int) -> FoliatedLattice:
    if T <= 0 or T % BLOCK:
        raise ValueError("T must be a positive multiple of 6")
    dims = (hx.L1, hx.L2, T // BLOCK)
    lay, _, temporal, check_edges, _, check_nodes = _ffcc_graph(dims)
    _, _, data, _ = _ffcc_ids(dims)
    n = lay.size
    kind = np.empty(n, dtype=object)
    coords = np.zeros((n, 4), np.int64)
    v = np.arange(hx.n_vertices)
    for tau in range(T):
        ids = data(v, tau)
        kind[ids] = "data"
        coords[ids] = np.c_[v, np.full(v.size, tau), np.zeros(v.size), hx.vertex_color[v]]
    kind[check_nodes[:, 0]] = "check"
    coords[check_nodes[:, 0]] = np.c_[check_nodes[:, 1], check_nodes[:, 2],
                                      np.ones(len(check_nodes)), hx.edge_color[check_nodes[:, 1]]]
    edges = np.sort(np.r_[temporal, check_edges], axis=1)
    return FoliatedLattice("ffcc", hx.L1, T, kind.astype(str), coords, edges,
                           ffcc_pattern(dims), hx)


def branched_variant(f: FoliatedLattice) -> FoliatedLattice:
    """FFCC with check nodes X-measured away.

    Node ids are the data ids of ``f`` in the same order. The measurement
    pattern keeps the check qubits as noiseless outcomes: X-measuring a
    two-valent node is deterministic up to a known Pauli frame, so detectors
    become the FFCC detectors restricted to data qubits.
    """
    if f.kind != "ffcc":
        raise ValueError("branched_variant requires an FFCC lattice")
    dims = f.dims
    lay, _, temporal, _, direct, _ = _ffcc_graph(dims)
    data_ids = np.flatnonzero(f.node_kind == "data")
    remap = -np.ones(lay.size, np.int64)
    remap[data_ids] = np.arange(data_ids.size)
    edges = np.sort(remap[np.r_[temporal, direct]], axis=1)
    return FoliatedLattice("ffcc_branched", f.L, f.T, f.node_kind[data_ids], f.node_coords[data_ids],
                           edges, ffcc_pattern(dims, virtual_checks=True), f.hex)


# Raussendorf -----------------------------------------------------------------

# qubit subs per unit cube at vertex p: faces F_xy, F_yz, F_zx then edges E_x, E_y, E_z
RHG_FACE_EDGES = {
    0: [(3, (0, 0, 0)), (4, (0, 0, 0)), (3, (0, 1, 0)), (4, (1, 0, 0))],
    1: [(4, (0, 0, 0)), (5, (0, 0, 0)), (4, (0, 0, 1)), (5, (0, 1, 0))],
    2: [(5, (0, 0, 0)), (3, (0, 0, 0)), (5, (1, 0, 0)), (3, (0, 0, 1))],
}
RHG_OFFSETS = np.array([[.5, .5, 0], [0, .5, .5], [.5, 0, .5], [.5, 0, 0], [0, .5, 0], [0, 0, .5]])


def rhg_graph(dims) -> tuple[CellLayout, np.ndarray]:
    lay = CellLayout(tuple(dims), 6)
    cells = lay.all_cells()
    edges = []
    for f, inc in RHG_FACE_EDGES.items():
        a = lay.index(cells, f)
        for e, off in inc:
            edges.append(np.c_[a, lay.index(cells + np.array(off), e)])
    return lay, np.concatenate(edges)


def rhg_pattern(dims) -> StabilizerPattern:
    lay, edges = rhg_graph(dims)
    n = lay.size
    return graph_state_pattern(lay, edges, sp.identity(n, np.uint8, format="csr"),
                               sp.csr_matrix((n, n), dtype=np.uint8), np.ones(n, bool), rhg_pattern)


def build_raussendorf(L: int, T: int) -> FoliatedLattice:
    if L < 2 or T < 2:
        raise ValueError("L and T must be at least 2")
    dims = (L, L, T)
    lay, edges = rhg_graph(dims)
    ids = np.arange(lay.size)
    sub = lay.sub_of(ids)
    kind = np.where(sub < 3, "face", "edge")
    coords = np.c_[lay.cell_of(ids), sub]
    return FoliatedLattice("raussendorf", L, T, kind, coords, np.sort(edges, axis=1), rhg_pattern(dims))


# templates -------------------------------------------------------------------

_FAMILIES = {
    "ffcc": lambda d: ffcc_pattern(d),
    "ffcc_branched": lambda d: ffcc_pattern(d, virtual_checks=True),
    "raussendorf": rhg_pattern,
}


@lru_cache(maxsize=None)
def family_templates(kind: str) -> list[Template]:
    return local_templates(_FAMILIES[kind])


def build_lattice(model: str, L: int, T: int | None = None) -> FoliatedLattice:
    """Convenience constructor by model name (T defaults to 3L, or L for Raussendorf)."""
    if model == "raussendorf":
        return build_raussendorf(L, T if T is not None else L)
    f = foliate_ffcc(build_hex_lattice(L), T if T is not None else 3 * L)
    if model == "ffcc":
        return f
    if model == "ffcc_branched":
        return branched_variant(f)
    raise ValueError(f"unknown model {model!r}")
