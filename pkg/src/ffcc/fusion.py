"""Fusion networks: resource states, fusions, and the outcome-detector incidence.

Two fusion types are used:

* ``cz``: measures X_a Z_b and Z_a X_b. On two graph-state qubits this equals
  a CZ between them followed by X measurements of both, so a network where
  every fusion succeeds reproduces the bare lattice outcome by outcome.
* ``bell``: measures X_a X_b and Z_a Z_b on two halves of a redundantly
  encoded qubit.

Detectors are derived from the composed stabilizer pattern with the same
machinery as for lattices, so the incidence matrix is never hand-written.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .cells import CellLayout
from .code import CLASS_NAMES, CheckCode, derive_code
from .lattice.foliated import (
    BLOCK,
    DATA_SUBS,
    RHG_FACE_EDGES,
    FoliatedLattice,
    _ffcc_ids,
    schedule_color,
)
from .pattern import StabilizerPattern, local_templates

BIAS_TAGS = ("none", "primal_biased", "dual_biased")


@dataclass(frozen=True)
class ResourceSpec:
    kind: str  # chain, branched_chain, star4, hexagon6
    length: float = np.inf


# generic periodic network ----------------------------------------------------


@dataclass
class NetworkGeometry:
    """Everything needed to instantiate a network on a given instance."""

    qubits: CellLayout
    edges: np.ndarray  # graph-state edges (m, 2)
    ghz: np.ndarray  # (g, k) GHZ groups (qubits without graph edges)
    fusions: np.ndarray  # (f, 2)
    fusion_kind: np.ndarray  # "cz" or "bell"
    fusion_layer: np.ndarray
    singles: np.ndarray
    single_noisy: np.ndarray


def _compose(geo: NetworkGeometry, rebuild) -> tuple[StabilizerPattern, np.ndarray, np.ndarray]:
    """Pattern of a network plus outcome -> (fusion index, single index) maps."""
    q = geo.qubits
    n = q.size
    # outcome slots are keyed by the sub of the fusion's first qubit / the single
    fa_sub = q.sub_of(geo.fusions[:, 0])
    s_sub = q.sub_of(geo.singles)
    f_subs = np.unique(fa_sub)
    s_subs = np.unique(s_sub)
    base = -np.ones(q.n_sub, np.int64)
    base[f_subs] = 2 * np.arange(f_subs.size)
    n_f_out = 2 * f_subs.size
    sbase = -np.ones(q.n_sub, np.int64)
    sbase[s_subs] = n_f_out + np.arange(s_subs.size)
    n_out_sub = n_f_out + s_subs.size
    out_lay = CellLayout(q.dims, n_out_sub)

    f_cell = q.cell_of(geo.fusions[:, 0])
    o0 = out_lay.index(f_cell, base[fa_sub])
    o1 = o0 + 1
    so = out_lay.index(q.cell_of(geo.singles), sbase[s_sub])
    n_out = out_lay.size
    if len(np.unique(np.r_[o0, o1, so])) != n_out:
        raise ValueError("network outcomes are not translation invariant")

    a, b = geo.fusions[:, 0], geo.fusions[:, 1]
    cz = geo.fusion_kind == "cz"
    # cz: out0 = X_a Z_b, out1 = Z_a X_b; bell: out0 = X_a X_b, out1 = Z_a Z_b
    rows_x = [o0[cz], o1[cz], o0[~cz], o0[~cz], so]
    cols_x = [a[cz], b[cz], a[~cz], b[~cz], geo.singles]
    rows_z = [o0[cz], o1[cz], o1[~cz], o1[~cz]]
    cols_z = [b[cz], a[cz], a[~cz], b[~cz]]

    def mat(rows, cols):
        r = np.concatenate(rows)
        c = np.concatenate(cols)
        return sp.csr_matrix((np.ones(r.size, np.uint8), (r, c)), shape=(n_out, n))

    meas_x, meas_z = mat(rows_x, cols_x), mat(rows_z, cols_z)

    # generators: graph-state rows, replaced by GHZ generators on GHZ qubits
    e = geo.edges
    gz = sp.coo_matrix((np.ones(2 * len(e), np.uint8), (np.r_[e[:, 0], e[:, 1]], np.r_[e[:, 1], e[:, 0]])),
                       shape=(n, n)).tolil()
    gx = sp.identity(n, np.uint8, format="lil")
    for grp in geo.ghz:
        r = grp[0]
        for k, qk in enumerate(grp):
            gx[qk, qk] = 0
        for qk in grp:
            gx[r, qk] = 1
        for k in range(1, len(grp)):
            gz[grp[k], grp[k - 1]] = 1
            gz[grp[k], grp[k]] = 1
    gx, gz = sp.csr_matrix(gx), sp.csr_matrix(gz)
    gz.data %= 2
    gz.eliminate_zeros()

    noisy = np.ones(n_out, bool)
    noisy[so] = geo.single_noisy
    fusion_of = -np.ones(n_out, np.int64)
    fusion_of[o0] = np.arange(len(o0))
    fusion_of[o1] = np.arange(len(o1))
    single_of = -np.ones(n_out, np.int64)
    single_of[so] = np.arange(len(so))
    pattern = StabilizerPattern(q, out_lay, gx, gz, meas_x, meas_z, noisy, rebuild)
    return pattern, fusion_of, single_of


@dataclass
class FusionNetwork:
    kind: str  # ffcc_chains, ffcc_branched, star4, hexagon6
    L: int
    T: int
    length: float
    geometry: NetworkGeometry = field(repr=False)
    pattern: StabilizerPattern = field(repr=False)
    outcome_fusion: np.ndarray  # per noisy outcome: fusion index or -1
    outcome_single: np.ndarray  # per noisy outcome: single index or -1
    family: tuple = ()  # hashable key to rebuild templates
    bias: np.ndarray | None = None  # per-fusion tag index into BIAS_TAGS
    bias_mode: str = "unbiased"

    @property
    def n_fusions(self) -> int:
        return len(self.geometry.fusions)

    @property
    def fusions(self) -> np.ndarray:
        return self.geometry.fusions

    @property
    def singles(self) -> np.ndarray:
        return self.geometry.singles

    @property
    def n_outcomes(self) -> int:
        return len(self.outcome_fusion)

    def resources(self) -> list[tuple[ResourceSpec, np.ndarray]]:
        """Resource states as (spec, qubit slots), from the graph and GHZ groups."""
        geo = self.geometry
        n = geo.qubits.size
        e = geo.edges
        A = sp.coo_matrix((np.ones(len(e)), (e[:, 0], e[:, 1])), shape=(n, n))
        if len(geo.ghz):
            g = geo.ghz
            A = A + sp.coo_matrix((np.ones(g.size - len(g)), (g[:, :1].repeat(g.shape[1] - 1, 1).ravel(),
                                                                g[:, 1:].ravel())), shape=(n, n))
        _, lab = connected_components(A, directed=False)
        order = np.argsort(lab, kind="stable")
        groups = np.split(order, np.flatnonzero(np.diff(lab[order])) + 1)
        rkind = {"ffcc_chains": "chain", "ffcc_branched": "branched_chain"}.get(self.kind, self.kind)
        return [(ResourceSpec(rkind, self.length), g) for g in groups]

    def code(self) -> CheckCode:
        c = getattr(self, "_code", None)
        if c is None:
            c = derive_code(self.pattern, network_templates(self.family))
            object.__setattr__(self, "_code", c)
        return c

    def incidence(self) -> sp.csr_matrix:
        """Detectors (primal then dual) by noisy outcomes."""
        code = self.code()
        H = code.incidence()
        order = np.r_[code.class_index("primal"), code.class_index("dual")]
        return H[order]

    def outcome_classes(self) -> np.ndarray:
        return self.code().outcome_class

    def fusion_layers(self) -> np.ndarray:
        return self.geometry.fusion_layer


def outcome_qubits(n: FusionNetwork) -> np.ndarray:
    """Per noisy outcome, the qubit its X part acts on when that is a single qubit (else -1).

    For a cz fusion the outcomes X_a Z_b and Z_a X_b are the X measurements of
    a and b after the fused edge is in place, so this maps fusion outcomes to
    the lattice qubits they read out.
    """
    mx = sp.csr_matrix(n.pattern.meas_x)[np.flatnonzero(n.pattern.noisy)]
    w = np.diff(mx.indptr)
    out = -np.ones(mx.shape[0], np.int64)
    one = w == 1
    out[one] = mx.indices[mx.indptr[:-1][one]]
    return out


_BUILDERS = {}


def _network_pattern(family: tuple, dims) -> StabilizerPattern:
    geo = _BUILDERS[family[0]](dims, *family[1:])
    return _compose(geo, lambda d: _network_pattern(family, d))[0]


@lru_cache(maxsize=None)
def network_templates(family: tuple):
    return local_templates(lambda d: _network_pattern(family, d))


def _make(kind, L, T, length, family, dims) -> FusionNetwork:
    geo = _BUILDERS[family[0]](dims, *family[1:])
    pattern, fusion_of, single_of = _compose(geo, lambda d: _network_pattern(family, d))
    noisy = np.flatnonzero(pattern.noisy)
    return FusionNetwork(kind, L, T, length, geo, pattern, fusion_of[noisy], single_of[noisy], family,
                         np.zeros(len(geo.fusions), np.int64))


# FFCC chain networks ---------------------------------------------------------


def _ffcc_geometry(dims, branched: bool, length) -> NetworkGeometry:
    """Chains through entry (v,t) -> check (e,t) -> exit (w,t) -> entry (w,t+1).

    Entries are black at even t and white at odd t. Every other temporal
    edge, (entry at t) - (same vertex at t+1), is a cz fusion. With finite
    ``length`` the chain link exit (w,t) -> entry (w,t+1) is cut at t = k-1
    mod k, k = (length - 2) / 2, and re-joined by a fusion of two extra qubits.
    """
    lay0, hx, data0, check0 = _ffcc_ids(dims)
    T = dims[2] * BLOCK
    k = None
    n_wire = 0
    if np.isfinite(length):
        k = (int(length) - 2) // 2
        n_wire = 2 * 3 * (BLOCK // k)
    lay = CellLayout(lay0.dims, lay0.n_sub + n_wire)

    def data(vs, t):
        ids = data0(vs, t)
        return lay.index(lay0.cell_of(ids), lay0.sub_of(ids))

    def check(es, t):
        ids = check0(es, t)
        return lay.index(lay0.cell_of(ids), lay0.sub_of(ids))

    v = np.arange(hx.n_vertices)
    edges, fusions, layers, singles = [], [], [], []
    for t in range(T):
        is_entry = (hx.vertex_color == 0) == (t % 2 == 0)
        ent = v[is_entry]
        fusions.append(np.c_[data(ent, t), data(ent, t + 1)])
        layers.append(np.full(ent.size, t))
        es = np.flatnonzero(hx.edge_color == schedule_color(t))
        c = check(es, t)
        edges += [np.c_[c, data(hx.edges[es, 0], t)], np.c_[c, data(hx.edges[es, 1], t)]]
        singles.append(c)
        ex = v[~is_entry]
        a, b = data(ex, t), data(ex, t + 1)
        if k is not None and t % k == k - 1:
            cell = lay.cell_of(a)
            m = (t % BLOCK) // k
            slot = lay0.n_sub + 2 * (3 * m + hx.vertex_layout.sub_of(ex) // 2)
            x1 = lay.index(cell, slot)
            x2 = lay.index(cell, slot + 1)
            edges += [np.c_[a, x1], np.c_[x2, b]]
            fusions.append(np.c_[x1, x2])
            layers.append(np.full(ex.size, t))
        else:
            edges.append(np.c_[a, b])
    f = np.concatenate(fusions)
    singles = np.concatenate(singles)
    return NetworkGeometry(lay, np.concatenate(edges), np.zeros((0, 4), np.int64), f,
                           np.full(len(f), "cz"), np.concatenate(layers), singles,
                           np.full(singles.size, not branched))


_BUILDERS["ffcc"] = _ffcc_geometry


def _check_length(length) -> float:
    if length is None or length == np.inf:
        return np.inf
    length = int(length)
    if length % 2:
        raise ValueError("resource length must be even")
    if length < 4 or BLOCK % ((length - 2) // 2):
        raise ValueError("segments of (length-2)/2 layers must divide the 6-layer time cell "
                         "(supported lengths: 4, 6, 8, 14)")
    return float(length)


def _ffcc_dims(f: FoliatedLattice):
    if f.kind not in ("ffcc", "ffcc_branched"):
        raise ValueError("an FFCC lattice is required")
    return f.dims


def decompose_chains(f: FoliatedLattice, length=None) -> FusionNetwork:
    """Linear chains with noisy check measurements; finite lengths are structural."""
    length = _check_length(length)
    return _make("ffcc_chains", f.L, f.T, length, ("ffcc", False, length), _ffcc_dims(f))


def decompose_branched(f: FoliatedLattice, length=np.inf) -> FusionNetwork:
    """Branched chains: check qubits are measured away inside the resource."""
    length = _check_length(length)
    return _make("ffcc_branched", f.L, f.T, length, ("ffcc", True, length), _ffcc_dims(f))


# Raussendorf baselines ---------------------------------------------------------


def _rhg_links():
    """RHG face-edge links as (face sub, k, edge sub, offset) plus per-edge-qubit order."""
    links = [(f, k, e, np.array(off)) for f, inc in RHG_FACE_EDGES.items() for k, (e, off) in enumerate(inc)]
    per_edge: dict[int, list] = {}
    for f, k, e, off in links:
        per_edge.setdefault(e, []).append((f, k))
    return links, per_edge


def _star4_geometry(dims) -> NetworkGeometry:
    """GHZ-4 per RHG qubit with one slot per neighbour; cz fusions on RHG links."""
    lay = CellLayout(tuple(dims), 24)
    cells = lay.all_cells()
    links, per_edge = _rhg_links()
    fus, layer = [], []
    for f, k, e, off in links:
        a = lay.index(cells, 4 * f + k)
        j = per_edge[e].index((f, k))
        b = lay.index(cells + off, 12 + 4 * (e - 3) + j)
        fus.append(np.c_[a, b])
        layer.append(cells[:, 2])
    ghz = np.concatenate([lay.index(cells, 4 * q)[:, None] + np.arange(4)[None, :] for q in range(6)])
    f = np.concatenate(fus)
    return NetworkGeometry(lay, np.zeros((0, 2), np.int64), ghz, f, np.full(len(f), "cz"),
                           np.concatenate(layer), np.zeros(0, np.int64), np.zeros(0, bool))


# ring+(p): E_x F_xy E_y F_yz E_z F_zx at p; ring-(p): the same qubits shifted back
_RING_PLUS = [(3, (0, 0, 0)), (0, (0, 0, 0)), (4, (0, 0, 0)), (1, (0, 0, 0)), (5, (0, 0, 0)), (2, (0, 0, 0))]
_RING_MINUS = [(3, (-1, 0, 0)), (0, (-1, -1, 0)), (4, (0, -1, 0)), (1, (0, -1, -1)), (5, (0, 0, -1)),
               (2, (-1, 0, -1))]


def _hexagon6_geometry(dims) -> NetworkGeometry:
    """Two 6-rings per RHG vertex; each RHG qubit is split over one ring of each kind.

    The two halves of a qubit are joined by a bell fusion, so the union of
    ring edges covers every RHG link exactly once.
    """
    lay = CellLayout(tuple(dims), 12)
    cells = lay.all_cells()
    edges = []
    for ring, half in ((_RING_PLUS, 0), (_RING_MINUS, 1)):
        ids = [lay.index(cells + np.array(off), 2 * q + half) for q, off in ring]
        for i in range(6):
            edges.append(np.c_[ids[i], ids[(i + 1) % 6]])
    f = np.concatenate([np.c_[lay.index(cells, 2 * q), lay.index(cells, 2 * q + 1)] for q in range(6)])
    layer = np.tile(cells[:, 2], 6)
    return NetworkGeometry(lay, np.concatenate(edges), np.zeros((0, 6), np.int64), f,
                           np.full(len(f), "bell"), layer, np.zeros(0, np.int64), np.zeros(0, bool))


_BUILDERS["star4"] = _star4_geometry
_BUILDERS["hexagon6"] = _hexagon6_geometry


def build_baseline_network(r: FoliatedLattice, kind: str) -> FusionNetwork:
    if r.kind != "raussendorf" or kind not in ("star4", "hexagon6"):
        raise ValueError("baseline networks need a Raussendorf lattice and kind star4 or hexagon6")
    return _make(kind, r.L, r.T, {"star4": 4, "hexagon6": 6}[kind], (kind,), r.dims)


# bias ------------------------------------------------------------------------


def assign_bias(n: FusionNetwork, mode: str = "unbiased", phase: int = 0) -> FusionNetwork:
    """Return a copy of ``n`` with per-fusion bias tags.

    ``passive_alternating`` tags fusion layers in blocks of three: layers with
    ((layer - phase) mod 6) < 3 are primal-biased (failure erases the dual
    outcome), the next three dual-biased.
    """
    if mode == "unbiased":
        tags = np.zeros(n.n_fusions, np.int64)
    elif mode == "passive_alternating":
        if n.T % 6:
            raise ValueError("passive bias needs T to be a multiple of 6")
        tags = np.where(np.mod(n.fusion_layers() - phase, 6) < 3, 1, 2)
    else:
        raise ValueError(f"unknown bias mode {mode!r}")
    out = replace(n, bias=tags, bias_mode=mode)
    if hasattr(n, "_code"):
        object.__setattr__(out, "_code", n._code)
    return out


# export ----------------------------------------------------------------------


def export_network(n: FusionNetwork) -> dict:
    H = n.incidence().tocoo()
    code = n.code()
    return {
        "schema_version": 1,
        "kind": n.kind,
        "L": n.L,
        "T": n.T,
        "length": None if not np.isfinite(n.length) else int(n.length),
        "resources": [{"kind": s.kind, "slots": g.tolist()} for s, g in n.resources()],
        "fusions": [{"a": int(a), "b": int(b), "type": str(t), "layer": int(lay), "bias": BIAS_TAGS[int(tag)]}
                    for (a, b), t, lay, tag in zip(n.fusions, n.geometry.fusion_kind, n.fusion_layers(), n.bias)],
        "singles": n.singles.tolist(),
        "outcomes": [{"id": i, "fusion": int(f), "single": int(s), "class": CLASS_NAMES[c] if c >= 0 else "none"}
                     for i, (f, s, c) in enumerate(zip(n.outcome_fusion, n.outcome_single, code.outcome_class))],
        "incidence": np.c_[H.row, H.col].tolist(),
    }


def dump_network(n: FusionNetwork, path) -> None:
    with open(path, "w") as fh:
        json.dump(export_network(n), fh)
