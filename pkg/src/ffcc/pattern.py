"""Detectors and correlation surfaces of translation-invariant measurement patterns.

A pattern is a stabilizer resource state (one generator per qubit, given by its
X and Z parts) together with a set of measured Pauli operators, each yielding
one outcome. Outcomes that are known without noise (``noisy == False``) may
enter detectors but are never sampled.

A product of outcomes is deterministic iff it is a product of generators, i.e.
iff the outcome vector lies in the kernel of the check map
``C[g, m] = <generator g, measurement m>`` (symplectic form). Local generators
of that kernel are found on a small reference instance and tiled by
translation; nontrivial elements are found on a thin instance and pulled back
by periodic repetition.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from . import gf2
from .cells import CellLayout

Dims = tuple[int, int, int]


@dataclass
class StabilizerPattern:
    qubits: CellLayout
    outcomes: CellLayout
    gen_x: sp.csr_matrix  # generators x qubits
    gen_z: sp.csr_matrix
    meas_x: sp.csr_matrix  # outcomes x qubits
    meas_z: sp.csr_matrix
    noisy: np.ndarray  # bool per outcome
    rebuild: Callable[[Dims], "StabilizerPattern"] = field(repr=False)

    @property
    def dims(self) -> Dims:
        return self.outcomes.dims

    def check_matrix(self) -> sp.csr_matrix:
        C = self.gen_x @ self.meas_z.T + self.gen_z @ self.meas_x.T
        C = sp.csr_matrix(C)
        C.data %= 2
        C.eliminate_zeros()
        return C


def graph_state_pattern(qubits: CellLayout, edges: np.ndarray, meas_x, meas_z, noisy, rebuild):
    """Pattern for a graph state: generator of q is X_q Z_{N(q)}."""
    n = qubits.size
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    A = sp.coo_matrix((np.ones(2 * len(edges), np.uint8),
                       (np.r_[edges[:, 0], edges[:, 1]], np.r_[edges[:, 1], edges[:, 0]])),
                      shape=(n, n)).tocsr()
    A.data %= 2
    A.eliminate_zeros()
    return StabilizerPattern(qubits, _outcome_layout(qubits, meas_x),
                             sp.identity(n, np.uint8, format="csr"), A,
                             sp.csr_matrix(meas_x), sp.csr_matrix(meas_z),
                             np.asarray(noisy, bool), rebuild)


def _outcome_layout(qubits: CellLayout, meas) -> CellLayout:
    n_cells = qubits.n_cells
    if meas.shape[0] % n_cells:
        raise ValueError("outcome count is not a multiple of the cell count")
    return CellLayout(qubits.dims, meas.shape[0] // n_cells)


@dataclass(frozen=True)
class Template:
    """Kernel element relative to an anchor cell: outcome (offset, sub) pairs."""

    offsets: np.ndarray  # (k, 3)
    subs: np.ndarray  # (k,)
    noisy: np.ndarray  # (k,) bool

    @property
    def weight(self) -> int:
        return int(self.noisy.sum())

    def key(self) -> tuple:
        return tuple(map(tuple, np.c_[self.offsets, self.subs].tolist()))

    def instantiate(self, layout: CellLayout, cells: np.ndarray | None = None) -> list[np.ndarray]:
        """Outcome ids (XOR-reduced) of the template anchored at each cell."""
        if cells is None:
            cells = layout.all_cells()
        ids = layout.index(cells[:, None, :] + self.offsets[None, :, :], self.subs[None, :])
        out = []
        for row in ids:
            u, c = np.unique(row, return_counts=True)
            out.append(u[c % 2 == 1])
        return out


def _template_from_ids(layout: CellLayout, ids: np.ndarray, noisy: np.ndarray) -> Template:
    cells = layout.cell_of(ids)
    subs = layout.sub_of(ids)
    nz = noisy[ids]
    key = np.c_[cells, subs]
    # anchor at the lexicographically smallest noisy outcome
    cand = key[nz] if nz.any() else key
    order = np.lexsort(cand.T[::-1])
    anchor = cand[order[0], :3]
    off = cells - anchor
    full = np.c_[off, subs, ~nz]
    full = full[np.lexsort(full[:, :4].T[::-1])]
    return Template(full[:, :3].copy(), full[:, 3].copy(), ~full[:, 4].astype(bool))


def _window_kernel(pattern: StabilizerPattern, lo: int, hi: int) -> tuple[np.ndarray, np.ndarray]:
    """Kernel of the check map restricted to outcomes in cells [lo, hi)^3."""
    lay = pattern.outcomes
    cells = lay.cell_of(np.arange(lay.size))
    inside = np.all((cells >= lo) & (cells < hi), axis=1)
    cols = np.flatnonzero(inside)
    C = pattern.check_matrix().tocsc()[:, cols]
    rows = np.unique(C.tocoo().row)
    K = gf2.nullspace(C[rows].toarray())
    return K, cols


def local_templates(rebuild: Callable[[Dims], StabilizerPattern], ref: int = 5, window: int = 3) -> list[Template]:
    """Translation classes of a local generating set of the detector space."""
    pattern = rebuild((ref, ref, ref))
    lo = (ref - window) // 2
    K, cols = _window_kernel(pattern, lo, lo + window)
    noisy_cols = pattern.noisy[cols]
    K = K[np.any(K[:, noisy_cols], axis=1)]
    K = gf2.sparsify(K, col_weights=np.where(noisy_cols, 1000, 1))
    seen: dict[tuple, Template] = {}
    for row in K:
        ids = cols[np.flatnonzero(row)]
        if not pattern.noisy[ids].any():
            continue
        t = _template_from_ids(pattern.outcomes, ids, pattern.noisy)
        seen.setdefault(t.key(), t)
    cands = sorted(seen.values(), key=lambda t: (t.weight, len(t.subs), t.key()))

    # greedy selection by rank increase of the tiled noisy projections
    lay = pattern.outcomes
    noisy_ids = np.flatnonzero(pattern.noisy)
    pos = -np.ones(lay.size, np.int64)
    pos[noisy_ids] = np.arange(noisy_ids.size)
    basis = gf2.IncrementalBasis(noisy_ids.size)
    chosen = []
    for t in cands:
        rows = np.zeros((lay.n_cells, noisy_ids.size), np.uint8)
        for i, ids in enumerate(t.instantiate(lay)):
            ids = ids[pattern.noisy[ids]]
            rows[i, pos[ids]] = 1
        if basis.add(rows):
            chosen.append(t)
    return chosen


@dataclass
class DetectorSet:
    """Tiled detectors of one pattern instance."""

    supports: list[np.ndarray]  # noisy outcome ids per detector
    full: list[np.ndarray]  # including noiseless outcomes
    template: np.ndarray  # template index per detector
    anchor: np.ndarray  # (n, 3) anchor cell per detector
    cls: np.ndarray  # class label per detector
    outcome_class: np.ndarray  # class per outcome (-1 when in no detector)

    def incidence(self, n_outcomes: int) -> sp.csr_matrix:
        rows = np.repeat(np.arange(len(self.supports)), [len(s) for s in self.supports])
        cols = np.concatenate(self.supports) if self.supports else np.zeros(0, np.int64)
        return sp.csr_matrix((np.ones(rows.size, np.uint8), (rows, cols)),
                             shape=(len(self.supports), n_outcomes))


def tile_detectors(pattern: StabilizerPattern, templates: list[Template]) -> DetectorSet:
    lay = pattern.outcomes
    cells = lay.all_cells()
    supports, full, tid, anchors = [], [], [], []
    seen = set()
    for k, t in enumerate(templates):
        for cell, ids in zip(cells, t.instantiate(lay, cells)):
            s = ids[pattern.noisy[ids]]
            key = s.tobytes()
            if s.size == 0 or key in seen:
                continue
            seen.add(key)
            supports.append(s)
            full.append(ids)
            tid.append(k)
            anchors.append(cell)
    D = DetectorSet(supports, full, np.asarray(tid, np.int64),
                    np.asarray(anchors, np.int64).reshape(-1, 3),
                    np.zeros(len(supports), np.int64), -np.ones(lay.size, np.int64))
    _classify(D, lay.size)
    return D


def _classify(D: DetectorSet, n_outcomes: int) -> None:
    """Split detectors into classes by connected components of shared outcomes."""
    H = D.incidence(n_outcomes)
    n_det = H.shape[0]
    if n_det == 0:
        return
    # bipartite graph detectors + outcomes
    B = sp.bmat([[None, H], [H.T, None]]).tocsr()
    _, lab = connected_components(B, directed=False)
    det_lab = lab[:n_det]
    out_lab = lab[n_det:]
    used = np.flatnonzero(np.bincount(H.indices, minlength=n_outcomes))
    # order classes by their lowest outcome id
    order = []
    for o in used:
        if out_lab[o] not in order:
            order.append(out_lab[o])
    remap = {c: i for i, c in enumerate(order)}
    D.cls = np.array([remap[c] for c in det_lab], np.int64)
    D.outcome_class[used] = [remap[c] for c in out_lab[used]]


def check_kernel(pattern: StabilizerPattern, vectors) -> bool:
    """True if every outcome vector (id arrays) is a deterministic product."""
    C = pattern.check_matrix().tocsc()
    for ids in vectors:
        if np.any(np.asarray(C[:, ids].sum(axis=1)).ravel() % 2):
            return False
    return True


# correlation surfaces --------------------------------------------------------


def _thin_dims(dims: Dims, normal: int) -> Dims:
    out = []
    for d, n in enumerate(dims):
        if d == normal:
            out.append(n)
        elif n <= 2:
            out.append(n)
        else:
            out.append(next(k for k in range(2, n + 1) if n % k == 0))
    return tuple(out)


def _winding_path(pattern: StabilizerPattern, templates, D: DetectorSet, cls: int, direction: int):
    """Outcome offsets of a detector-graph path from a detector to its translate.

    Returned as (offsets, subs) relative to the start detector's anchor, lying
    on a non-wrapping reference instance.
    """
    lay = pattern.outcomes
    ref = lay.dims[0]
    det_ids = np.flatnonzero(D.cls == cls)
    start_t = D.template[det_ids[0]]
    centre = np.array([ref // 2 - 1] * 3)
    lo, hi = 0, ref
    # detector adjacency through shared noisy outcomes, restricted to a box
    box = np.all((D.anchor >= lo + 1) & (D.anchor < hi - 1), axis=1)
    cand = [i for i in det_ids if box[i]]
    by_out: dict[int, list[int]] = {}
    for i in cand:
        for o in D.supports[i]:
            by_out.setdefault(int(o), []).append(i)
    src = next(i for i in cand if D.template[i] == start_t and np.all(D.anchor[i] == centre))
    target = centre.copy()
    target[direction] += 1
    dst = next(i for i in cand if D.template[i] == start_t and np.all(D.anchor[i] == target))
    prev = {src: (None, None)}
    queue = [src]
    for u in queue:
        if u == dst:
            break
        for o in D.supports[u]:
            for w in by_out[int(o)]:
                if w not in prev:
                    prev[w] = (u, int(o))
                    queue.append(w)
    if dst not in prev:
        raise RuntimeError("no winding path found in reference instance")
    outs = []
    u = dst
    while prev[u][0] is not None:
        u, o = prev[u]
        outs.append(o)
    outs = np.array(outs, np.int64)
    return lay.cell_of(outs) - centre, lay.sub_of(outs)


def winding_cycle(layout: CellLayout, path, direction: int) -> np.ndarray:
    offsets, subs = path
    ids = []
    for k in range(layout.dims[direction]):
        shift = np.zeros(3, np.int64)
        shift[direction] = k
        ids.append(layout.index(offsets + shift, subs))
    ids = np.concatenate(ids)
    u, c = np.unique(ids, return_counts=True)
    return u[c % 2 == 1]


@dataclass
class SurfaceSet:
    """Correlation surfaces on a pattern instance, per (class, normal direction)."""

    surfaces: dict  # (cls, direction) -> outcome ids (noisy and noiseless)
    cycles: dict  # (cls, direction) -> outcome ids of a winding error chain


def find_surfaces(pattern: StabilizerPattern, templates: list[Template], D: DetectorSet,
                  classes=(0, 1), directions=(0, 1, 2), ref: int = 5) -> SurfaceSet:
    refp = pattern.rebuild((ref, ref, ref))
    Dref = tile_detectors(refp, templates)
    lay = pattern.outcomes
    surfaces, cycles = {}, {}
    for cls in classes:
        if cls not in set(D.cls.tolist()):
            continue
        paths = {d: _winding_path(refp, templates, Dref, cls, d) for d in range(3)}
        for d in range(3):
            cycles[(cls, d)] = winding_cycle(lay, paths[d], d)
        for normal in directions:
            surfaces[(cls, normal)] = _surface(pattern, templates, D, paths, cls, normal)
    return SurfaceSet(surfaces, cycles)


def _surface(pattern, templates, D, paths, cls, normal) -> np.ndarray:
    thin = pattern.rebuild(_thin_dims(pattern.dims, normal))
    Dt = tile_detectors(thin, templates)
    tl = thin.outcomes
    # kernel elements avoiding the other classes' noisy outcomes
    other = thin.noisy & (Dt.outcome_class != cls)
    cols = np.flatnonzero(~other)
    C = thin.check_matrix().tocsc()[:, cols]
    K = gf2.nullspace(C.toarray())
    pos = -np.ones(tl.size, np.int64)
    pos[cols] = np.arange(cols.size)
    # quotient by detectors of this class (full vectors)
    det = np.zeros((int(np.sum(Dt.cls == cls)), cols.size), np.uint8)
    for r, i in enumerate(np.flatnonzero(Dt.cls == cls)):
        det[r, pos[Dt.full[i]]] ^= 1
    basis = gf2.IncrementalBasis(cols.size)
    basis.add(det)
    reps = []
    for v in K:
        if basis.add(v[None, :]):
            reps.append(v)
    if not reps:
        raise RuntimeError("trivial quotient: no correlation surface found")
    reps = np.array(reps, np.uint8)
    cyc = np.zeros((3, cols.size), np.uint8)
    for d in range(3):
        ids = winding_cycle(tl, paths[d], d)
        if np.any(pos[ids] < 0):
            raise RuntimeError("winding cycle leaves its class")
        cyc[d, pos[ids]] = 1
    O = (reps.astype(np.int64) @ cyc.T.astype(np.int64)) % 2  # reps x 3
    target = np.zeros(3, np.uint8)
    target[normal] = 1
    coef = gf2.solve(O.T.astype(np.uint8), target)
    if coef is None:
        raise RuntimeError("no surface with the requested orientation")
    s_thin = (coef.astype(np.int64) @ reps.astype(np.int64)) % 2
    thin_ids = np.zeros(tl.size, np.uint8)
    thin_ids[cols] = s_thin
    # pull back to the target instance by periodic repetition
    lay = pattern.outcomes
    proj = lay.project(np.arange(lay.size), tl)
    s = np.flatnonzero(thin_ids[proj])
    if not check_kernel(pattern, [s]):
        raise RuntimeError("pulled-back surface is not deterministic")
    return s
