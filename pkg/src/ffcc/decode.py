"""Matching decoder with erasure handling and correlation-surface repair.

Edges of the matching graph are outcomes of one class; their endpoints are the
two detectors containing the outcome. Decoding uses unit weights plus a
deterministic per-outcome perturbation smaller than 1/n_edges, which keeps the
unit-weight optimum while making it unique. Erased outcomes get weight zero.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from itertools import combinations

import networkx as nx
import numpy as np
import pymatching
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components, dijkstra

from .code import CheckCode, CorrelationSurface


@dataclass(frozen=True)
class MatchingGraph:
    n_detectors: int
    endpoints: np.ndarray  # (n_edges, 2) local detector indices
    outcomes: np.ndarray  # global outcome id per edge
    weights: np.ndarray
    detector_ids: np.ndarray  # global detector id per vertex

    @property
    def n_edges(self) -> int:
        return len(self.outcomes)

    def check_matrix(self) -> sp.csc_matrix:
        n = self.n_edges
        rows = self.endpoints.ravel()
        cols = np.repeat(np.arange(n), 2)
        return sp.csc_matrix((np.ones(2 * n, np.uint8), (rows, cols)), shape=(self.n_detectors, n))

    def syndrome(self, edge_flips: np.ndarray) -> np.ndarray:
        H = self.check_matrix()
        return (H @ edge_flips.astype(np.int64)) % 2


def tie_break(outcomes: np.ndarray, n_edges: int) -> np.ndarray:
    """Deterministic perturbation in [0, 1/(n_edges+1)) keyed by outcome id."""
    # splitmix64 finaliser: a linear hash would tie edge sets with equal id sums
    z = np.asarray(outcomes, np.uint64) + np.uint64(0x9E3779B97F4A7C15)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    h = (z ^ (z >> np.uint64(31))) >> np.uint64(11)
    return (h.astype(np.float64) / 2.0 ** 53) / (n_edges + 1)


def build_matching_graph(incidence, outcomes: np.ndarray | None = None, detector_ids=None,
                         weights=None) -> MatchingGraph:
    """Graph whose edges are the columns of ``incidence`` (each of weight 2)."""
    H = sp.csc_matrix(incidence)
    if outcomes is not None:
        H = H[:, outcomes]
    else:
        outcomes = np.arange(H.shape[1])
    H.sum_duplicates()
    colw = np.diff(H.indptr)
    if np.any(colw != 2):
        raise ValueError("every outcome must lie in exactly two detectors")
    ends = H.indices.reshape(-1, 2).astype(np.int64)
    if weights is None:
        weights = 1.0 + tie_break(outcomes, len(outcomes))
    if detector_ids is None:
        detector_ids = np.arange(H.shape[0])
    return MatchingGraph(H.shape[0], ends, np.asarray(outcomes), np.asarray(weights, float),
                         np.asarray(detector_ids))


def class_graph(code: CheckCode, cls: str = "primal") -> MatchingGraph:
    det = code.class_index(cls)
    outs = code.class_outcomes(cls)
    H = code.incidence(cls)
    return build_matching_graph(H, outs, detector_ids=det)


def apply_erasure(g: MatchingGraph, erased_edges: np.ndarray) -> MatchingGraph:
    """Copy of ``g`` with erased edges (bool mask or edge indices) at weight 0."""
    w = g.weights.copy()
    w[erased_edges] = 0.0
    return replace(g, weights=w)


def _validate_syndrome(syndrome) -> np.ndarray:
    s = np.asarray(syndrome).astype(np.uint8) & 1
    if int(s.sum()) % 2:
        raise ValueError("odd syndrome on a closed lattice")
    return s


def matching(g: MatchingGraph) -> pymatching.Matching:
    return pymatching.Matching.from_check_matrix(g.check_matrix(), weights=g.weights)


def mwpm(g: MatchingGraph, syndrome, backend: str = "pymatching", m: pymatching.Matching | None = None) -> np.ndarray:
    """Edge mask of a minimum-weight correction for the syndrome (0/1 per vertex)."""
    s = _validate_syndrome(syndrome)
    if not s.any():
        return np.zeros(g.n_edges, np.uint8)
    if backend == "pymatching":
        m = m or matching(g)
        return m.decode(s).astype(np.uint8)
    if backend == "networkx":
        return _mwpm_reference(g, s)
    raise ValueError(f"unknown backend {backend!r}")


def _sparse_graph(g: MatchingGraph):
    """Symmetric weighted adjacency keeping the lightest of parallel edges."""
    a, b = g.endpoints[:, 0], g.endpoints[:, 1]
    order = np.lexsort((g.weights, np.minimum(a, b), np.maximum(a, b)))
    best = {}
    for e in order:
        key = (min(a[e], b[e]), max(a[e], b[e]))
        if key not in best and a[e] != b[e]:
            best[key] = e
    keys = np.array(list(best.keys()), np.int64).reshape(-1, 2)
    eids = np.array(list(best.values()), np.int64)
    # dijkstra treats explicit zeros as missing edges, so shift by a tiny epsilon
    w = np.maximum(g.weights[eids], 1e-300)
    n = g.n_detectors
    A = sp.csr_matrix((np.r_[w, w], (np.r_[keys[:, 0], keys[:, 1]], np.r_[keys[:, 1], keys[:, 0]])), shape=(n, n))
    lookup = {k: e for k, e in best.items()}
    return A, lookup


def _mwpm_reference(g: MatchingGraph, s: np.ndarray) -> np.ndarray:
    """Dijkstra distances between defects plus exact blossom matching (networkx)."""
    defects = np.flatnonzero(s)
    A, lookup = _sparse_graph(g)
    dist, pred = dijkstra(A, directed=False, indices=defects, return_predecessors=True)
    G = nx.Graph()
    for i, j in combinations(range(len(defects)), 2):
        d = dist[i, defects[j]]
        if np.isfinite(d):
            G.add_edge(i, j, weight=-d)
    M = nx.max_weight_matching(G, maxcardinality=True)
    if 2 * len(M) != len(defects):
        raise ValueError("syndrome cannot be matched")
    corr = np.zeros(g.n_edges, np.uint8)
    for i, j in sorted(tuple(sorted(p)) for p in M):
        v = defects[j]
        while v != defects[i]:
            u = pred[i, v]
            corr[lookup[(min(u, v), max(u, v))]] ^= 1
            v = u
    return corr


def correction_weight(g: MatchingGraph, corr: np.ndarray) -> float:
    return float(g.weights[corr.astype(bool)].sum())


def brute_force_min_matching(g: MatchingGraph, syndrome) -> float:
    """Minimum total weight over all perfect matchings of the defects (oracle)."""
    from scipy.sparse.csgraph import floyd_warshall

    defects = list(np.flatnonzero(_validate_syndrome(syndrome)))
    A, _ = _sparse_graph(g)
    D = floyd_warshall(A, directed=False)

    def best(rem: tuple) -> float:
        if not rem:
            return 0.0
        a, rest = rem[0], rem[1:]
        return min(D[a, b] + best(rest[:k] + rest[k + 1:]) for k, b in enumerate(rest))

    return best(tuple(defects))


# super-cell merging ----------------------------------------------------------


def merge_super_cells(g: MatchingGraph, erased_edges: np.ndarray):
    """Contract erased edges: returns (merged graph over kept edges, vertex -> super-cell)."""
    er = np.zeros(g.n_edges, bool)
    er[erased_edges] = True
    e = g.endpoints[er]
    A = sp.coo_matrix((np.ones(len(e)), (e[:, 0], e[:, 1])), shape=(g.n_detectors,) * 2)
    n_sc, lab = connected_components(A, directed=False)
    keep = np.flatnonzero(~er & (lab[g.endpoints[:, 0]] != lab[g.endpoints[:, 1]]))
    merged = MatchingGraph(n_sc, lab[g.endpoints[keep]], g.outcomes[keep], g.weights[keep], np.arange(n_sc))
    return merged, lab, keep


def decode_merged(g: MatchingGraph, erased_edges: np.ndarray, syndrome) -> np.ndarray:
    """Decode on the super-cell graph; returns an edge mask of g over kept edges only."""
    merged, lab, keep = merge_super_cells(g, erased_edges)
    s = np.bincount(lab, weights=np.asarray(syndrome, float), minlength=merged.n_detectors).astype(np.int64) % 2
    corr = np.zeros(g.n_edges, np.uint8)
    if not s.any():
        return corr
    m = pymatching.Matching.from_check_matrix(merged.check_matrix(), weights=merged.weights)
    sub = m.decode(s.astype(np.uint8))
    corr[keep[np.flatnonzero(sub)]] = 1
    return corr


# correlation surfaces ----------------------------------------------------------


def surface_repair_solution(g: MatchingGraph, surface_edges: np.ndarray, erased_edges: np.ndarray):
    """Detector subset x with (surface + sum_x detectors) avoiding erased edges, or None.

    Each erased edge e = (u, v) imposes x_u + x_v = s_e. The constraints are
    solved on the double cover of the erased subgraph: they are inconsistent
    iff some (d, 0) and (d, 1) are connected.
    """
    er = np.zeros(g.n_edges, bool)
    er[erased_edges] = True
    s = np.zeros(g.n_edges, np.int64)
    s[surface_edges] = 1
    n = g.n_detectors
    u, v = g.endpoints[er, 0], g.endpoints[er, 1]
    l = s[er]
    rows = np.r_[u, u + n]
    cols = np.r_[v + n * l, v + n * (1 - l)]
    A = sp.coo_matrix((np.ones(rows.size), (rows, cols)), shape=(2 * n, 2 * n))
    _, lab = connected_components(A, directed=False)
    if np.any(lab[:n] == lab[n:]):
        return None
    return (lab[n:] < lab[:n]).astype(np.uint8)


def repair_surface(g: MatchingGraph, surface_edges: np.ndarray, erased_edges: np.ndarray):
    """Edge mask of a representative avoiding the erased edges, or None (FAIL)."""
    s = np.zeros(g.n_edges, np.uint8)
    s[surface_edges] = 1
    er = np.zeros(g.n_edges, bool)
    er[erased_edges] = True
    if not np.any(s.astype(bool) & er):
        return s
    x = surface_repair_solution(g, np.flatnonzero(s), er)
    if x is None:
        return None
    # adding detector d toggles every edge incident to d
    toggles = (x[g.endpoints[:, 0]] + x[g.endpoints[:, 1]]) % 2
    out = s ^ toggles.astype(np.uint8)
    assert not np.any(out.astype(bool) & er)
    return out


def repairable(g: MatchingGraph, surface_edges: np.ndarray, erased_mask: np.ndarray) -> bool:
    s = np.zeros(g.n_edges, bool)
    s[surface_edges] = True
    if not np.any(s & erased_mask):
        return True
    return surface_repair_solution(g, surface_edges, erased_mask) is not None


def logical_outcome(flipped: np.ndarray, correction: np.ndarray, surface: np.ndarray,
                    erased: np.ndarray | None = None) -> bool:
    """True on success: residual has even overlap with the (repaired) surface."""
    surface = np.asarray(surface).astype(bool)
    if erased is not None and np.any(surface & np.asarray(erased).astype(bool)):
        raise ValueError("surface intersects the erased set; repair it first")
    residual = (np.asarray(flipped).astype(np.uint8) ^ np.asarray(correction).astype(np.uint8)).astype(bool)
    return int(np.sum(residual & surface)) % 2 == 0


def surface_edges(g: MatchingGraph, surface: CorrelationSurface) -> np.ndarray:
    pos = {int(o): i for i, o in enumerate(g.outcomes)}
    return np.array([pos[int(o)] for o in surface.support if int(o) in pos], np.int64)


class Decoder:
    """Per-class decoding pipeline for one model: the object the Monte-Carlo engine uses."""

    def __init__(self, code: CheckCode, cls: str = "primal", orientation: str = "time-like", normal=None):
        self.code = code
        self.cls = cls
        self.graph = class_graph(code, cls)
        self.surface = code.surface(cls, orientation, normal)
        self.surface_edges = surface_edges(self.graph, self.surface)
        self.surface_mask = np.zeros(self.graph.n_edges, bool)
        self.surface_mask[self.surface_edges] = True
        self._matching = None

    @property
    def edge_outcomes(self) -> np.ndarray:
        return self.graph.outcomes

    def fixed_matching(self) -> pymatching.Matching:
        """Matching with the surface as the single observable."""
        if self._matching is None:
            self._matching = pymatching.Matching.from_check_matrix(
                self.graph.check_matrix(), weights=self.graph.weights,
                faults_matrix=sp.csr_matrix(self.surface_mask.astype(np.uint8)[None, :]))
        return self._matching

    def fail_no_erasure(self, flips: np.ndarray) -> np.ndarray:
        """Failure flags for a batch of edge flip rows with no erasures."""
        flips = np.asarray(flips, np.uint8)
        H = self.graph.check_matrix()
        synd = np.asarray((H @ flips.T.astype(np.int64)) % 2).T.astype(np.uint8)
        pred = self.fixed_matching().decode_batch(synd)[:, 0]
        actual = (flips.astype(np.int64) @ self.surface_mask.astype(np.int64)) % 2
        return pred.astype(np.int64) != actual

    def fail_one(self, flips: np.ndarray, erased: np.ndarray, backend: str = "pymatching") -> bool:
        """Failure flag for one shot with erasures (edge masks)."""
        erased = np.asarray(erased, bool)
        if not repairable(self.graph, self.surface_edges, erased):
            return True
        flips = np.asarray(flips, np.uint8) & ~erased
        synd = self.graph.syndrome(flips)
        if not synd.any():
            corr = np.zeros(self.graph.n_edges, np.uint8)
        elif backend == "merged":
            corr = decode_merged(self.graph, erased, synd)
            # close the residual inside super-cells: only kept edges matter for a repaired surface
            s_rep = repair_surface(self.graph, self.surface_edges, erased)
            return not logical_outcome(flips, corr, s_rep, erased)
        else:
            g = apply_erasure(self.graph, erased)
            corr = mwpm(g, synd, backend=backend)
        # the residual is a cycle, so its parity on any repaired representative equals that on the surface
        return not logical_outcome(flips, corr, self.surface_mask)
