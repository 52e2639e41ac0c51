"""Brute-force oracle suites shared by the CLI ``selftest`` command and the test suite."""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from . import gf2
from .code import CLASS_NAMES
from .decode import (Decoder, MatchingGraph, build_matching_graph, brute_force_min_matching, class_graph,
                     correction_weight, mwpm, surface_edges, tie_break)


def random_matching_instance(rng, max_defects: int = 12, graph: MatchingGraph | None = None):
    """(graph with integer weights, syndrome) with an even number of defects <= max_defects."""
    if graph is None:
        n = int(rng.integers(4, 16))
        # random connected multigraph: a spanning tree plus extra edges
        ends = [(int(rng.integers(0, i)), i) for i in range(1, n)]
        ends += [tuple(rng.choice(n, 2, replace=False)) for _ in range(int(rng.integers(0, 2 * n)))]
        H = np.zeros((n, len(ends)), np.uint8)
        for j, (a, b) in enumerate(ends):
            H[a, j] = H[b, j] = 1
        graph = build_matching_graph(sp.csc_matrix(H))
    w = rng.integers(1, 10, graph.n_edges).astype(float)
    g = MatchingGraph(graph.n_detectors, graph.endpoints, graph.outcomes, w, graph.detector_ids)
    k = 2 * int(rng.integers(1, min(max_defects, g.n_detectors) // 2 + 1))
    s = np.zeros(g.n_detectors, np.uint8)
    s[rng.choice(g.n_detectors, k, replace=False)] = 1
    return g, s


def check_matching_oracle(trials: int, seed: int = 0, graphs=()) -> tuple[int, int]:
    """(mismatches, trials): pymatching and networkx weights against the brute-force minimum."""
    rng = np.random.default_rng(seed)
    bad = 0
    for i in range(trials):
        base = graphs[i % len(graphs)] if graphs and i % 2 else None
        g, s = random_matching_instance(rng, graph=base)
        best = brute_force_min_matching(g, s)
        for backend in ("pymatching", "networkx"):
            c = mwpm(g, s, backend)
            if not np.array_equal(g.syndrome(c), s) or correction_weight(g, c) != best:
                bad += 1
                break
    return bad, trials


def check_erasure_equivalence(dec: Decoder, shots: int, p_erase: float, p_err: float, seed: int = 0):
    """(mismatches, failures): weight-0 decoding against explicit super-cell merging."""
    rng = np.random.default_rng(seed)
    n = dec.graph.n_edges
    bad = fails = 0
    for _ in range(shots):
        er = rng.random(n) < p_erase
        fl = (rng.random(n) < p_err) & ~er
        a = dec.fail_one(fl, er, "pymatching")
        b = dec.fail_one(fl, er, "merged")
        bad += a != b
        fails += a
    return bad, fails


def check_column_weights(code) -> bool:
    """Every outcome lies in exactly two detectors, all of its own class."""
    H = sp.csc_matrix(code.incidence())
    if not np.all(np.diff(H.indptr) == 2):
        return False
    det_cls = np.array([CLASS_NAMES.index(d.cls) for d in code.detectors])
    for o in range(H.shape[1]):
        rows = H.indices[H.indptr[o]:H.indptr[o + 1]]
        if np.any(det_cls[rows] != code.outcome_class[o]):
            return False
    return True


def check_surfaces(code) -> bool:
    """Surfaces pair with winding cycles like logical operators.

    Each winding cycle is a cycle of its class's matching graph (even detector
    degree); a surface overlaps the cycle along its normal oddly and the others
    evenly, and is therefore not a sum of detectors.
    """
    for surf in code.surfaces:
        H = code.incidence(surf.cls).astype(np.int64)
        v = np.zeros(code.n_outcomes, np.int64)
        v[surf.support] = 1
        for (cls, d), cyc in code.cycles.items():
            if cls != surf.cls:
                continue
            c = np.zeros(code.n_outcomes, np.int64)
            c[cyc] = 1
            if np.any((H @ c) % 2) or int(v @ c) % 2 != (d == surf.normal):
                return False
        if gf2.in_rowspace(H.toarray().astype(np.uint8) % 2, v.astype(np.uint8)):
            return False
    return True


def fusion_as_edge(lattice, network, shots: int, p: float, seed: int = 0):
    """(mismatches, failures) between the bare lattice and its all-success chain network.

    Flips are drawn on lattice outcomes and carried to the network by the
    outcome-to-qubit map; the network decoder uses the lattice's outcome ids for
    its tie-breaking so the two pipelines see identical weighted graphs.
    """
    from .fusion import outcome_qubits
    from .lattice import lattice_code

    q = outcome_qubits(network)
    if np.any(q < 0) or len(np.unique(q)) != lattice.n_nodes:
        raise ValueError("network outcomes do not map one-to-one onto lattice qubits")
    lat = Decoder(lattice_code(lattice))
    net = Decoder(network.code())
    # rebuild the network graph over lattice ids (same detectors, same weights)
    g = net.graph
    lat_ids = q[g.outcomes]
    net.graph = MatchingGraph(g.n_detectors, g.endpoints, g.outcomes,
                              1.0 + tie_break(lat_ids, len(lat_ids)), g.detector_ids)
    net._matching = None
    rng = np.random.default_rng(seed)
    bad = fails = 0
    for _ in range(shots):
        flips = rng.random(lattice.n_nodes) < p
        a = lat.fail_no_erasure(flips[lat.edge_outcomes][None, :].astype(np.uint8))[0]
        b = net.fail_no_erasure(flips[lat_ids][None, :].astype(np.uint8))[0]
        bad += a != b
        fails += a
    return bad, fails


def run_all(trials: int = 200, seed: int = 0, log=print) -> bool:
    from .fusion import decompose_branched, decompose_chains
    from .lattice import build_lattice, lattice_code
    from .mc import Model, ModelSpec

    ok = True

    def report(name, passed, detail):
        nonlocal ok
        ok &= bool(passed)
        log(f"{'PASS' if passed else 'FAIL'} {name}: {detail}")

    rhg = build_lattice("raussendorf", 2, 2)
    graphs = [class_graph(lattice_code(rhg), c) for c in ("primal", "dual")]
    bad, n = check_matching_oracle(trials, seed, graphs)
    report("mwpm-vs-brute-force", bad == 0, f"{bad} mismatches in {n} instances")

    dec = Model.build(ModelSpec("ffcc_branched_net"), 4).decoder
    bad, fails = check_erasure_equivalence(dec, trials, 0.1, 0.03, seed)
    report("erasure-equivalence", bad == 0, f"{bad} mismatches in {trials} shots ({fails} failures)")

    f = build_lattice("ffcc", 2, 6)
    for name, code in (("ffcc", lattice_code(f)), ("ffcc_branched", lattice_code(build_lattice("ffcc_branched", 2, 6))),
                       ("raussendorf", lattice_code(rhg)), ("chains", decompose_chains(f).code()),
                       ("branched-net", decompose_branched(f).code())):
        report(f"column-weight-2[{name}]", check_column_weights(code), f"{code.n_outcomes} outcomes")
        report(f"surfaces[{name}]", check_surfaces(code), f"{len(code.surfaces)} surfaces")

    f4 = build_lattice("ffcc", 4, 12)
    bad, fails = fusion_as_edge(f4, decompose_chains(f4), trials, 0.01, seed)
    report("fusion-as-edge", bad == 0, f"{bad} mismatches in {trials} shots ({fails} failures)")
    return ok
