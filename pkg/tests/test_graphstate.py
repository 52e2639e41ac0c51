import itertools

import networkx as nx
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ffcc.graphstate import (EmitterProgram, GraphState, Instruction, OrbitLimitError, Tableau, branched_chain,
                             generate_branched_chain, lc_equivalent, lc_orbit, local_complement, measure_x, measure_z,
                             path_graph, simulate_program, star_graph)


@st.composite
def graphs(draw, min_nodes=1, max_nodes=8):
    n = draw(st.integers(min_nodes, max_nodes))
    pairs = list(itertools.combinations(range(n), 2))
    mask = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    return GraphState.from_edges(range(n), [p for p, m in zip(pairs, mask) if m])


def edge_set(g):
    return {tuple(sorted(e)) for e in g.edges}


def with_tail(t: GraphState, anchor: int) -> GraphState:
    """t plus one extra node attached to ``anchor``."""
    new = len(t.nodes)
    return GraphState.from_edges(list(t.nodes) + [new], list(t.edges) + [(anchor, new)])


# graph primitives --------------------------------------------------------------


def test_from_edges_validation():
    with pytest.raises(ValueError):
        GraphState.from_edges([0, 1], [(0, 0)])
    with pytest.raises(ValueError):
        GraphState.from_edges([0, 1], [(0, 2)])


def test_lc_star_gives_complete_graph():
    g = local_complement(star_graph(3), 0)
    assert edge_set(g) == set(itertools.combinations(range(4), 2))


def test_lc_path_gives_triangle():
    g = local_complement(path_graph(3), 1)
    assert edge_set(g) == {(0, 1), (1, 2), (0, 2)}


def test_lc_unknown_node():
    with pytest.raises((KeyError, ValueError)):
        local_complement(path_graph(3), 7)


@given(graphs(), st.data())
def test_lc_involution(g, data):
    v = data.draw(st.sampled_from(sorted(g.nodes)))
    assert local_complement(local_complement(g, v), v) == g


@given(graphs(), st.data())
def test_lc_matches_adjacency_formula(g, data):
    # A' = A + a a^T off the diagonal, a = column of v (oracle on the adjacency matrix)
    v = data.draw(st.sampled_from(sorted(g.nodes)))
    A = g.adjacency_matrix().astype(np.int64)
    a = A[:, v]
    B = (A + np.outer(a, a)) % 2
    np.fill_diagonal(B, 0)
    assert np.array_equal(local_complement(g, v).adjacency_matrix(), B.astype(A.dtype))


def test_measure_x_isolated_and_errors():
    g = GraphState.from_edges([0, 1, 2], [(0, 1)])
    assert edge_set(measure_x(g, 2)) == {(0, 1)}
    assert 2 not in measure_x(g, 2).nodes
    with pytest.raises(ValueError):
        measure_x(path_graph(3), 1, special_neighbor=1)


def test_measure_x_three_chain_tableau_oracle():
    g = path_graph(3)
    h = measure_x(g, 1, special_neighbor=0)
    assert edge_set(h) == {(0, 2)}
    t = Tableau.from_graph(g).measure_x(1)
    assert lc_equivalent(t.to_graph([0, 2]), h)


def test_measure_z_removes_node():
    h = measure_z(path_graph(3), 1)
    assert edge_set(h) == set() and set(h.nodes) == {0, 2}


@given(graphs(min_nodes=2, max_nodes=7), st.data())
def test_measure_x_matches_tableau_up_to_lc(g, data):
    v = data.draw(st.sampled_from(sorted(g.nodes)))
    nb = sorted(g.neighbors(v))
    rest = sorted(set(g.nodes) - {v})
    oracle = Tableau.from_graph(g).measure_x(v).to_graph(rest)
    for b in nb or [None]:
        assert lc_equivalent(measure_x(g, v, b), oracle)


@given(graphs(min_nodes=2, max_nodes=8), st.data())
def test_measure_x_independent_of_special_neighbor(g, data):
    v = data.draw(st.sampled_from(sorted(g.nodes)))
    results = [measure_x(g, v, b) for b in sorted(g.neighbors(v))]
    for r in results[1:]:
        assert lc_equivalent(results[0], r)


# LC equivalence ----------------------------------------------------------------


def test_lc_equivalent_identity_and_errors():
    g = branched_chain(3)
    assert lc_equivalent(g, g)
    with pytest.raises(ValueError):
        lc_equivalent(path_graph(3), path_graph(4))
    with pytest.raises(OrbitLimitError):
        lc_equivalent(path_graph(13), path_graph(13))
    with pytest.raises(OrbitLimitError):
        lc_equivalent(path_graph(10), star_graph(9), budget=10)


def brute_orbit(g):
    """LC orbit by repeated closure over all nodes (independent oracle)."""
    orbit = {g.key()}
    frontier = [g]
    while frontier:
        nxt = []
        for h in frontier:
            for v in h.nodes:
                k = local_complement(h, v)
                if k.key() not in orbit:
                    orbit.add(k.key())
                    nxt.append(k)
        frontier = nxt
    return orbit


def test_star_vs_paw():
    star = star_graph(3)
    paw = GraphState.from_edges(range(4), [(0, 1), (1, 2), (0, 2), (2, 3)])
    expected = any(paw.relabel(dict(zip(range(4), p))).key() in brute_orbit(star)
                   for p in itertools.permutations(range(4)))
    # a star's orbit is {stars, complete graph}; the paw is in neither class
    assert expected is False
    for p in itertools.permutations(range(4)):
        assert lc_equivalent(star, paw, dict(zip(range(4), p))) is expected


@given(graphs(max_nodes=6))
def test_lc_orbit_matches_brute_force(g):
    assert {h.key() for h in lc_orbit(g)} == brute_orbit(g)


@given(graphs(max_nodes=6), st.lists(st.integers(0, 5), max_size=6))
def test_random_lc_sequences_stay_equivalent(g, seq):
    h = g
    for v in seq:
        if v in h.nodes:
            h = local_complement(h, v)
    assert lc_equivalent(g, h)


def test_chain_with_checks_is_branched_chain():
    """X-measuring the check qubits of a chain gives a branched chain up to local Cliffords."""
    for k in (2, 3, 4):
        g = path_graph(3 * k)
        for c in range(1, 3 * k, 3):
            g = measure_x(g, c, special_neighbor=c - 1)
        target = branched_chain(k)
        mapping = {i: 3 * i for i in range(k)}
        mapping.update({k + i: 3 * i + 2 for i in range(k)})
        assert lc_equivalent(g, target, mapping)


# emitter programs --------------------------------------------------------------


def test_program_validation():
    with pytest.raises(ValueError):
        EmitterProgram([Instruction("LC", 1)]).validate()
    with pytest.raises(ValueError):
        EmitterProgram([Instruction("EMIT", 1), Instruction("EMIT", 1)]).validate()
    with pytest.raises(ValueError):
        Instruction("CZ", 1)
    with pytest.raises(ValueError):
        Instruction("LC", 1, repeat=2)


def test_program_text_roundtrip():
    prog, _ = generate_branched_chain(3, leaves=2)
    text = prog.to_text()
    assert "EMIT 2 x2" in text
    back = EmitterProgram.from_text(text)
    assert back.instructions == prog.instructions


@given(graphs())
def test_graph_text_roundtrip(g):
    assert GraphState.from_text(g.to_text()) == g


def test_branched_zero_and_one_layer():
    prog, g = generate_branched_chain(0)
    assert prog.instructions == [] and set(g.nodes) == {0}
    prog, g = generate_branched_chain(1)
    # three nodes: a backbone edge plus one leaf on the first backbone node (a 3-path)
    assert len(g.nodes) == 3 and len(g.edges) == 2
    assert nx.is_isomorphic(nx.Graph(list(g.edges)), nx.path_graph(3))
    t, order = simulate_program(prog)
    assert Tableau.from_graph(g).stabilizes(t)


@pytest.mark.parametrize("n", range(0, 7))
def test_branched_node_count(n):
    assert len(generate_branched_chain(n)[1].nodes) == 2 * n + 1
    assert len(generate_branched_chain(n, leaves=3)[1].nodes) == 4 * n + 1


@pytest.mark.parametrize("n,leaves", [(n, l) for n in range(0, 6) for l in (1, 2)])
def test_program_graph_matches_tableau(n, leaves):
    prog, g = generate_branched_chain(n, leaves)
    t, order = simulate_program(prog)
    assert t.is_valid_state()
    assert Tableau.from_graph(g.relabel({u: i for i, u in enumerate(order)})).stabilizes(t)


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_recursion_builds_branched_chain(n):
    """The spin ends the backbone; photons 1 and 2 sit at the far end."""
    _, g = generate_branched_chain(n)
    target = with_tail(branched_chain(n), n - 1)  # backbone 0..n-1, end node 2n, leaves n..2n-1
    mapping = {0: 0, n - 1: 1, 2 * n: 2, n: 2 * n}
    mapping.update({j: 2 * (n - j) for j in range(1, n - 1)})
    mapping.update({n + j: 2 * (n - j) + 1 for j in range(1, n)})
    assert lc_equivalent(g, target, mapping)


def test_tableau_gates_and_validity():
    t = Tableau.zero_state(3)
    t.h(0)
    t.cnot(0, 1)
    t.cnot(0, 2)
    assert t.is_valid_state()
    # GHZ state is LC-equivalent to the star
    assert lc_equivalent(t.to_graph(), star_graph(2))
    u = t.copy()
    u.s(1)
    u.sx(2)
    u.cz(0, 1)
    assert u.is_valid_state()
    assert not t.stabilizes(Tableau.zero_state(3))
