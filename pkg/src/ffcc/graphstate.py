"""Graph states, local complementation, Pauli-X measurement, and emitter programs.

Graphs carry value semantics: every operation returns a new ``GraphState``.
A phase-free binary stabilizer tableau serves as an independent oracle for the
graph rewrite rules on small instances.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from . import gf2


class OrbitLimitError(RuntimeError):
    """The LC orbit exceeded the search budget."""


@dataclass(frozen=True)
class GraphState:
    nodes: tuple[int, ...]
    adj: dict = field(compare=False, repr=False)  # node -> frozenset of neighbours
    labels: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        for v, nb in self.adj.items():
            if v in nb:
                raise ValueError(f"self-loop on {v}")
            for w in nb:
                if v not in self.adj.get(w, ()):
                    raise ValueError("adjacency is not symmetric")

    @classmethod
    def from_edges(cls, nodes, edges, labels=None) -> "GraphState":
        adj = {int(v): set() for v in nodes}
        for a, b in edges:
            a, b = int(a), int(b)
            if a not in adj or b not in adj:
                raise ValueError(f"edge ({a}, {b}) has an endpoint outside the node set")
            if a == b:
                raise ValueError(f"self-loop on {a}")
            adj[a].add(b)
            adj[b].add(a)
        return cls._make(adj, labels)

    @classmethod
    def _make(cls, adj, labels=None) -> "GraphState":
        adj = {v: frozenset(nb) for v, nb in adj.items()}
        return cls(tuple(sorted(adj)), adj, dict(labels or {}))

    @property
    def edges(self) -> frozenset:
        return frozenset((a, b) for a in self.adj for b in self.adj[a] if a < b)

    def neighbors(self, v) -> frozenset:
        if v not in self.adj:
            raise ValueError(f"unknown node {v}")
        return self.adj[v]

    def degree(self, v) -> int:
        return len(self.neighbors(v))

    def key(self) -> frozenset:
        """Hashable form of the labelled graph (node set and edges)."""
        return frozenset(self.edges) | frozenset((v,) for v in self.nodes)

    def __eq__(self, other):
        return isinstance(other, GraphState) and self.nodes == other.nodes and self.edges == other.edges

    def __hash__(self):
        return hash((self.nodes, self.edges))

    def relabel(self, mapping: dict) -> "GraphState":
        adj = {mapping[v]: {mapping[w] for w in nb} for v, nb in self.adj.items()}
        return GraphState._make(adj, {mapping[v]: t for v, t in self.labels.items()})

    def remove(self, v) -> "GraphState":
        self.neighbors(v)
        adj = {u: set(nb) - {v} for u, nb in self.adj.items() if u != v}
        return GraphState._make(adj, {u: t for u, t in self.labels.items() if u != v})

    def add_leaf(self, v, new, label=None) -> "GraphState":
        self.neighbors(v)
        if new in self.adj:
            raise ValueError(f"node {new} already present")
        adj = {u: set(nb) for u, nb in self.adj.items()}
        adj[new] = {v}
        adj[v].add(new)
        labels = dict(self.labels)
        if label is not None:
            labels[new] = label
        return GraphState._make(adj, labels)

    def adjacency_matrix(self) -> np.ndarray:
        idx = {v: i for i, v in enumerate(self.nodes)}
        A = np.zeros((len(self.nodes),) * 2, np.uint8)
        for a, b in self.edges:
            A[idx[a], idx[b]] = A[idx[b], idx[a]] = 1
        return A

    # text format: header "nodes N", then node ids, then "u v" per edge
    def to_text(self) -> str:
        lines = [f"nodes {len(self.nodes)}", " ".join(map(str, self.nodes))]
        lines += [f"{a} {b}" for a, b in sorted(self.edges)]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "GraphState":
        lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
        head = lines[0].split()
        if len(head) != 2 or head[0] != "nodes":
            raise ValueError("missing 'nodes N' header")
        n = int(head[1])
        nodes = [int(t) for t in lines[1].split()] if n else []
        rest = lines[2:] if n else lines[1:]
        if len(nodes) != n:
            raise ValueError("node count does not match header")
        return cls.from_edges(nodes, [tuple(map(int, ln.split())) for ln in rest])


def path_graph(n: int) -> GraphState:
    return GraphState.from_edges(range(n), [(i, i + 1) for i in range(n - 1)])


def star_graph(n_leaves: int) -> GraphState:
    return GraphState.from_edges(range(n_leaves + 1), [(0, i) for i in range(1, n_leaves + 1)])


def local_complement(g: GraphState, v) -> GraphState:
    """Complement the subgraph induced on the neighbourhood of v."""
    nb = sorted(g.neighbors(v))
    adj = {u: set(s) for u, s in g.adj.items()}
    for a, b in itertools.combinations(nb, 2):
        if b in adj[a]:
            adj[a].discard(b)
            adj[b].discard(a)
        else:
            adj[a].add(b)
            adj[b].add(a)
    return GraphState._make(adj, g.labels)


def measure_x(g: GraphState, v, special_neighbor=None) -> GraphState:
    """Graph after measuring v in the X basis, up to local Cliffords on the remaining nodes."""
    nb = g.neighbors(v)
    if not nb:
        return g.remove(v)
    if special_neighbor not in nb:
        raise ValueError(f"{special_neighbor} is not a neighbour of {v}")
    b0 = special_neighbor
    h = local_complement(g, b0)
    h = local_complement(h, v).remove(v)
    return local_complement(h, b0)


def measure_z(g: GraphState, v) -> GraphState:
    return g.remove(v)


# LC orbits ---------------------------------------------------------------------


def lc_orbit(g: GraphState, budget: int = 200_000) -> set:
    """All labelled graphs reachable from g by local complementations."""
    seen = {g}
    queue = deque([g])
    while queue:
        h = queue.popleft()
        for v in h.nodes:
            if not h.adj[v]:
                continue
            k = local_complement(h, v)
            if k not in seen:
                seen.add(k)
                if len(seen) > budget:
                    raise OrbitLimitError(f"LC orbit exceeds {budget} graphs")
                queue.append(k)
    return seen


def lc_equivalent(g1: GraphState, g2: GraphState, mapping: dict | None = None,
                  max_nodes: int = 12, budget: int = 200_000) -> bool:
    """True iff g2 (relabelled by ``mapping``: g2 node -> g1 node) lies in the LC orbit of g1."""
    if len(g1.nodes) != len(g2.nodes):
        raise ValueError("graphs have different node counts")
    if len(g1.nodes) > max_nodes:
        raise OrbitLimitError(f"LC equivalence is limited to {max_nodes} nodes")
    if mapping is None:
        mapping = dict(zip(g2.nodes, g1.nodes))
    target = g2.relabel(mapping)
    if target.nodes != g1.nodes:
        raise ValueError("mapping is not a bijection onto g1's nodes")
    seen = {g1}
    queue = deque([g1])
    while queue:
        h = queue.popleft()
        if h == target:
            return True
        for v in h.nodes:
            if h.adj[v]:
                k = local_complement(h, v)
                if k not in seen:
                    seen.add(k)
                    if len(seen) > budget:
                        raise OrbitLimitError(f"LC orbit exceeds {budget} graphs")
                    queue.append(k)
    return False


# emitter programs --------------------------------------------------------------


@dataclass(frozen=True)
class Instruction:
    op: str  # EMIT, LC, H
    target: int
    repeat: int = 1  # EMIT only: photons target .. target + repeat - 1

    def __post_init__(self):
        if self.op not in ("EMIT", "LC", "H"):
            raise ValueError(f"unknown instruction {self.op!r}")
        if self.repeat < 1 or (self.op != "EMIT" and self.repeat != 1):
            raise ValueError("repeat applies to EMIT only and must be >= 1")

    def photons(self) -> range:
        return range(self.target, self.target + self.repeat)

    def __str__(self):
        return f"{self.op} {self.target}" + (f" x{self.repeat}" if self.repeat > 1 else "")


@dataclass
class EmitterProgram:
    """Instruction list for a single emitter (spin node 0) and photons 1, 2, ..."""

    instructions: list[Instruction] = field(default_factory=list)
    spin: int = 0

    def validate(self):
        emitted = {self.spin}
        for ins in self.instructions:
            if ins.op == "EMIT":
                for p in ins.photons():
                    if p in emitted:
                        raise ValueError(f"photon {p} emitted twice")
                    emitted.add(p)
            elif ins.target not in emitted:
                raise ValueError(f"{ins} references a photon before its emission")
        return self

    @property
    def n_photons(self) -> int:
        return sum(i.repeat for i in self.instructions if i.op == "EMIT")

    def run(self) -> GraphState:
        """Graph-picture execution: EMIT adds a leaf on the spin, LC complements a neighbourhood.

        H on the spin changes only the local frame, not the graph.
        """
        self.validate()
        g = GraphState._make({self.spin: set()}, {self.spin: "spin"})
        for ins in self.instructions:
            if ins.op == "EMIT":
                for p in ins.photons():
                    g = g.add_leaf(self.spin, p, "photon")
            elif ins.op == "LC":
                g = local_complement(g, ins.target)
        return g

    def to_text(self) -> str:
        return "".join(f"{i}\n" for i in self.instructions)

    @classmethod
    def from_text(cls, text: str) -> "EmitterProgram":
        out = []
        for ln in text.splitlines():
            parts = ln.split()
            if not parts:
                continue
            rep = int(parts[2][1:]) if len(parts) > 2 else 1
            out.append(Instruction(parts[0], int(parts[1]), rep))
        return cls(out).validate()


def generate_branched_chain(n_layers: int, leaves: int = 1) -> tuple[EmitterProgram, GraphState]:
    """Program growing a branched chain one layer per recursion.

    Each recursion emits a photon, complements the spin's neighbourhood, then
    the new photon's, and emits again. ``leaves`` > 1 repeats the final
    emission, giving several leaves per branch point.
    """
    if n_layers < 0 or leaves < 1:
        raise ValueError("need n_layers >= 0 and leaves >= 1")
    prog = []
    nxt = 1
    for _ in range(n_layers):
        new = nxt
        prog += [Instruction("EMIT", new), Instruction("LC", 0), Instruction("LC", new),
                 Instruction("EMIT", new + 1, leaves)]
        nxt = new + 1 + leaves
    p = EmitterProgram(prog)
    return p, p.run()


def branched_chain(n_branches: int, leaves: int = 1) -> GraphState:
    """Backbone 0..n-1 with ``leaves`` pendant nodes on each backbone node."""
    edges = [(i, i + 1) for i in range(n_branches - 1)]
    nxt = n_branches
    for i in range(n_branches):
        for _ in range(leaves):
            edges.append((i, nxt))
            nxt += 1
    return GraphState.from_edges(range(nxt), edges)


# stabilizer oracle -------------------------------------------------------------


class Tableau:
    """Phase-free stabilizer tableau (x | z) on qubits 0..n-1; rows are generators."""

    def __init__(self, x: np.ndarray, z: np.ndarray):
        self.x = np.asarray(x, np.uint8) % 2
        self.z = np.asarray(z, np.uint8) % 2

    @property
    def n(self) -> int:
        return self.x.shape[1]

    @classmethod
    def zero_state(cls, n: int) -> "Tableau":
        return cls(np.zeros((n, n), np.uint8), np.eye(n, dtype=np.uint8))

    @classmethod
    def from_graph(cls, g: GraphState) -> "Tableau":
        n = len(g.nodes)
        return cls(np.eye(n, dtype=np.uint8), g.adjacency_matrix())

    def copy(self) -> "Tableau":
        return Tableau(self.x.copy(), self.z.copy())

    # symplectic action of Clifford gates, ignoring signs
    def h(self, q):
        self.x[:, q], self.z[:, q] = self.z[:, q].copy(), self.x[:, q].copy()

    def s(self, q):
        self.z[:, q] ^= self.x[:, q]

    def sx(self, q):
        self.x[:, q] ^= self.z[:, q]

    def cnot(self, c, t):
        self.x[:, t] ^= self.x[:, c]
        self.z[:, c] ^= self.z[:, t]

    def cz(self, a, b):
        self.z[:, a] ^= self.x[:, b]
        self.z[:, b] ^= self.x[:, a]

    def local_complement(self, g: GraphState, v, order):
        """Apply the local Clifford realising LC at v (sqrt X on v, sqrt Z on its neighbours)."""
        idx = {u: i for i, u in enumerate(order)}
        self.sx(idx[v])
        for w in g.neighbors(v):
            self.s(idx[w])

    def measure_x(self, q) -> "Tableau":
        """Measure X on q and drop q (outcome and signs are not tracked)."""
        x, z = self.x.copy(), self.z.copy()
        hits = np.flatnonzero(z[:, q])
        if not hits.size:
            # X_q already lies in the group
            hits = np.flatnonzero(x[:, q])
        p = hits[0]
        for r in hits[1:]:
            x[r] ^= x[p]
            z[r] ^= z[p]
        x[p], z[p] = 0, 0
        x[p, q] = 1
        # every other row now commutes with X_q; strip its X_q factor
        x[:, q] = 0
        keep = [r for r in range(self.n) if r != p]
        cols = [c for c in range(self.n) if c != q]
        return Tableau(x[np.ix_(keep, cols)], z[np.ix_(keep, cols)])

    def stabilizes(self, other: "Tableau") -> bool:
        """Same stabilizer group up to signs."""
        a = np.c_[self.x, self.z]
        b = np.c_[other.x, other.z]
        return gf2.rank(a) == gf2.rank(b) == gf2.rank(np.r_[a, b])

    def is_valid_state(self) -> bool:
        """n independent, pairwise commuting generators."""
        a = np.c_[self.x, self.z].astype(np.int64)
        comm = (self.x.astype(np.int64) @ self.z.T.astype(np.int64) + self.z.astype(np.int64) @ self.x.T) % 2
        return gf2.rank(a.astype(np.uint8)) == self.n and not comm.any()

    def to_graph(self, order=None) -> GraphState:
        """A graph state LC-equivalent to this stabilizer state."""
        n = self.n
        t = self.copy()
        R, _ = gf2.rref(np.c_[t.x, t.z])
        R = gf2.unpack(R, 2 * n)
        # rows without X part: Hadamards on the pivots of their Z part make X invertible
        zrows = R[~R[:, :n].any(axis=1), n:]
        if zrows.size:
            for c in gf2.rref(zrows)[1]:
                t.h(c)
        A = (gf2.inverse(t.x).astype(np.int64) @ t.z) % 2
        A = A.astype(np.uint8)
        np.fill_diagonal(A, 0)  # diagonal Z terms are removed by S gates
        if (A != A.T).any():
            raise ValueError("tableau does not reduce to a graph state")
        order = list(order) if order is not None else list(range(n))
        edges = [(order[i], order[j]) for i, j in zip(*np.nonzero(np.triu(A)))]
        return GraphState.from_edges(order, edges)


def simulate_program(prog: EmitterProgram) -> tuple[Tableau, list[int]]:
    """Run an emitter program on the tableau oracle.

    EMIT is a CNOT from the spin onto a fresh photon followed by a Hadamard on
    the photon; LC applies its local Clifford with respect to the current graph.
    """
    prog.validate()
    order = [prog.spin] + sorted(p for i in prog.instructions if i.op == "EMIT" for p in i.photons())
    idx = {u: i for i, u in enumerate(order)}
    t = Tableau.zero_state(len(order))
    t.h(idx[prog.spin])
    g = GraphState._make({prog.spin: set()})
    for ins in prog.instructions:
        if ins.op == "EMIT":
            for p in ins.photons():
                t.cnot(idx[prog.spin], idx[p])
                t.h(idx[p])
                g = g.add_leaf(prog.spin, p)
        elif ins.op == "LC":
            t.local_complement(g, ins.target, order)
            g = local_complement(g, ins.target)
        else:
            t.h(idx[ins.target])
    return t, order
