"""Pauli-frame simulation of resource-state generation with a single quantum emitter.

Qubit 0 is the spin; photons are 1..N in emission order. Emission is a CNOT
from the spin onto a photon prepared in |0>. Noise: between consecutive
emissions the spin suffers X and Z flips (probability p each); every gate on
the spin is followed by X and Z flips with the same p. Photon-local gates are
noiseless.

A frame is only meaningful modulo the stabilizers of the prepared state. For
statistics each spin error is traded, when it occurs, for an equivalent error
on photons already emitted (see ``channel_effects``); the raw frame is
available from ``sample_frame``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from . import gf2
from .graphstate import EmitterProgram, GraphState, Instruction, Tableau, generate_branched_chain, local_complement

FAMILIES = ("star", "chain", "branched")
SPIN = 0


@dataclass(frozen=True)
class Gate:
    name: str  # CNOT, H, S, SX, IDLE
    qubits: tuple[int, ...]

    @property
    def on_spin(self) -> bool:
        return SPIN in self.qubits and self.name != "CNOT"


@dataclass
class EmitterCircuit:
    family: str
    n_photons: int
    gates: list[Gate]

    @property
    def n_qubits(self) -> int:
        return self.n_photons + 1

    def pattern(self) -> list[str]:
        """Spin-level skeleton: CNOTs and spin Hadamards in order."""
        return [g.name for g in self.gates if g.name == "CNOT" or (g.name == "H" and g.qubits == (SPIN,))]

    def noise_sites(self) -> list[int]:
        """Gate indices followed by a spin X/Z channel."""
        return [i for i, g in enumerate(self.gates) if g.name == "IDLE" or g.on_spin]

    def tableau(self) -> Tableau:
        """Noiseless output state (spin starts in |+>, photons in |0>)."""
        t = Tableau.zero_state(self.n_qubits)
        t.h(SPIN)
        for g in self.gates:
            _apply(t, g)
        return t


def _apply(t, g: Gate):
    if g.name == "CNOT":
        t.cnot(*g.qubits)
    elif g.name == "H":
        t.h(g.qubits[0])
    elif g.name == "S":
        t.s(g.qubits[0])
    elif g.name == "SX":
        t.sx(g.qubits[0])
    elif g.name != "IDLE":
        raise ValueError(f"unknown gate {g.name}")


def _emit(gates, p, first):
    if not first:
        gates.append(Gate("IDLE", (SPIN,)))
    gates.append(Gate("CNOT", (SPIN, p)))


def compile_program(prog: EmitterProgram) -> list[Gate]:
    """Gate list for an emitter program.

    EMIT is a CNOT plus a Hadamard on the photon (turning it into a leaf of the
    spin); LC(v) is sqrt(X) on v and sqrt(Z) on each current neighbour of v.
    """
    prog.validate()
    gates: list[Gate] = []
    g = GraphState._make({SPIN: set()})
    first = True
    for ins in prog.instructions:
        if ins.op == "EMIT":
            for p in ins.photons():
                _emit(gates, p, first)
                first = False
                gates.append(Gate("H", (p,)))
                g = g.add_leaf(SPIN, p)
        elif ins.op == "LC":
            gates.append(Gate("SX", (ins.target,)))
            gates += [Gate("S", (w,)) for w in sorted(g.neighbors(ins.target))]
            g = local_complement(g, ins.target)
        else:
            gates.append(Gate("H", (ins.target,)))
    return gates


def build_circuit(family: str, n_photons: int) -> EmitterCircuit:
    if family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}; choose from {FAMILIES}")
    if n_photons < 1:
        raise ValueError("n_photons must be >= 1")
    gates: list[Gate] = []
    if family == "star":
        for p in range(1, n_photons + 1):
            _emit(gates, p, p == 1)
    elif family == "chain":
        for p in range(1, n_photons + 1):
            if p > 1:
                gates.append(Gate("H", (SPIN,)))
            _emit(gates, p, p == 1)
    else:
        prog, _ = generate_branched_chain(n_photons // 2)
        if n_photons % 2:
            prog.instructions.append(Instruction("EMIT", n_photons))
        gates = compile_program(prog)
    return EmitterCircuit(family, n_photons, gates)


def propagate(c: EmitterCircuit, fx: np.ndarray, fz: np.ndarray, start: int = 0):
    """Conjugate frames (shots, qubits) through gates[start:], in place."""
    for g in c.gates[start:]:
        _frame_gate(fx, fz, g)


def _frame_gate(fx, fz, g: Gate):
    q = g.qubits
    if g.name == "CNOT":
        fx[:, q[1]] ^= fx[:, q[0]]
        fz[:, q[0]] ^= fz[:, q[1]]
    elif g.name == "H":
        fx[:, q[0]], fz[:, q[0]] = fz[:, q[0]].copy(), fx[:, q[0]].copy()
    elif g.name == "S":
        fz[:, q[0]] ^= fx[:, q[0]]
    elif g.name == "SX":
        fx[:, q[0]] ^= fz[:, q[0]]


def sample_frame(c: EmitterCircuit, p: float, rng: np.random.Generator, shots: int = 1,
                 forced: dict | None = None):
    """Final raw Pauli frame (fx, fz), each (shots, n_qubits) uint8.

    ``forced`` maps a gate index to "X" or "Z": that error is inserted on the
    spin just before the gate, in every shot (random channels still fire with p).
    """
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    n = c.n_qubits
    fx = np.zeros((shots, n), np.uint8)
    fz = np.zeros((shots, n), np.uint8)
    sites = set(c.noise_sites())
    forced = forced or {}
    for i, g in enumerate(c.gates):
        if i in forced:
            (fx if forced[i] == "X" else fz)[:, SPIN] ^= 1
        _frame_gate(fx, fz, g)
        if i in sites:
            fx[:, SPIN] ^= rng.random(shots) < p
            fz[:, SPIN] ^= rng.random(shots) < p
    return fx, fz


def _prefix_tableaus(c: EmitterCircuit):
    t = Tableau.zero_state(c.n_qubits)
    t.h(SPIN)
    for g in c.gates:
        _apply(t, g)
        yield t


def _spin_substitute(t: Tableau, active: list[int], kind: str):
    """Photon-only Pauli (x, z) equal to X or Z on the spin modulo the current stabilizers.

    Only stabilizers supported on the spin and already-emitted photons are used,
    so the substitute never touches a photon that has yet to be emitted. Returns
    None if the spin error cannot be moved off the spin.
    """
    n = t.n
    cols = np.r_[active, n + np.asarray(active)]
    S = np.c_[t.x, t.z]
    # elements of the group supported on the active qubits: the group is S_active x <Z_p, p inactive>
    inactive = np.setdiff1d(np.arange(n), active)
    Sa = S[:, cols]
    if inactive.size:
        # drop the inactive photons' Z_p factors (they stabilize |0>)
        Sa = gf2.unpack(gf2.rref(np.c_[S[:, n + inactive], Sa])[0], inactive.size + cols.size)
        Sa = Sa[~Sa[:, :inactive.size].any(axis=1), inactive.size:]
    k = len(active)
    want = np.zeros(2 * k, np.uint8)
    want[0 if kind == "X" else k] = 1  # spin is active[0]
    # spin columns first, then photons oldest first: pivots land on old photons, so the
    # reduced element is supported on the most recent ones
    order = list(range(k))
    perm = np.r_[[[i, k + i] for i in order]].ravel()
    R, piv = gf2.rref(Sa[:, perm])
    R = gf2.unpack(R, 2 * k)
    rows = {pc: r for r, pc in zip(R, piv)}
    if 0 in rows and rows[0][1] and 1 in rows:
        rows[0] = rows[0] ^ rows[1]
    elem = rows.get(0 if kind == "X" else 1)
    if elem is None or elem[1 - (0 if kind == "X" else 1)]:
        return None
    out = np.zeros(2 * k, np.uint8)
    out[perm] = elem
    out ^= want  # remove the spin part
    full = np.zeros(2 * n, np.uint8)
    full[cols] = out
    return full[:n], full[n:]


def channel_effects(c: EmitterCircuit, localize: bool = True):
    """Final frame caused by each spin channel, as (EX, EZ) of shape (2 * n_sites, n_qubits).

    Row 2i is the X channel at noise site i, row 2i + 1 the Z channel. With
    ``localize`` each spin error is first traded for an equivalent error on
    already-emitted photons, which models the freedom to absorb it into the
    state's stabilizers at the moment it occurs.
    """
    n = c.n_qubits
    sites = c.noise_sites()
    site_set = set(sites)
    EX = np.zeros((2 * len(sites), n), np.uint8)
    EZ = np.zeros_like(EX)
    active = [SPIN]
    row = 0
    for i, t in enumerate(_prefix_tableaus(c)):
        g = c.gates[i]
        if g.name == "CNOT":
            active.append(g.qubits[1])
        if i not in site_set:
            continue
        for kind in ("X", "Z"):
            fx = np.zeros((1, n), np.uint8)
            fz = np.zeros((1, n), np.uint8)
            sub = _spin_substitute(t, active, kind) if localize else None
            if sub is None:
                (fx if kind == "X" else fz)[0, SPIN] = 1
            else:
                fx[0], fz[0] = sub
            propagate(c, fx, fz, start=i + 1)
            EX[row], EZ[row] = fx[0], fz[0]
            row += 1
    return EX, EZ


@dataclass
class ErrorStats:
    pX: np.ndarray
    pZ: np.ndarray
    corrX: np.ndarray
    corrZ: np.ndarray
    n_samples: int

    def corr_ci(self, kind: str, alpha: float = 0.05, n_tests: int = 1):
        """Approximate (1 - alpha) CI per correlation via Fisher's z, Bonferroni over n_tests."""
        r = self.corrX if kind == "X" else self.corrZ
        zr = np.arctanh(np.clip(r, -0.999999, 0.999999))
        h = norm.ppf(1 - alpha / (2 * n_tests)) / np.sqrt(max(self.n_samples - 3, 1))
        return np.tanh(zr - h), np.tanh(zr + h)

    def distant_pairs(self, kind: str, min_gap: int = 3, alpha: float = 0.05):
        """Photon pairs (i, j), j - i >= min_gap, whose correlation CI excludes zero.

        The CI level is family-wise over all such pairs (Bonferroni).
        """
        n = len(self.pX)
        pairs = [(i, j) for i in range(1, n) for j in range(i + min_gap, n)]
        if not pairs:
            return []
        lo, hi = self.corr_ci(kind, alpha, len(pairs))
        return [(i, j) for i, j in pairs if lo[i, j] > 0 or hi[i, j] < 0]


def _pearson(E: np.ndarray) -> np.ndarray:
    E = E.astype(float)
    m = E.mean(0)
    sd = E.std(0)
    C = (E - m).T @ (E - m) / len(E)
    with np.errstate(invalid="ignore", divide="ignore"):
        R = C / np.outer(sd, sd)
    R[~np.isfinite(R)] = 0.0
    live = sd > 0
    R[np.diag_indices_from(R)] = np.where(live, 1.0, 0.0)
    return R


def error_stats(family: str, n_photons: int, p: float, n_samples: int, seed: int = 0,
                localize: bool = True) -> ErrorStats:
    """Marginals and Pearson correlations of final X and Z error indicators."""
    if n_samples < 1000:
        raise ValueError("n_samples must be >= 1000")
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    c = build_circuit(family, n_photons)
    EX, EZ = channel_effects(c, localize)
    rng = np.random.default_rng(seed)
    fired = (rng.random((n_samples, EX.shape[0])) < p).astype(np.uint8)
    fx = (fired @ EX) % 2
    fz = (fired @ EZ) % 2
    return ErrorStats(fx.mean(0), fz.mean(0), _pearson(fx), _pearson(fz), n_samples)
