"""Dense GF(2) linear algebra on bit-packed rows.

Rows are packed into ``uint64`` words so elimination is a sequence of
vectorised XORs. Sizes used by the lattice code stay below a few thousand
columns, where dense packing beats sparse elimination by a wide margin.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

__all__ = [
    "pack",
    "unpack",
    "rref",
    "rank",
    "nullspace",
    "solve",
    "in_rowspace",
    "sparsify",
    "IncrementalBasis",
]

_WORD = 64


def pack(M) -> np.ndarray:
    """Pack a 0/1 matrix (dense or scipy sparse) into uint64 words per row."""
    if sp.issparse(M):
        M = M.toarray()
    M = np.asarray(M, dtype=np.uint8) & 1
    if M.ndim == 1:
        M = M[None, :]
    bits = np.packbits(M, axis=1, bitorder="little")
    pad = (-bits.shape[1]) % 8
    if pad:
        bits = np.concatenate([bits, np.zeros((bits.shape[0], pad), np.uint8)], axis=1)
    return np.ascontiguousarray(bits).view(np.uint64)


def unpack(P: np.ndarray, n_cols: int) -> np.ndarray:
    bits = np.unpackbits(np.ascontiguousarray(P).view(np.uint8), axis=1, bitorder="little")
    return bits[:, :n_cols]


def _col_bits(P: np.ndarray, col: int) -> np.ndarray:
    return (P[:, col // _WORD] >> np.uint64(col % _WORD)) & np.uint64(1)


def rref(M, n_cols: int | None = None) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form over GF(2).

    Returns the packed reduced matrix (zero rows dropped) and pivot columns.
    """
    if isinstance(M, np.ndarray) and M.dtype == np.uint64:
        if n_cols is None:
            raise ValueError("n_cols is required for packed input")
        P = M.copy()
    else:
        if n_cols is None:
            n_cols = M.shape[1]
        P = pack(M)
    n_rows = P.shape[0]
    pivots: list[int] = []
    r = 0
    for col in range(n_cols):
        if r == n_rows:
            break
        bits = _col_bits(P[r:], col)
        hits = np.flatnonzero(bits)
        if hits.size == 0:
            continue
        p = r + hits[0]
        if p != r:
            P[[r, p]] = P[[p, r]]
        mask = _col_bits(P, col).astype(bool)
        mask[r] = False
        P[mask] ^= P[r]
        pivots.append(col)
        r += 1
    return P[:r], pivots


def rank(M) -> int:
    return len(rref(M)[1])


def nullspace(M) -> np.ndarray:
    """Basis of {x : M x = 0} as rows of a dense uint8 array."""
    n_cols = M.shape[1]
    R, pivots = rref(M, n_cols)
    R = unpack(R, n_cols)
    free = np.setdiff1d(np.arange(n_cols), pivots)
    basis = np.zeros((free.size, n_cols), dtype=np.uint8)
    basis[np.arange(free.size), free] = 1
    if pivots:
        basis[:, pivots] = R[:, free].T
    return basis


def solve(A, b) -> np.ndarray | None:
    """One solution x of A x = b over GF(2), or None if inconsistent."""
    A = sp.csr_matrix(A) if sp.issparse(A) else np.asarray(A, dtype=np.uint8)
    dense = A.toarray() if sp.issparse(A) else A
    n_rows, n_cols = dense.shape
    aug = np.concatenate([dense & 1, np.asarray(b, dtype=np.uint8).reshape(-1, 1) & 1], axis=1)
    R, pivots = rref(aug)
    if pivots and pivots[-1] == n_cols:
        return None
    R = unpack(R, n_cols + 1)
    x = np.zeros(n_cols, dtype=np.uint8)
    for row, p in enumerate(pivots):
        x[p] = R[row, n_cols]
    return x


def in_rowspace(M, v) -> bool:
    """True if v is a GF(2) combination of the rows of M."""
    M = M.toarray() if sp.issparse(M) else np.asarray(M, dtype=np.uint8)
    if M.shape[0] == 0:
        return not np.any(np.asarray(v) & 1)
    return rank(np.vstack([M, np.asarray(v, dtype=np.uint8)[None, :]])) == rank(M)


def sparsify(B: np.ndarray, col_weights=None, max_rounds: int = 100) -> np.ndarray:
    """Greedy weight reduction of a basis: replace b_j by b_j ^ b_i while it shrinks.

    ``col_weights`` lets some coordinates count more than others. The span is
    unchanged; the result is not guaranteed to be a minimum-weight basis, so
    callers verify the structure they expect.
    """
    B = np.array(B, dtype=np.uint8) & 1
    if B.shape[0] < 2:
        return B
    w = np.ones(B.shape[1], np.int64) if col_weights is None else np.asarray(col_weights, np.int64)
    weights = B @ w
    for _ in range(max_rounds):
        changed = False
        for i in np.argsort(weights, kind="stable"):
            trial = B ^ B[i]
            tw = trial @ w
            better = tw < weights
            better[i] = False
            if better.any():
                B[better] = trial[better]
                weights[better] = tw[better]
                changed = True
        if not changed:
            break
    return B


class IncrementalBasis:
    """Row-reduced GF(2) basis that grows one batch of vectors at a time."""

    def __init__(self, n_cols: int):
        self.n_cols = n_cols
        self.rows = np.zeros((0, (n_cols + 63) // 64), np.uint64)
        self.pivots: list[int] = []

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def reduce(self, V) -> np.ndarray:
        P = V.copy() if (isinstance(V, np.ndarray) and V.dtype == np.uint64) else pack(V)
        for row, col in zip(self.rows, self.pivots):
            hit = _col_bits(P, col).astype(bool)
            if hit.any():
                P[hit] ^= row
        return P

    def add(self, V) -> int:
        """Insert vectors; return the rank increase."""
        P = self.reduce(V)
        P = P[np.any(P != 0, axis=1)]
        if P.shape[0] == 0:
            return 0
        R, piv = rref(P, self.n_cols)
        # keep the stored rows fully reduced against the new pivots
        for row, col in zip(R, piv):
            hit = _col_bits(self.rows, col).astype(bool)
            if hit.any():
                self.rows[hit] ^= row
        self.rows = np.vstack([self.rows, R])
        self.pivots.extend(piv)
        return len(piv)

    def contains(self, v) -> bool:
        return not np.any(self.reduce(v))


def inverse(A) -> np.ndarray:
    """Inverse of a square invertible matrix over GF(2)."""
    A = np.asarray(A, dtype=np.uint8) & 1
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError("matrix must be square")
    R, pivots = rref(np.concatenate([A, np.eye(n, dtype=np.uint8)], axis=1))
    if pivots[:n] != list(range(n)):
        raise ValueError("matrix is singular")
    return unpack(R, 2 * n)[:, n:]
