"""Periodic cell layouts.

Every lattice and fusion network in the package is a translation-invariant
arrangement of ``n_sub`` objects per cell on a periodic grid of cells. Node
ids are ``cell_index * n_sub + sub`` with cells in C order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class CellLayout:
    dims: tuple[int, int, int]
    n_sub: int

    @property
    def n_cells(self) -> int:
        return int(np.prod(self.dims))

    @property
    def size(self) -> int:
        return self.n_cells * self.n_sub

    def index(self, cell, sub) -> np.ndarray:
        """Ids of objects ``sub`` in ``cell`` (coordinates wrap around)."""
        cell = np.asarray(cell, dtype=np.int64)
        d = np.asarray(self.dims, dtype=np.int64)
        c = np.mod(cell, d)
        flat = (c[..., 0] * d[1] + c[..., 1]) * d[2] + c[..., 2]
        return flat * self.n_sub + np.asarray(sub, dtype=np.int64)

    def cell_of(self, idx) -> np.ndarray:
        idx = np.asarray(idx, dtype=np.int64)
        flat = idx // self.n_sub
        d = self.dims
        return np.stack([flat // (d[1] * d[2]), (flat // d[2]) % d[1], flat % d[2]], axis=-1)

    def sub_of(self, idx) -> np.ndarray:
        return np.asarray(idx, dtype=np.int64) % self.n_sub

    def all_cells(self) -> np.ndarray:
        g = np.indices(self.dims).reshape(3, -1).T
        return g.astype(np.int64)

    def translate(self, idx, delta) -> np.ndarray:
        return self.index(self.cell_of(idx) + np.asarray(delta, dtype=np.int64), self.sub_of(idx))

    def project(self, idx, other: "CellLayout") -> np.ndarray:
        """Map ids of this layout onto ``other`` by reducing cells modulo its dims."""
        return other.index(self.cell_of(idx), self.sub_of(idx))
