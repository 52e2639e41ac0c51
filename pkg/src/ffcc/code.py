"""Detectors, correlation surfaces, and their incidence with measurement outcomes.

This is the common interface between the lattice/fusion builders and the
decoder. Outcome ids are dense integers ``0..n_outcomes-1`` over the noisy
outcomes of a pattern.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .pattern import StabilizerPattern, Template, find_surfaces, tile_detectors

CLASS_NAMES = ("primal", "dual")
ORIENTATIONS = {0: "space-like", 1: "space-like", 2: "time-like"}


@dataclass(frozen=True)
class Detector:
    id: int
    support: np.ndarray
    cls: str
    cell: tuple  # (anchor cell, template index)


@dataclass(frozen=True)
class CorrelationSurface:
    support: np.ndarray
    orientation: str  # "time-like" surfaces are normal to the time axis
    cls: str
    normal: int = 2


@dataclass
class CheckCode:
    n_outcomes: int
    detectors: list[Detector]
    outcome_class: np.ndarray  # 0 primal, 1 dual, -1 in no detector
    surfaces: list[CorrelationSurface] = field(default_factory=list)
    cycles: dict = field(default_factory=dict)  # (cls, direction) -> outcome ids

    def class_index(self, cls: str) -> np.ndarray:
        return np.array([i for i, d in enumerate(self.detectors) if d.cls == cls], np.int64)

    def incidence(self, cls: str | None = None) -> sp.csr_matrix:
        dets = self.detectors if cls is None else [self.detectors[i] for i in self.class_index(cls)]
        rows = np.repeat(np.arange(len(dets)), [d.support.size for d in dets])
        cols = np.concatenate([d.support for d in dets]) if dets else np.zeros(0, np.int64)
        return sp.csr_matrix((np.ones(rows.size, np.uint8), (rows, cols)),
                             shape=(len(dets), self.n_outcomes))

    def class_outcomes(self, cls: str) -> np.ndarray:
        return np.flatnonzero(self.outcome_class == CLASS_NAMES.index(cls))

    def surface(self, cls: str = "primal", orientation: str = "time-like", normal: int | None = None):
        for s in self.surfaces:
            if s.cls == cls and s.orientation == orientation and (normal is None or s.normal == normal):
                return s
        raise KeyError((cls, orientation, normal))


def derive_code(pattern: StabilizerPattern, templates: list[Template], surfaces: bool = True,
                directions=(0, 1, 2)) -> CheckCode:
    D = tile_detectors(pattern, templates)
    noisy_ids = np.flatnonzero(pattern.noisy)
    pos = -np.ones(pattern.outcomes.size, np.int64)
    pos[noisy_ids] = np.arange(noisy_ids.size)
    dets = [Detector(i, np.sort(pos[s]), CLASS_NAMES[c], (tuple(int(x) for x in a), int(t)))
            for i, (s, c, a, t) in enumerate(zip(D.supports, D.cls, D.anchor, D.template))]
    code = CheckCode(noisy_ids.size, dets, D.outcome_class[noisy_ids].copy())
    if surfaces and dets:
        S = find_surfaces(pattern, templates, D, directions=directions)
        for (c, d), ids in sorted(S.surfaces.items()):
            ids = ids[pattern.noisy[ids]]
            code.surfaces.append(CorrelationSurface(np.sort(pos[ids]), ORIENTATIONS[d], CLASS_NAMES[c], d))
        code.cycles = {(CLASS_NAMES[c], d): np.sort(pos[ids]) for (c, d), ids in S.cycles.items()}
    return code
