"""Foliated lattices, detectors, and correlation surfaces."""

from __future__ import annotations

import json

import numpy as np

from ..code import CLASS_NAMES, CheckCode, CorrelationSurface, Detector, derive_code
from .foliated import (
    FoliatedLattice,
    branched_variant,
    build_lattice,
    build_raussendorf,
    family_templates,
    foliate_ffcc,
    schedule_color,
)
from .hexagonal import COLORS, HexLattice, build_hex_lattice

__all__ = [
    "HexLattice",
    "FoliatedLattice",
    "Detector",
    "CorrelationSurface",
    "build_hex_lattice",
    "foliate_ffcc",
    "build_raussendorf",
    "branched_variant",
    "build_lattice",
    "find_detectors",
    "find_correlation_surfaces",
    "lattice_code",
    "node_classes",
    "export_lattice",
    "schedule_color",
]

_CODES: dict[int, CheckCode] = {}


def lattice_code(f: FoliatedLattice, surfaces: bool = True) -> CheckCode:
    """Detectors and surfaces of ``f`` (cached on the lattice object)."""
    code = getattr(f, "_code", None)
    if code is None or (surfaces and not code.surfaces):
        code = derive_code(f.pattern, family_templates(f.kind), surfaces=surfaces)
        object.__setattr__(f, "_code", code)
    return code


def find_detectors(f: FoliatedLattice) -> list[Detector]:
    if f.n_nodes == 0:
        return []
    return lattice_code(f, surfaces=False).detectors


def find_correlation_surfaces(f: FoliatedLattice, detectors: list[Detector] | None = None) -> list[CorrelationSurface]:
    """One surface per class normal to each axis; axis 2 is time."""
    return lattice_code(f, surfaces=True).surfaces


def node_classes(f: FoliatedLattice) -> np.ndarray:
    """'primal' or 'dual' per node."""
    oc = lattice_code(f, surfaces=False).outcome_class
    return np.array([CLASS_NAMES[c] if c >= 0 else "none" for c in oc])


def export_lattice(f: FoliatedLattice, with_surfaces: bool = True) -> dict:
    code = lattice_code(f, surfaces=with_surfaces)
    cls = node_classes(f)
    nodes = [{"id": i, "kind": str(f.node_kind[i]), "coords": [int(x) for x in f.node_coords[i]],
              "class": str(cls[i])} for i in range(f.n_nodes)]
    out = {
        "schema_version": 1,
        "kind": f.kind,
        "L": f.L,
        "T": f.T,
        "nodes": nodes,
        "edges": f.edges.tolist(),
        "detectors": [{"id": d.id, "class": d.cls, "support": d.support.tolist()} for d in code.detectors],
    }
    if with_surfaces:
        out["surfaces"] = [{"class": s.cls, "orientation": s.orientation, "normal": s.normal,
                            "support": s.support.tolist()} for s in code.surfaces]
    if f.hex is not None:
        out["colors"] = list(COLORS)
    return out


def dump_lattice(f: FoliatedLattice, path, with_surfaces: bool = True) -> None:
    with open(path, "w") as fh:
        json.dump(export_lattice(f, with_surfaces), fh)
