"""Erasure/error phase boundary of a fusion network, traced along rays from the origin.

Each ray is a direction (p0_erase, p0_err); the threshold along it is one
boundary point. Writes curves.csv and summary.json to --out.
"""

import argparse
import json
from pathlib import Path

import numpy as np

from ffcc.mc import ModelSpec, ScanConfig, curves_csv, phase_boundary, summary_json


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--model", default="ffcc_branched_net")
    ap.add_argument("--length", type=float, default=float("inf"))
    ap.add_argument("--rays", type=int, default=7, help="number of directions between the two axes")
    ap.add_argument("--sizes", default="4,8,12")
    ap.add_argument("--samples", type=int, default=10_000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--out", default="results/phase_boundary")
    args = ap.parse_args()

    # rays normalised so that the erasure-axis threshold (about 0.13) and the
    # error-axis one (about 0.015) both sit near x = 1
    angles = np.linspace(0, np.pi / 2, args.rays)
    directions = [(round(0.13 * np.cos(a), 6), round(0.015 * np.sin(a), 6)) for a in angles]
    cfg = ScanConfig(directions[0], tuple(int(s) for s in args.sizes.split(",")), args.samples,
                     x_grid=(0.4, 0.7, 1.0, 1.3, 1.6), max_bisect=5, seed=args.seed,
                     variant="fusion_phenomenological")
    spec = ModelSpec(args.model, length=args.length)
    res = phase_boundary(directions, cfg, spec, args.threads,
                         log=lambda m: print(m, flush=True))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "curves.csv").write_text(curves_csv(res))
    (out / "summary.json").write_text(summary_json(res, vars(args)))
    for r in res:
        pt = r.p_threshold
        print(json.dumps({"direction": r.direction,
                          "p_erase": pt and pt[0], "p_err": pt and pt[1]}))


if __name__ == "__main__":
    main()
