"""IID thresholds of the bare lattices for both correlation-surface orientations.

Compares the foliated color code, its branched variant, and the Raussendorf
lattice along the pure error and pure erasure axes.
"""

import argparse
import json
from pathlib import Path

from ffcc.mc import ModelSpec, ScanConfig, curves_csv, find_threshold, summary_json

GRIDS = {
    "ffcc": ((0.005, 0.007, 0.009, 0.011), (0.06, 0.075, 0.09, 0.105)),
    "ffcc_branched": ((0.010, 0.013, 0.016, 0.020, 0.024), (0.09, 0.11, 0.13, 0.15)),
    "raussendorf": ((0.020, 0.025, 0.030, 0.035), (0.20, 0.23, 0.26, 0.29)),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--variant", choices=("iid", "weighted_iid"), default="iid")
    ap.add_argument("--sizes", default="4,8,12")
    ap.add_argument("--samples", type=int, default=10_000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--out", default="results/bare_lattices")
    args = ap.parse_args()

    res = []
    for name, (g_err, g_erase) in GRIDS.items():
        for orientation in ("time-like", "space-like"):
            spec = ModelSpec(name, orientation=orientation)
            for direction, grid in (((0.0, 1.0), g_err), ((1.0, 0.0), g_erase)):
                cfg = ScanConfig(direction, tuple(int(s) for s in args.sizes.split(",")), args.samples, grid,
                                 max_bisect=5, seed=args.seed, variant=args.variant)
                r = find_threshold(cfg, spec, args.threads)
                res.append(r)
                print(json.dumps(r.to_json()), flush=True)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "curves.csv").write_text(curves_csv(res))
    (out / "summary.json").write_text(summary_json(res, vars(args)))


if __name__ == "__main__":
    main()
