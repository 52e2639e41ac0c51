"""Fusion-network threshold table: pure error and pure erasure thresholds per construction.

Writes curves.csv and summary.json to --out. Full scale (L = 4, 8, 12 and
10^4 shots per point) takes a few hours on one core; use --samples and
--sizes for a quick look.
"""

import argparse
import json
from pathlib import Path

from ffcc.mc import ModelSpec, ScanConfig, curves_csv, find_threshold, summary_json

# (model, length, error grid, erasure grid)
ROWS = [
    ("star4", float("inf"), (0.005, 0.007, 0.009, 0.011), (0.05, 0.06, 0.07, 0.08, 0.09)),
    ("hexagon6", float("inf"), (0.008, 0.010, 0.012, 0.014), (0.10, 0.115, 0.13, 0.145)),
    ("ffcc_branched_net", 4, (0.005, 0.007, 0.009, 0.011), (0.05, 0.065, 0.08, 0.095)),
    ("ffcc_branched_net", 8, (0.008, 0.010, 0.012, 0.014), (0.08, 0.095, 0.11, 0.125)),
    ("ffcc_branched_net", 14, (0.010, 0.012, 0.014, 0.016), (0.09, 0.105, 0.12, 0.135)),
    ("ffcc_branched_net", float("inf"), (0.010, 0.013, 0.016, 0.020), (0.10, 0.12, 0.14, 0.16)),
]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="4,8,12")
    ap.add_argument("--samples", type=int, default=10_000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--out", default="results/threshold_table")
    args = ap.parse_args()
    sizes = tuple(int(s) for s in args.sizes.split(","))

    results, table = [], []
    for name, length, g_err, g_erase in ROWS:
        spec = ModelSpec(name, length=length)
        row = {"model": spec.label()}
        for axis, direction, grid in (("error", (0.0, 1.0), g_err), ("erasure", (1.0, 0.0), g_erase)):
            cfg = ScanConfig(direction, sizes, args.samples, grid, max_bisect=5, seed=args.seed,
                             variant="fusion_phenomenological")
            r = find_threshold(cfg, spec, args.threads)
            results.append(r)
            row[axis] = r.x_threshold if r.found else None
            print(json.dumps(r.to_json()), flush=True)
        table.append(row)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "curves.csv").write_text(curves_csv(results))
    (out / "summary.json").write_text(summary_json(results, vars(args)))
    print(f"{'model':<26}{'error %':>10}{'erasure %':>12}")
    for row in table:
        e, z = (f"{100 * row[k]:.2f}" if row[k] is not None else "-" for k in ("error", "erasure"))
        print(f"{row['model']:<26}{e:>10}{z:>12}")


if __name__ == "__main__":
    main()
