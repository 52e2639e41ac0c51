"""Command-line front end: build, threshold, sweep, biased-loss, emitter-noise, selftest.

Options may also come from a config file (``--config``): either ``key=value``
lines or the JSON config echo written by a previous run. Flags given on the
command line override the file. Exit codes: 0 success (including a scan with no
threshold), 2 usage error, 1 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__

OUT_ENV = "FFCC_OUT_DIR"
MODELS = ("ffcc", "ffcc-branched", "raussendorf")
CONSTRUCTIONS = ("bare", "chains", "branched", "star4", "hexagon6")
VALID = {
    ("ffcc", "bare"): "ffcc",
    ("ffcc-branched", "bare"): "ffcc_branched",
    ("raussendorf", "bare"): "raussendorf",
    ("ffcc", "chains"): "ffcc_chains",
    ("ffcc", "branched"): "ffcc_branched_net",
    ("ffcc-branched", "branched"): "ffcc_branched_net",
    ("raussendorf", "star4"): "star4",
    ("raussendorf", "hexagon6"): "hexagon6",
}
DEFAULT_GRID = "0.0025,0.005,0.01,0.02,0.04,0.08,0.16,0.3"


class UsageError(Exception):
    pass


def _floats(s: str) -> list[float]:
    try:
        return [float(t) for t in str(s).split(",") if t.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def _ints(s: str) -> list[int]:
    try:
        return [int(t) for t in str(s).split(",") if t.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def _length(s: str) -> float:
    return float("inf") if str(s).lower() in ("inf", "infinity") else float(int(s))


def _add_model(p):
    p.add_argument("--model", choices=MODELS, default="ffcc-branched")
    p.add_argument("--construction", choices=CONSTRUCTIONS, default="bare")
    p.add_argument("--length", type=_length, default=float("inf"), help="resource length for branched (inf or 4, 6, 8, 14)")


def _add_scan(p):
    _add_model(p)
    p.add_argument("--variant", choices=("iid", "weighted_iid", "fusion_phenomenological", "fusion_physical"))
    p.add_argument("--direction", type=_floats, action="append",
                   help="p0_erase,p0_err (repeatable; several directions trace a phase boundary)")
    p.add_argument("--sizes", type=_ints, default=[4, 8, 12])
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--grid", type=_floats, default=_floats(DEFAULT_GRID), help="coarse x grid")
    p.add_argument("--tol", type=float, default=0.01)
    p.add_argument("--max-bisect", type=int, default=6)
    p.add_argument("--orientation", choices=("time-like", "space-like"), default="time-like")
    p.add_argument("--p-fail", type=float, default=0.25)
    p.add_argument("--bias-mode", choices=("unbiased", "passive_alternating"), default="unbiased")
    p.add_argument("--bias-phase", type=int, default=0)


def make_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="ffcc", description=__doc__.splitlines()[0])
    top.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value file or JSON config echo")
    common.add_argument("--out", default=os.environ.get(OUT_ENV, "results"), help=f"output directory (env {OUT_ENV})")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    sub = top.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", parents=[common], help="write a lattice or fusion network as JSON")
    _add_model(b)
    b.add_argument("--L", type=int, default=2)
    b.add_argument("--T", type=int)

    t = sub.add_parser("threshold", parents=[common], help="threshold scan along one or more directions")
    _add_scan(t)

    s = sub.add_parser("sweep", parents=[common], help="raw logical-rate grid")
    _add_scan(s)

    bl = sub.add_parser("biased-loss", parents=[common], help="photon-loss thresholds with and without bias")
    _add_scan(bl)
    bl.add_argument("--bias-modes", default="unbiased,passive_alternating")

    e = sub.add_parser("emitter-noise", parents=[common], help="emitter error statistics")
    e.add_argument("--family", choices=("star", "chain", "branched"), default="chain")
    e.add_argument("--photons", type=int, default=20)
    e.add_argument("--p", type=float, default=0.005)
    e.add_argument("--samples", type=int, default=100_000)

    st = sub.add_parser("selftest", parents=[common], help="run the brute-force oracle suites")
    st.add_argument("--trials", type=int, default=200)
    return top


def _config_tokens(path: str, parser: argparse.ArgumentParser, command: str) -> list[str]:
    text = Path(path).read_text()
    try:
        items = json.loads(text)
        items = items.get("config", items)
    except json.JSONDecodeError:
        items = {}
        for ln in text.splitlines():
            ln = ln.split("#", 1)[0].strip()
            if not ln:
                continue
            if "=" not in ln:
                raise UsageError(f"config line without '=': {ln!r}")
            k, v = ln.split("=", 1)
            items[k.strip()] = v.strip()
    tokens = []
    for k, v in items.items():
        if k in ("command", "config", "version"):
            continue
        flag = "--" + k.replace("_", "-")
        if isinstance(v, list) and v and isinstance(v[0], list):
            for d in v:
                tokens += [flag, ",".join(map(str, d))]
        elif isinstance(v, list):
            tokens += [flag, ",".join(map(str, v))]
        elif v is None:
            continue
        else:
            tokens += [flag, str(v)]
    return tokens


def parse(argv) -> argparse.Namespace:
    parser = make_parser()
    args = parser.parse_args(argv)
    if args.config:
        try:
            tokens = _config_tokens(args.config, parser, args.command)
        except OSError as e:
            parser.error(f"cannot read config: {e}")
        except UsageError as e:
            parser.error(str(e))
        # config first so explicit flags win
        i = argv.index(args.command)
        args = parser.parse_args(list(argv[: i + 1]) + tokens + list(argv[i + 1:]))
    if hasattr(args, "construction"):
        key = (args.model, args.construction)
        if key not in VALID:
            parser.error(f"model {args.model} cannot be combined with construction {args.construction}")
        args.kind = VALID[key]
        if args.kind == "ffcc_branched_net" and np.isfinite(args.length) and args.length not in (4, 6, 8, 14):
            parser.error("finite branched length must be one of 4, 6, 8, 14")
    if hasattr(args, "variant"):
        net = args.kind not in ("ffcc", "ffcc_branched", "raussendorf")
        if args.variant is None:
            args.variant = "fusion_phenomenological" if net else "iid"
        if net != args.variant.startswith("fusion"):
            parser.error(f"noise variant {args.variant} does not apply to {args.kind}")
        if args.direction is None:
            args.direction = [[0.0, 1.0]]
        for d in args.direction:
            if len(d) != 2 or d[0] < 0 or d[1] < 0:
                parser.error("direction must be two nonnegative numbers p0_erase,p0_err")
        if len(args.sizes) < 2 or any(b <= a for a, b in zip(args.sizes, args.sizes[1:])):
            parser.error("sizes must be strictly increasing with at least two entries")
        if args.samples < 1:
            parser.error("samples must be >= 1")
    if args.command == "biased-loss":
        if not 0 < args.p_fail < 1:
            parser.error("biased-loss needs 0 < p-fail < 1 (boosted fusion)")
        args.variant = "fusion_physical"
        if args.kind not in ("ffcc_branched_net", "ffcc_chains", "star4", "hexagon6"):
            parser.error("biased-loss needs a fusion network construction")
    if args.threads < 1:
        parser.error("threads must be >= 1")
    return args


def _echo(args) -> dict:
    d = {k: v for k, v in vars(args).items() if k not in ("config", "kind")}
    for k, v in d.items():
        if isinstance(v, float) and not np.isfinite(v):
            d[k] = "inf"
    return d


def _write(out: Path, name: str, text: str):
    out.mkdir(parents=True, exist_ok=True)
    (out / name).write_text(text)
    return out / name


def _spec(args, bias_mode=None):
    from .mc import ModelSpec

    return ModelSpec(args.kind, length=args.length, orientation=args.orientation,
                     bias_mode=bias_mode or args.bias_mode, bias_phase=args.bias_phase)


def _scan_cfg(args, direction):
    from .mc import ScanConfig

    return ScanConfig(tuple(direction), tuple(args.sizes), args.samples, tuple(args.grid), args.tol,
                      args.max_bisect, args.seed, args.variant, args.p_fail)


def _log(msg):
    print(msg, file=sys.stderr, flush=True)


def cmd_build(args):
    from .fusion import build_baseline_network, decompose_branched, decompose_chains, dump_network
    from .lattice import build_lattice, build_raussendorf, dump_lattice

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    kind = args.kind
    if kind in ("ffcc", "ffcc_branched", "raussendorf"):
        f = build_lattice(kind, args.L, args.T)
        path = out / f"{kind}_L{f.L}_T{f.T}.json"
        dump_lattice(f, path)
        counts = {k: int(v) for k, v in zip(*np.unique(f.node_kind, return_counts=True))}
        print(json.dumps({"model": kind, "L": f.L, "T": f.T, "nodes": f.n_nodes, "edges": len(f.edges),
                          "node_kinds": counts, "file": str(path)}))
        return
    if kind in ("star4", "hexagon6"):
        n = build_baseline_network(build_raussendorf(args.L, args.T or args.L), kind)
    else:
        f = build_lattice("ffcc", args.L, args.T)
        n = decompose_chains(f) if kind == "ffcc_chains" else decompose_branched(f, args.length)
    path = out / f"{kind}_L{n.L}_T{n.T}.json"
    dump_network(n, path)
    print(json.dumps({"model": kind, "L": n.L, "T": n.T, "fusions": n.n_fusions, "outcomes": n.n_outcomes,
                      "resources": len(n.resources()), "file": str(path)}))


def cmd_threshold(args):
    from .mc import curves_csv, find_threshold, phase_boundary, summary_json

    spec = _spec(args)
    base = _scan_cfg(args, args.direction[0])
    if len(args.direction) > 1:
        res = phase_boundary(args.direction, base, spec, args.threads, _log)
    else:
        res = [find_threshold(base, spec, args.threads, _log)]
    out = Path(args.out)
    _write(out, "curves.csv", curves_csv(res))
    _write(out, "summary.json", summary_json(res, _echo(args)))
    for r in res:
        print(json.dumps(r.to_json()))


def cmd_sweep(args):
    from .mc import (CSV_COLUMNS, Model, SCHEMA_VERSION, logical_rate)

    spec = _spec(args)
    rows = []
    for d in args.direction:
        base = _scan_cfg(args, d).noise()
        for L in args.sizes:
            m = Model.build(spec, L)
            for x in args.grid:
                r, (lo, hi) = logical_rate(m, base.scaled(x), args.samples, args.seed, args.threads)
                rows.append([spec.label(), repr(float(d[0])), repr(float(d[1])), L, f"{x:.10g}",
                             f"{r:.10g}", f"{lo:.10g}", f"{hi:.10g}"])
                _log(f"{spec.label()} L={L} x={x:.5g} rate={r:.4f}")
    text = ",".join(CSV_COLUMNS) + "\n" + "".join(",".join(map(str, r)) + "\n" for r in rows)
    out = Path(args.out)
    _write(out, "sweep.csv", text)
    _write(out, "sweep.json", json.dumps({"schema_version": SCHEMA_VERSION, "config": _echo(args),
                                          "rows": len(rows)}, indent=2, sort_keys=True))
    print(f"{len(rows)} points written to {out / 'sweep.csv'}")


def cmd_biased_loss(args):
    from .mc import curves_csv, find_threshold, summary_json

    res = []
    for mode in args.bias_modes.split(","):
        cfg = _scan_cfg(args, (1.0, 0.0))
        res.append(find_threshold(cfg, _spec(args, mode), args.threads, _log))
    out = Path(args.out)
    _write(out, "curves.csv", curves_csv(res))
    _write(out, "summary.json", summary_json(res, _echo(args)))
    for r in res:
        print(json.dumps(r.to_json()))


def cmd_emitter_noise(args):
    from .emitter import error_stats

    if args.samples < 1000:
        raise UsageError("samples must be >= 1000")
    t0 = time.time()
    s = error_stats(args.family, args.photons, args.p, args.samples, args.seed)
    out = Path(args.out)
    for kind, M in (("X", s.corrX), ("Z", s.corrZ)):
        _write(out, f"corr_{kind}.csv", "\n".join(",".join(f"{v:.6g}" for v in row) for row in M) + "\n")
    summary = {"schema_version": 1, "config": _echo(args), "pX": s.pX.tolist(), "pZ": s.pZ.tolist(),
               "distant_pairs_X": s.distant_pairs("X"), "distant_pairs_Z": s.distant_pairs("Z"),
               "seconds": round(time.time() - t0, 3)}
    _write(out, "emitter.json", json.dumps(summary, indent=2))
    print(json.dumps({k: summary[k] for k in ("distant_pairs_X", "distant_pairs_Z", "seconds")}))


def cmd_selftest(args):
    from .selftest import run_all

    ok = run_all(args.trials, args.seed, print)
    if not ok:
        raise RuntimeError("selftest failed")


COMMANDS = {"build": cmd_build, "threshold": cmd_threshold, "sweep": cmd_sweep,
            "biased-loss": cmd_biased_loss, "emitter-noise": cmd_emitter_noise, "selftest": cmd_selftest}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parse(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        COMMANDS[args.command](args)
    except UsageError as e:
        print(f"ffcc: error: {e}", file=sys.stderr)
        return 2
    except Exception as e:  # noqa: BLE001 - report and map to the runtime exit code
        print(f"ffcc: {type(e).__name__}: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
