"""Monte-Carlo estimation of logical error rates and thresholds along linear scans."""

from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import lru_cache

import numpy as np
from scipy.stats import binomtest

from .code import CheckCode
from .decode import Decoder, repairable
from .noise import NoiseParams, sample_fusion_noise, shot_rng, weighted_probs

SCHEMA_VERSION = 1
CSV_COLUMNS = ["model", "direction_erase", "direction_err", "L", "x", "rate", "ci_lo", "ci_hi"]

LATTICE_MODELS = ("ffcc", "ffcc_branched", "raussendorf")
NETWORK_MODELS = ("ffcc_chains", "ffcc_branched_net", "star4", "hexagon6")


@dataclass(frozen=True)
class ModelSpec:
    """A lattice or fusion network family, instantiated per size L.

    ``name`` is a lattice (noise acts on qubit outcomes) or a fusion network
    (noise acts on fusions). ``length`` applies to ffcc_branched_net.
    """

    name: str
    length: float = np.inf
    orientation: str = "time-like"
    normal: int | None = None
    bias_mode: str = "unbiased"
    bias_phase: int = 0

    def __post_init__(self):
        if self.name not in LATTICE_MODELS + NETWORK_MODELS:
            raise ValueError(f"unknown model {self.name!r}")

    @property
    def is_network(self) -> bool:
        return self.name in NETWORK_MODELS

    def T(self, L: int) -> int:
        return L if self.name in ("raussendorf", "star4", "hexagon6") else 3 * L

    def label(self) -> str:
        s = self.name
        if self.name == "ffcc_branched_net":
            s += "_inf" if not np.isfinite(self.length) else f"_l{int(self.length)}"
        if self.bias_mode != "unbiased":
            s += "_" + self.bias_mode
        return s + ("_space" if self.orientation == "space-like" else "")


@lru_cache(maxsize=32)
def _instance(spec: ModelSpec, L: int):
    from .fusion import assign_bias, build_baseline_network, decompose_branched, decompose_chains
    from .lattice import build_lattice, build_raussendorf, lattice_code

    T = spec.T(L)
    if not spec.is_network:
        f = build_lattice(spec.name, L, T)
        return f, lattice_code(f)
    if spec.name in ("star4", "hexagon6"):
        n = build_baseline_network(build_raussendorf(L, T), spec.name)
    else:
        f = build_lattice("ffcc", L, T)
        n = decompose_chains(f) if spec.name == "ffcc_chains" else decompose_branched(f, spec.length)
    n = assign_bias(n, spec.bias_mode, spec.bias_phase) if spec.bias_mode != "unbiased" else n
    return n, n.code()


@dataclass
class Model:
    """A built instance: code, decoder, and the matching noise sampler."""

    spec: ModelSpec
    L: int
    obj: object = field(repr=False)
    code: CheckCode = field(repr=False)
    decoder: Decoder = field(repr=False)

    @classmethod
    def build(cls, spec: ModelSpec, L: int) -> "Model":
        obj, code = _instance(spec, L)
        return cls(spec, L, obj, code, _decoder(spec, L))

    def sample_edges(self, noise: NoiseParams, seed: int, shot: int):
        """(flips, erased) restricted to the decoder's edges for one shot."""
        rng = shot_rng(seed, shot)
        edges = self.decoder.edge_outcomes
        if noise.variant in ("fusion_phenomenological", "fusion_physical"):
            s = sample_fusion_noise(self.obj, noise, rng, self.code.outcome_class)
            return s.flipped[edges], s.erased[edges]
        n = self.code.n_outcomes
        if noise.variant == "weighted_iid":
            val = self.valency()
            pe, pf = weighted_probs(val, noise.p_erase), weighted_probs(val, noise.p_err)
        else:
            pe, pf = np.full(n, noise.p_erase), np.full(n, noise.p_err)
        er = rng.random(n) < pe
        fl = (rng.random(n) < pf) & ~er
        return fl[edges], er[edges]

    def valency(self) -> np.ndarray:
        if self.spec.is_network:
            raise ValueError("valency weighting applies to bare lattices")
        return self.obj.valency()


@lru_cache(maxsize=32)
def _decoder(spec: ModelSpec, L: int) -> Decoder:
    _, code = _instance(spec, L)
    return Decoder(code, "primal", spec.orientation, spec.normal)


def _check_noise(spec: ModelSpec, noise: NoiseParams):
    if spec.is_network != noise.variant.startswith("fusion"):
        raise ValueError(f"noise variant {noise.variant} does not apply to model {spec.name}")


def _no_flips(noise: NoiseParams) -> bool:
    return noise.p_err == 0


def _no_erasure(noise: NoiseParams) -> bool:
    if noise.variant == "fusion_physical":
        return False
    return noise.p_erase == 0


def count_failures(model: Model, noise: NoiseParams, shots: range, seed: int, chunk: int = 500) -> int:
    dec = model.decoder
    fails = 0
    if _no_flips(noise) and _no_erasure(noise):
        return 0
    if _no_erasure(noise):
        for start in range(shots.start, shots.stop, chunk):
            block = range(start, min(start + chunk, shots.stop))
            flips = np.array([model.sample_edges(noise, seed, s)[0] for s in block], np.uint8)
            fails += int(dec.fail_no_erasure(flips).sum())
        return fails
    for s in shots:
        fl, er = model.sample_edges(noise, seed, s)
        if _no_flips(noise):
            # without flips the residual vanishes: failure iff no repaired surface exists
            fails += not repairable(dec.graph, dec.surface_edges, er)
        else:
            fails += dec.fail_one(fl, er)
    return fails


def wilson(k: int, n: int, level: float = 0.95) -> tuple[float, float]:
    ci = binomtest(k, n).proportion_ci(confidence_level=level, method="wilson")
    return float(ci.low), float(ci.high)


def _point_seed(seed: int, L: int) -> int:
    # shots at a given size share a stream across x (common random numbers)
    return int(np.random.SeedSequence([seed, L]).generate_state(1)[0])


def logical_rate(model: Model, noise: NoiseParams, n: int, seed: int, threads: int = 1):
    """(rate, (ci_lo, ci_hi)) from n shots; the shot set is fixed by (seed, L)."""
    _check_noise(model.spec, noise)
    s = _point_seed(seed, model.L)
    if threads <= 1:
        k = count_failures(model, noise, range(n), s)
    else:
        bounds = np.linspace(0, n, threads + 1).astype(int)
        with ThreadPoolExecutor(threads) as ex:
            k = sum(ex.map(lambda ab: count_failures(model, noise, range(ab[0], ab[1]), s),
                           zip(bounds[:-1], bounds[1:])))
    return k / n, wilson(k, n)


# threshold search --------------------------------------------------------------


@dataclass(frozen=True)
class ScanConfig:
    direction: tuple[float, float]  # (p0_erase, p0_err); p0_erase is the loss for fusion_physical
    sizes: tuple[int, ...] = (4, 8, 12)
    samples: int = 10_000
    x_grid: tuple[float, ...] = tuple(np.linspace(0.2, 2.0, 7))
    tol: float = 0.01  # relative bisection tolerance on x
    max_bisect: int = 6
    seed: int = 0
    variant: str = "iid"
    p_fail: float = 0.25

    def __post_init__(self):
        if len(self.sizes) < 2 or any(b <= a for a, b in zip(self.sizes, self.sizes[1:])):
            raise ValueError("sizes must be strictly increasing with at least two entries")

    def noise(self) -> NoiseParams:
        pe, pr = self.direction
        if self.variant == "fusion_physical":
            return NoiseParams("fusion_physical", 0.0, pr, self.p_fail, pe, seed=self.seed)
        return NoiseParams(self.variant, pe, pr, seed=self.seed)


@dataclass
class CurvePoint:
    L: int
    x: float
    rate: float
    ci_lo: float
    ci_hi: float


@dataclass
class ThresholdResult:
    model: str
    direction: tuple[float, float]
    found: bool
    x_threshold: float | None = None
    ci: tuple[float, float] | None = None
    pair_crossings: list = field(default_factory=list)
    curves: list[CurvePoint] = field(default_factory=list)

    @property
    def p_threshold(self):
        if not self.found:
            return None
        return (self.x_threshold * self.direction[0], self.x_threshold * self.direction[1])

    def to_json(self) -> dict:
        d = {"schema_version": SCHEMA_VERSION, "model": self.model, "direction": list(self.direction),
             "found": self.found}
        if self.found:
            d.update(x_threshold=self.x_threshold, ci=list(self.ci), p_threshold=list(self.p_threshold),
                     pair_crossings=self.pair_crossings)
        else:
            d["reason"] = "no crossing of the logical-rate curves in the scanned range"
        return d


def _crossing(xs, ra, rb, shift=0.0):
    """First x where rb - ra + shift changes sign from negative to nonnegative (linear interpolation)."""
    d = np.asarray(rb) - np.asarray(ra) + shift
    for i in range(len(xs) - 1):
        if d[i] < 0 <= d[i + 1]:
            t = -d[i] / (d[i + 1] - d[i])
            return float(xs[i] + t * (xs[i + 1] - xs[i]))
    return None


def find_threshold(cfg: ScanConfig, spec: ModelSpec, threads: int = 1, log=None) -> ThresholdResult:
    """Coarse grid, then bisection on the sign of rate(L_max) - rate(L_min)."""
    base = cfg.noise()
    if cfg.direction[0] == 0 and cfg.direction[1] == 0:
        raise ValueError("direction must be nonzero")
    models = {L: Model.build(spec, L) for L in cfg.sizes}
    data: dict[tuple[int, float], CurvePoint] = {}

    def evaluate(x):
        x = float(x)
        for L in cfg.sizes:
            if (L, x) not in data:
                r, (lo, hi) = logical_rate(models[L], base.scaled(x), cfg.samples, cfg.seed, threads)
                data[(L, x)] = CurvePoint(L, x, r, lo, hi)
                if log:
                    log(f"{spec.label()} L={L} x={x:.5g} rate={r:.4f}")
        return data[(cfg.sizes[0], x)], data[(cfg.sizes[-1], x)]

    Lmin, Lmax = cfg.sizes[0], cfg.sizes[-1]
    grid = sorted(float(x) for x in cfg.x_grid)
    diffs = []
    for x in grid:
        a, b = evaluate(x)
        diffs.append(b.rate - a.rate)
    lo = hi = None
    for i in range(len(grid) - 1):
        if diffs[i] < 0 <= diffs[i + 1]:
            lo, hi = grid[i], grid[i + 1]
            break
    curves = sorted(data.values(), key=lambda p: (p.L, p.x))
    if lo is None:
        return ThresholdResult(spec.label(), cfg.direction, False, curves=curves)
    for _ in range(cfg.max_bisect):
        if (hi - lo) <= cfg.tol * hi:
            break
        mid = 0.5 * (lo + hi)
        a, b = evaluate(mid)
        if b.rate - a.rate < 0:
            lo = mid
        else:
            hi = mid
        if not (b.ci_hi < a.ci_lo or a.ci_hi < b.ci_lo):
            # the extreme sizes are statistically indistinguishable here
            break
    xs = sorted({x for (_, x) in data})
    crossings, bounds = [], [lo, hi]
    for La, Lb in zip(cfg.sizes, cfg.sizes[1:]):
        pa = [data[(La, x)] for x in xs]
        pb = [data[(Lb, x)] for x in xs]
        ra, rb = [p.rate for p in pa], [p.rate for p in pb]
        c = _crossing(xs, ra, rb)
        if c is None:
            continue
        crossings.append({"L_pair": [La, Lb], "x": c})
        # band where the two curves are statistically indistinguishable (combined Wilson half-widths)
        band = np.hypot([(p.ci_hi - p.ci_lo) / 2 for p in pa], [(p.ci_hi - p.ci_lo) / 2 for p in pb])
        for shift in (band, -band):
            b = _crossing(xs, ra, rb, shift)
            bounds.append(c if b is None else b)
    cvals = [c["x"] for c in crossings] or [0.5 * (lo + hi)]
    xt = float(np.mean(cvals))
    ci = (float(min(bounds + cvals)), float(max(bounds + cvals)))
    curves = sorted(data.values(), key=lambda p: (p.L, p.x))
    return ThresholdResult(spec.label(), cfg.direction, True, xt, ci, crossings, curves)


def phase_boundary(directions, cfg: ScanConfig, spec: ModelSpec, threads: int = 1, log=None):
    if len(directions) < 2:
        raise ValueError("need at least two directions")
    out = []
    for d in directions:
        c = ScanConfig(**{**asdict(cfg), "direction": tuple(d)})
        out.append(find_threshold(c, spec, threads, log))
    return out


# output ----------------------------------------------------------------------


def curves_csv(results: list[ThresholdResult]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in results:
        for p in r.curves:
            w.writerow([r.model, repr(float(r.direction[0])), repr(float(r.direction[1])), p.L,
                        f"{p.x:.10g}", f"{p.rate:.10g}", f"{p.ci_lo:.10g}", f"{p.ci_hi:.10g}"])
    return buf.getvalue()


def summary_json(results: list[ThresholdResult], config: dict) -> str:
    return json.dumps({"schema_version": SCHEMA_VERSION, "config": config,
                       "thresholds": [r.to_json() for r in results]}, indent=2, sort_keys=True)
