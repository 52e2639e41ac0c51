"""Error models: IID, valency-weighted IID, and fusion noise.

Every sampler is keyed by (seed, shot): shot ``i`` of a run draws from
``numpy.random.default_rng([seed, i])``, so any worker can reproduce any shot
without shared state, and outcome ``j`` always consumes the ``j``-th variate of
its stream.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

VARIANTS = ("iid", "weighted_iid", "fusion_phenomenological", "fusion_physical")


@dataclass(frozen=True)
class NoiseParams:
    variant: str = "iid"
    p_erase: float = 0.0
    p_err: float = 0.0
    p_fail: float = 0.0
    loss: float = 0.0
    bias_mode: str = "unbiased"
    seed: int = 0

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown noise variant {self.variant!r}")
        for name in ("p_erase", "p_err", "p_fail", "loss"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.variant == "fusion_physical" and self.p_fail <= 0:
            raise ValueError("fusion_physical requires p_fail > 0")

    def scaled(self, x: float) -> "NoiseParams":
        """Point x along the linear scan through this direction."""
        d = asdict(self)
        if self.variant == "fusion_physical":
            d["loss"] = min(1.0, x * self.loss)
        else:
            d["p_erase"] = min(1.0, x * self.p_erase)
        d["p_err"] = min(1.0, x * self.p_err)
        return NoiseParams(**d)


@dataclass
class ErrorSample:
    erased: np.ndarray  # bool per outcome
    flipped: np.ndarray  # bool per outcome

    @property
    def erased_ids(self) -> np.ndarray:
        return np.flatnonzero(self.erased)

    @property
    def flipped_ids(self) -> np.ndarray:
        return np.flatnonzero(self.flipped & ~self.erased)


def shot_rng(seed: int, shot: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), int(shot)])


def _bernoulli(rng, p, n):
    u = rng.random(n)
    return u < p


def sample_iid(n_outcomes: int, p: NoiseParams, rng: np.random.Generator) -> ErrorSample:
    return sample_independent(np.full(n_outcomes, p.p_erase), np.full(n_outcomes, p.p_err), rng)


def sample_independent(p_erase: np.ndarray, p_err: np.ndarray, rng) -> ErrorSample:
    n = len(p_erase)
    erased = _bernoulli(rng, p_erase, n)
    flipped = _bernoulli(rng, p_err, n)
    return ErrorSample(erased, flipped & ~erased)


def weighted_probs(valency: np.ndarray, p: float) -> np.ndarray:
    return np.minimum(1.0, np.asarray(valency, float) * p)


def sample_weighted_iid(valency: np.ndarray, p: NoiseParams, rng) -> ErrorSample:
    """Per-qubit probabilities multiplied by the qubit's valency (capped at 1)."""
    return sample_independent(weighted_probs(valency, p.p_erase), weighted_probs(valency, p.p_err), rng)


def fusion_erasure_probs(p_fail: float, loss: float, bias_tag: str = "none") -> tuple[float, float]:
    """Marginal erasure probabilities (XX, ZZ) of a fusion with failure and photon loss.

    A boosted fusion of failure rate p_fail involves 1/p_fail photons, all of
    which survive with probability eta^(1/p_fail), eta = 1 - loss. For biased
    fusions the first entry is the outcome the bias sacrifices on failure.
    """
    if p_fail <= 0:
        if loss > 0:
            raise ValueError("p_fail = 0 with loss > 0 is singular")
        return 0.0, 0.0
    if not 0 < p_fail <= 1 or not 0 <= loss < 1:
        raise ValueError("need 0 < p_fail <= 1 and 0 <= loss < 1")
    survive = (1.0 - loss) ** (1.0 / p_fail)
    if bias_tag == "none":
        q = 1.0 - (1.0 - p_fail / 2) * survive
        return q, q
    return 1.0 - (1.0 - p_fail) * survive, 1.0 - survive


def sample_fusion_noise(network, p: NoiseParams, rng, classes: np.ndarray | None = None) -> ErrorSample:
    """Outcome-level sample for a fusion network.

    Phenomenological: a fusion loses both outcomes with probability p_erase.
    Physical: photon loss erases both outcomes; otherwise failure erases the
    outcome its bias tag sacrifices (a uniformly random one when unbiased).
    Noisy single-qubit outcomes are erased with p_erase (phenomenological) or
    with the photon survival probability (physical). Flips are independent.
    """
    fus = network.outcome_fusion
    sing = network.outcome_single
    n_out = len(fus)
    n_f = network.n_fusions
    u_f = rng.random((n_f, 2))
    flips = rng.random(n_out) < p.p_err
    erased = np.zeros(n_out, bool)
    is_f = fus >= 0
    if p.variant == "fusion_phenomenological":
        lost = u_f[:, 0] < p.p_erase
        erased[is_f] = lost[fus[is_f]]
        u_s = rng.random(n_out)
        erased[~is_f] = u_s[~is_f] < p.p_erase
    elif p.variant == "fusion_physical":
        survive = (1.0 - p.loss) ** (1.0 / p.p_fail)
        lost = u_f[:, 0] >= survive
        failed = ~lost & (u_f[:, 1] < p.p_fail)
        if classes is None:
            classes = network.outcome_classes()
        victim = _failure_victims(network, classes, rng)
        # outcome o of fusion f is erased on loss, or on failure when it is the victim
        erased[is_f] = lost[fus[is_f]] | (failed[fus[is_f]] & victim[is_f])
        u_s = rng.random(n_out)
        erased[~is_f] = u_s[~is_f] >= survive
    else:
        raise ValueError("sample_fusion_noise needs a fusion noise variant")
    return ErrorSample(erased, flips & ~erased)


def _failure_victims(network, classes, rng) -> np.ndarray:
    """Per outcome: True if a failure of its fusion erases it."""
    fus = network.outcome_fusion
    n_out = len(fus)
    tags = network.bias if network.bias is not None else np.zeros(network.n_fusions, np.int64)
    coin = rng.random(network.n_fusions) < 0.5  # unbiased: which outcome is lost
    victim = np.zeros(n_out, bool)
    is_f = fus >= 0
    f = fus[is_f]
    cls = classes[is_f]
    t = tags[f]
    # primal-biased (tag 1) sacrifices the dual outcome, dual-biased (tag 2) the primal one
    v = np.where(t == 1, cls == 1, np.where(t == 2, cls == 0, coin[f] == (cls == 0)))
    victim[is_f] = v
    return victim
