"""Approximate inference by sampling total choices.

Three samplers produce total choices:

* ``naive`` draws every fact independently from its probability;
* ``mh`` is a Metropolis chain whose proposal flips each fact with
  probability ``p_change`` and is accepted with ``min(1, Prob(new)/Prob(old))``;
* ``gibbs`` redraws a block of ``block_size`` facts per step from their
  marginals (facts are independent, so conditionals equal marginals).

Every sample is solved and tallied per query with weight 1. A sample is not
counted for a query when that query's evidence fails in every answer set.
Bounds use the same formula as exact inference over the integer tallies, and
sampling stops once both bounds of every query have uncertainty
``2 * perc * sqrt(p (1 - p) / N)`` below the threshold (bounds at 0 or 1 need
``min_sample`` counted samples instead) or ``max_sample`` samples were drawn.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .credal import BoundEstimate, CredalCounters, Problem, credal_bounds
from .errors import ZeroEvidenceError
from .seeding import derive_worker_seed, make_rng
from .translate import PlpProgram

METHODS = ("naive", "mh", "gibbs")
GIBBS_SCANS = ("cyclic", "random")


@dataclass(frozen=True)
class SamplerConfig:
    method: str = "naive"
    p_change: float = 0.3
    block_size: int = 1
    burn: int = 100
    threshold: float | None = 0.01
    percentile: float = 1.96
    min_sample: int = 1000
    max_sample: int = 100_000
    seed: int = 0
    check_interval: int = 1000
    gibbs_scan: str = "cyclic"

    def validate(self, n_facts: int | None = None) -> None:
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, not {self.method!r}")
        if not 0.0 < self.p_change <= 1.0:
            raise ValueError("p_change must lie in (0, 1]")
        if self.block_size < 1:
            raise ValueError("block_size must be >= 1")
        if n_facts is not None and n_facts > 0 and self.block_size > n_facts:
            raise ValueError(f"block_size {self.block_size} exceeds {n_facts} facts")
        if self.burn < 0:
            raise ValueError("burn must be >= 0")
        if self.threshold is not None and self.threshold <= 0:
            raise ValueError("threshold must be > 0")
        if self.percentile <= 0:
            raise ValueError("percentile must be > 0")
        if not 1 <= self.min_sample <= self.max_sample:
            raise ValueError("need 1 <= min_sample <= max_sample")
        if self.check_interval < 1:
            raise ValueError("check_interval must be >= 1")
        if self.gibbs_scan not in GIBBS_SCANS:
            raise ValueError(f"gibbs_scan must be one of {GIBBS_SCANS}")


# ------------------------------------------------------------------ single steps


def naive_sample(rng: np.random.Generator, probabilities) -> np.ndarray:
    probs = np.asarray(probabilities, float)
    return (rng.random(probs.shape[0]) < probs).astype(np.uint8)


def _log_weights(probs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    with np.errstate(divide="ignore"):
        return np.log(probs), np.log1p(-probs)


def _mh_block(rng, state, log_p, log_q, p_change, steps):
    n = state.shape[0]
    u = rng.random((steps, n + 1))
    with np.errstate(divide="ignore"):
        log_acc = np.log(u[:, n])
    flip_u = np.ascontiguousarray(u[:, :n])
    return kernels.mh_chain(state, log_p, log_q, flip_u, log_acc, p_change)


def _gibbs_indices(rng, n, bk, steps, cursor, scan):
    if scan == "random":
        return np.argsort(rng.random((steps, n)), axis=1)[:, :bk].astype(np.int64)
    offs = cursor + np.arange(steps, dtype=np.int64)[:, None] * bk + np.arange(bk)[None, :]
    return offs % n


def mh_step(rng: np.random.Generator, current, probabilities, p_change: float = 0.3) -> np.ndarray:
    probs = np.asarray(probabilities, float)
    log_p, log_q = _log_weights(probs)
    out, _, _ = _mh_block(rng, np.asarray(current, np.uint8), log_p, log_q, p_change, 1)
    return out[0]


def gibbs_step(rng: np.random.Generator, current, probabilities, block_size: int = 1,
               cursor: int = 0, scan: str = "cyclic") -> np.ndarray:
    probs = np.asarray(probabilities, float)
    idx = _gibbs_indices(rng, probs.shape[0], block_size, 1, cursor, scan)
    u = rng.random(idx.shape)
    out, _ = kernels.gibbs_chain(np.asarray(current, np.uint8), probs, idx, u)
    return out[0]


def uncertainty(p: float, n: int, percentile: float = 1.96) -> float:
    """Half-width-style uncertainty ``2 * perc * sqrt(p (1 - p) / N)`` of a Bernoulli estimate."""
    if n < 1:
        raise ValueError("N must be >= 1")
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return 2.0 * percentile * math.sqrt(p * (1.0 - p)) / math.sqrt(n)


# ----------------------------------------------------------------------- chains


class Chain:
    """A stream of total choices for one worker.

    MCMC chains start from a fair-coin state and discard ``burn`` steps before
    the first draw.
    """

    def __init__(self, probabilities, config: SamplerConfig, seed: int):
        self.probs = np.asarray(probabilities, float)
        self.n = self.probs.shape[0]
        self.config = config
        self.rng = make_rng(seed)
        self.log_p, self.log_q = _log_weights(self.probs)
        self.state = np.zeros(self.n, np.uint8)
        self.cursor = 0
        self.accepted = 0
        self.steps = 0
        self._burned = config.method == "naive"
        if config.method != "naive":
            self.state = (self.rng.random(self.n) < 0.5).astype(np.uint8)

    def _advance(self, k: int) -> np.ndarray:
        cfg = self.config
        if k == 0 or self.n == 0:
            return np.zeros((k, self.n), np.uint8)
        if cfg.method == "naive":
            return (self.rng.random((k, self.n)) < self.probs).astype(np.uint8)
        if cfg.method == "mh":
            out, self.state, acc = _mh_block(self.rng, self.state, self.log_p, self.log_q,
                                             cfg.p_change, k)
            self.accepted += int(acc)
        else:
            idx = _gibbs_indices(self.rng, self.n, cfg.block_size, k, self.cursor, cfg.gibbs_scan)
            u = self.rng.random(idx.shape)
            out, self.state = kernels.gibbs_chain(self.state, self.probs, idx, u)
            self.cursor = (self.cursor + k * cfg.block_size) % self.n
        self.steps += k
        return out

    def draw(self, k: int) -> np.ndarray:
        if not self._burned:
            self._advance(self.config.burn)
            self._burned = True
            self.steps = 0
            self.accepted = 0
        return self._advance(k)


# ---------------------------------------------------------------------- tallies


@dataclass(frozen=True)
class QueryTally:
    a: int
    b: int
    c: int
    d: int
    counted: int

    def bounds(self, percentile: float = 1.96) -> BoundEstimate:
        if self.counted == 0:
            raise ZeroEvidenceError()
        n = self.counted
        est = credal_bounds(CredalCounters(self.a / n, self.b / n, self.c / n, self.d / n))
        return BoundEstimate(
            est.lower, est.upper, n,
            uncertainty(est.lower, n, percentile), uncertainty(est.upper, n, percentile),
        )


def tally_flags(flags: np.ndarray) -> np.ndarray:
    """``(n_queries, 5)`` integer tallies ``a, b, c, d, counted`` of a flag batch."""
    counted = flags[:, :, 1] | flags[:, :, 3]
    sums = flags.sum(axis=0, dtype=np.int64)
    return np.concatenate([sums, counted.sum(axis=0, dtype=np.int64)[:, None]], axis=1)


@dataclass(frozen=True)
class StopDecision:
    stop: bool
    reason: str = "continue"


def should_stop(tallies: list[QueryTally], bounds: list[BoundEstimate | None],
                config: SamplerConfig, total_drawn: int) -> StopDecision:
    if total_drawn >= config.max_sample:
        return StopDecision(True, "max_samples")
    if config.threshold is None:
        return StopDecision(False)
    for tally, est in zip(tallies, bounds):
        if est is None:
            return StopDecision(False)
        for p, u in ((est.lower, est.uncertainty_lower), (est.upper, est.uncertainty_upper)):
            if u >= config.threshold:
                return StopDecision(False)
            if (p == 0.0 or p == 1.0) and tally.counted < config.min_sample:
                return StopDecision(False)
    return StopDecision(True, "threshold")


@dataclass(frozen=True)
class Checkpoint:
    total_drawn: int
    bounds: tuple[BoundEstimate | None, ...]


@dataclass
class ApproxResult:
    bounds: list[BoundEstimate]
    tallies: list[QueryTally]
    total_drawn: int
    worker_counts: list[int]
    stop_reason: str
    checkpoints: list[Checkpoint] = field(default_factory=list)
    acceptance_rate: float | None = None


def _split(total: int, parts: int) -> list[int]:
    base, extra = divmod(total, parts)
    return [base + (1 if i < extra else 0) for i in range(parts)]


def approximate_inference(problem: Problem | PlpProgram, config: SamplerConfig,
                          workers: int = 1) -> ApproxResult:
    """Sample until :func:`should_stop` fires.

    Each worker owns a chain seeded with ``derive_worker_seed(config.seed, i)``.
    Every round draws ``check_interval`` samples per worker (fewer in the last
    round, so the total never exceeds ``max_sample``), merges the integer
    tallies in worker order and checks the stopping rule.
    """
    if isinstance(problem, PlpProgram):
        problem = Problem.from_plp(problem)
    config.validate(problem.n_facts)
    workers = max(1, int(workers))
    chains = [Chain(problem.probabilities, config, derive_worker_seed(config.seed, i))
              for i in range(workers)]
    nq = len(problem.queries)
    totals = np.zeros((nq, 5), np.int64)
    per_worker = [0] * workers
    drawn = 0
    checkpoints: list[Checkpoint] = []

    def job(i: int, k: int) -> np.ndarray:
        if k == 0:
            return np.zeros((nq, 5), np.int64)
        return tally_flags(problem.evaluate_checked(chains[i].draw(k)))

    pool = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        while True:
            shares = _split(min(config.check_interval * workers, config.max_sample - drawn),
                            workers)
            if pool is None:
                parts = [job(0, shares[0])]
            else:
                parts = list(pool.map(job, range(workers), shares))
            for i, part in enumerate(parts):
                totals += part
                per_worker[i] += shares[i]
            drawn += sum(shares)
            tallies = [QueryTally(*map(int, row)) for row in totals]
            bounds = [t.bounds(config.percentile) if t.counted else None for t in tallies]
            checkpoints.append(Checkpoint(drawn, tuple(bounds)))
            decision = should_stop(tallies, bounds, config, drawn)
            if decision.stop:
                break
    finally:
        if pool is not None:
            pool.shutdown()
    for q, (tally, est) in enumerate(zip(tallies, bounds)):
        if est is None:
            raise ZeroEvidenceError(str(problem.queries[q]))
    rate = None
    if config.method == "mh":
        steps = sum(ch.steps for ch in chains)
        rate = sum(ch.accepted for ch in chains) / steps if steps else None
    return ApproxResult(list(bounds), tallies, drawn, per_worker, decision.reason,
                        checkpoints, rate)
