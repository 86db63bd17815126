"""End-to-end pipeline: parse, translate, ground, check, infer, report."""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field

from .credal import DEFAULT_EXACT_CAP, BoundEstimate, Problem, exact_inference
from .errors import ProgramError
from .lang import parse_program
from .sample import Checkpoint, SamplerConfig, approximate_inference
from .seeding import derive_worker_seed
from .translate import translate

__all__ = ["RunConfig", "RunReport", "OutputRecord", "prepare", "run", "run_problem",
           "derive_worker_seed"]

MODES = ("exact", "approximate")


@dataclass(frozen=True)
class RunConfig:
    mode: str = "exact"
    sampler: SamplerConfig = field(default_factory=SamplerConfig)
    workers: int = 1
    exact_cap: int = DEFAULT_EXACT_CAP

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass(frozen=True)
class OutputRecord:
    query: str
    lower: float
    upper: float
    uncertainty_lower: float
    uncertainty_upper: float
    samples: int | None
    mode: str
    method: str | None
    elapsed: float


@dataclass
class RunReport:
    queries: list[str]
    bounds: list[BoundEstimate]
    mode: str
    method: str | None
    evaluated: int
    elapsed: float
    worker_counts: list[int]
    stop_reason: str
    seed: int | None
    checkpoints: list[Checkpoint] = field(default_factory=list)

    def records(self) -> list[OutputRecord]:
        return [
            OutputRecord(q, b.lower, b.upper, b.uncertainty_lower, b.uncertainty_upper,
                         b.samples_counted, self.mode, self.method, self.elapsed)
            for q, b in zip(self.queries, self.bounds)
        ]

    def comparable(self) -> dict:
        """Everything except wall time, for reproducibility checks."""
        d = asdict(self)
        d.pop("elapsed")
        return d


def prepare(text: str, simplify: bool = True) -> Problem:
    return Problem.from_plp(translate(parse_program(text)), simplify=simplify)


def run_problem(problem: Problem, config: RunConfig) -> RunReport:
    queries = [str(q) for q in problem.queries]
    if not queries:
        raise ProgramError("the program has no #query directive")
    t0 = time.perf_counter()
    if config.mode == "exact":
        res = exact_inference(problem, config.exact_cap, config.workers)
        elapsed = time.perf_counter() - t0
        bounds = [BoundEstimate(b.lower, b.upper, res.choices_evaluated) for b in res.bounds]
        return RunReport(queries, bounds, "exact", None, res.choices_evaluated, elapsed,
                         res.worker_counts, "exhausted", None)
    cfg = config.sampler
    res = approximate_inference(problem, cfg, config.workers)
    elapsed = time.perf_counter() - t0
    return RunReport(queries, res.bounds, "approximate", cfg.method, res.total_drawn, elapsed,
                     res.worker_counts, res.stop_reason, cfg.seed, res.checkpoints)


def run(text: str, config: RunConfig) -> RunReport:
    return run_problem(prepare(text), config)
