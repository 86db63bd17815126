"""Random path-graph programs and the sampler convergence benchmark.

``generate_task`` writes the path-finding program on a random directed graph:
probabilistic edges, ``node`` facts (plain, or choice rules for the
"flickering" nodes of the choice task), the transitive ``path`` rules and the
query ``#query(path(1,5)).``

``bench`` runs every sampler for every sample count in a schedule, several
repetitions each, and writes a CSV of data rows followed by a blank line and a
summary block (mean and sample standard deviation per method and count).
"""

from __future__ import annotations

import csv
import io
import math
import random
import time
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .credal import Problem
from .engine import prepare
from .errors import SpecError
from .sample import METHODS, SamplerConfig, approximate_inference
from .seeding import derive_worker_seed

TASKS = ("stratified", "choice")
DATA_HEADER = ["method", "samples", "repetition", "lower", "upper", "seconds"]
SUMMARY_HEADER = [
    "method", "samples", "runs",
    "lower_mean", "lower_std", "upper_mean", "upper_std", "seconds_mean", "seconds_std",
]

PATH_RULES = (
    "path(X,Y) :- path(X,Z), path(Z, Y), Y != Z.",
    "path(X,Y) :- node(X), node(Y), edge(X,Y).",
)


@dataclass(frozen=True)
class BenchSpec:
    nodes: int = 6
    edges: int = 20
    task: str = "stratified"
    graph_seed: int = 0
    schedule: tuple[int, ...] = (1000, 10_000, 100_000)
    repetitions: int = 10
    choice_nodes: tuple[int, ...] = (2, 3)
    methods: tuple[str, ...] = METHODS

    def validate(self) -> None:
        if self.task not in TASKS:
            raise SpecError(f"task must be one of {TASKS}")
        if self.nodes < 5:
            raise SpecError("need at least 5 nodes to query path(1,5)")
        if not 0 <= self.edges <= self.nodes * (self.nodes - 1):
            raise SpecError(
                f"{self.edges} edges impossible on {self.nodes} nodes "
                f"(max {self.nodes * (self.nodes - 1)})"
            )
        if self.repetitions < 1:
            raise SpecError("repetitions must be >= 1")
        if not self.schedule or any(s < 1 for s in self.schedule):
            raise SpecError("schedule must be a nonempty list of positive sample counts")
        if any(not 1 <= k <= self.nodes for k in self.choice_nodes):
            raise SpecError("choice nodes must lie in 1..nodes")
        if any(m not in METHODS for m in self.methods):
            raise SpecError(f"methods must be drawn from {METHODS}")


def generate_task(spec: BenchSpec) -> str:
    """Program text for ``spec``; byte-identical for a given graph seed."""
    spec.validate()
    rng = random.Random(spec.graph_seed)
    pairs = [(i, j) for i in range(1, spec.nodes + 1) for j in range(1, spec.nodes + 1) if i != j]
    lines = []
    for i, j in rng.sample(pairs, spec.edges):
        prob = min(max(round(rng.random(), 4), 0.0001), 0.9999)
        lines.append(f"{prob:.4f}::edge({i}, {j}).")
    if spec.task == "stratified":
        lines.append(f"node(1..{spec.nodes}).")
    else:
        flicker = set(spec.choice_nodes)
        for k in range(1, spec.nodes + 1):
            lines.append(f"{{node({k})}}." if k in flicker else f"node({k}).")
    lines.extend(PATH_RULES)
    lines.append("#query(path(1,5)).")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class BenchRow:
    method: str
    samples: int
    repetition: int
    lower: float
    upper: float
    seconds: float


@dataclass(frozen=True)
class SummaryRow:
    method: str
    samples: int
    runs: int
    lower_mean: float
    lower_std: float
    upper_mean: float
    upper_std: float
    seconds_mean: float
    seconds_std: float


def _std(values: list[float]) -> float:
    return float(np.std(values, ddof=1)) if len(values) > 1 else 0.0


def summarize(rows: list[BenchRow]) -> list[SummaryRow]:
    groups: dict[tuple[str, int], list[BenchRow]] = {}
    for r in rows:
        groups.setdefault((r.method, r.samples), []).append(r)
    out = []
    for (method, samples), rs in groups.items():
        lo = [r.lower for r in rs]
        up = [r.upper for r in rs]
        sec = [r.seconds for r in rs]
        out.append(SummaryRow(method, samples, len(rs), float(np.mean(lo)), _std(lo),
                              float(np.mean(up)), _std(up), float(np.mean(sec)), _std(sec)))
    return out


def _warm_up(problem: Problem, base: SamplerConfig, methods) -> None:
    # keeps JIT compilation out of the timed runs
    for m in methods:
        cfg = replace(base, method=m, max_sample=2, min_sample=1, burn=1, check_interval=2)
        approximate_inference(problem, cfg)


def run_bench(spec: BenchSpec, base: SamplerConfig | None = None, workers: int = 1,
              program: str | None = None) -> tuple[list[BenchRow], list[SummaryRow]]:
    spec.validate()
    base = base or SamplerConfig()
    problem = prepare(program if program is not None else generate_task(spec))
    _warm_up(problem, base, spec.methods)
    rows = []
    for si, samples in enumerate(spec.schedule):
        for rep in range(spec.repetitions):
            seed = derive_worker_seed(derive_worker_seed(base.seed, si), rep)
            for method in spec.methods:
                cfg = replace(base, method=method, threshold=None, max_sample=samples,
                              min_sample=1, seed=seed)
                t0 = time.perf_counter()
                res = approximate_inference(problem, cfg, workers)
                seconds = time.perf_counter() - t0
                est = res.bounds[0]
                rows.append(BenchRow(method, samples, rep, est.lower, est.upper, seconds))
    order = {m: i for i, m in enumerate(spec.methods)}
    rows.sort(key=lambda r: (order[r.method], r.samples, r.repetition))
    summary = sorted(summarize(rows), key=lambda s: (order[s.method], s.samples))
    return rows, summary


def _fmt(v) -> str:
    return repr(v) if isinstance(v, float) else str(v)


def write_bench_csv(rows: list[BenchRow], summary: list[SummaryRow], out) -> None:
    """Write to a path or a text stream."""
    if isinstance(out, (str, Path)):
        with open(out, "w", newline="") as fh:
            write_bench_csv(rows, summary, fh)
        return
    w = csv.writer(out, lineterminator="\n")
    w.writerow(DATA_HEADER)
    for r in rows:
        w.writerow([_fmt(getattr(r, k)) for k in DATA_HEADER])
    out.write("\n")
    w.writerow(SUMMARY_HEADER)
    for s in summary:
        w.writerow([_fmt(getattr(s, k)) for k in SUMMARY_HEADER])


def read_bench_csv(source) -> tuple[list[BenchRow], list[SummaryRow]]:
    text = Path(source).read_text() if isinstance(source, (str, Path)) else source.read()
    data_part, _, summary_part = text.partition("\n\n")

    def parse(block: str, cls, header):
        reader = csv.reader(io.StringIO(block))
        got = next(reader)
        if got != header:
            raise ValueError(f"unexpected CSV header {got}")
        types = [f.type for f in cls.__dataclass_fields__.values()]
        out = []
        for rec in reader:
            if not rec:
                continue
            vals = [
                v if t == "str" else int(v) if t == "int" else float(v)
                for v, t in zip(rec, types)
            ]
            out.append(cls(*vals))
        return out

    return parse(data_part, BenchRow, DATA_HEADER), parse(summary_part, SummaryRow, SUMMARY_HEADER)


def bench(spec: BenchSpec, base: SamplerConfig | None = None, out=None, workers: int = 1):
    rows, summary = run_bench(spec, base, workers)
    if out is not None:
        write_bench_csv(rows, summary, out)
    return rows, summary


def linearity_ratio(summary: list[SummaryRow], method: str) -> float:
    """max/min of mean seconds per sample across the schedule for one method."""
    per = [s.seconds_mean / s.samples for s in summary if s.method == method]
    return max(per) / min(per) if per and min(per) > 0 else math.inf
