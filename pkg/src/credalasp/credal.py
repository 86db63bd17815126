"""Credal-semantics inference by total-choice enumeration.

For every total choice ``C`` (a truth value for each probabilistic fact) the
logic program plus the chosen atoms is solved and each query gets four flags:
whether ``Q and E`` holds in every / some answer set and whether
``not Q and E`` holds in every / some answer set. Summing ``Prob(C)`` over the
choices where each flag is set gives counters ``a, b, c, d`` and the bounds

    lower = a / (a + d),    upper = b / (b + c)

with the degenerate cases ``b + c = 0, d > 0 -> [0, 0]`` and
``a + d = 0, b > 0 -> [1, 1]``.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import CapExceededError, InconsistencyError, ZeroEvidenceError
from .ground import GroundProgram, ground, ground_atom
from .lang import Query
from .stable import SolverArrays
from .translate import PlpProgram, check_disjoint_condition

log = logging.getLogger(__name__)

DEFAULT_EXACT_CAP = 26
MASS_TOLERANCE = 1e-9
CHUNK = 4096


@dataclass(frozen=True)
class BoundEstimate:
    lower: float
    upper: float
    samples_counted: int | None = None
    uncertainty_lower: float = 0.0
    uncertainty_upper: float = 0.0


@dataclass(frozen=True)
class ChoiceFlags:
    qe_all: bool
    qe_some: bool
    nqe_all: bool
    nqe_some: bool


@dataclass
class CredalCounters:
    a: float = 0.0
    b: float = 0.0
    c: float = 0.0
    d: float = 0.0

    def __iadd__(self, other: "CredalCounters") -> "CredalCounters":
        self.a += other.a
        self.b += other.b
        self.c += other.c
        self.d += other.d
        return self


def credal_bounds(counters: CredalCounters, query: str | None = None) -> BoundEstimate:
    a, b, c, d = counters.a, counters.b, counters.c, counters.d
    if a == 0 and b == 0 and c == 0 and d == 0:
        raise ZeroEvidenceError(query)
    if b + c == 0 and d > 0:
        return BoundEstimate(0.0, 0.0)
    if a + d == 0 and b > 0:
        return BoundEstimate(1.0, 1.0)
    if a + d == 0:
        raise ValueError(f"counters violate c <= d: {counters}")
    return BoundEstimate(a / (a + d), b / (b + c))


def choice_probability_log(choice, probabilities) -> float:
    """``log Prob(C)``; ``-inf`` when a fact is chosen against a 0/1 probability."""
    bits = np.asarray(choice, bool)
    probs = np.asarray(probabilities, float)
    with np.errstate(divide="ignore"):
        terms = np.where(bits, np.log(probs), np.log1p(-probs))
    return float(math.fsum(terms.tolist()))


def choices_in_range(start: int, stop: int, n_facts: int) -> np.ndarray:
    """Total choices ``start..stop-1`` in binary counting order (bit i = fact i)."""
    idx = np.arange(start, stop, dtype=np.uint64)
    shifts = np.arange(n_facts, dtype=np.uint64)
    return ((idx[:, None] >> shifts[None, :]) & np.uint64(1)).astype(np.uint8)


@dataclass(frozen=True)
class QueryArrays:
    q_ptr: np.ndarray
    q_atoms: np.ndarray
    q_vals: np.ndarray
    e_ptr: np.ndarray
    e_atoms: np.ndarray
    e_vals: np.ndarray

    @classmethod
    def build(cls, queries, gp: GroundProgram) -> "QueryArrays":
        def flat(groups):
            ptr = np.zeros(len(groups) + 1, np.int32)
            atoms, vals = [], []
            for i, group in enumerate(groups):
                for atom, truth in group:
                    ident = gp.atoms.get(ground_atom(atom))
                    atoms.append(-1 if ident is None else ident)
                    vals.append(1 if truth else 0)
                ptr[i + 1] = len(atoms)
            return ptr, np.array(atoms, np.int32), np.array(vals, np.uint8)

        q = flat([qu.targets for qu in queries])
        e = flat([qu.evidence for qu in queries])
        return cls(*q, *e)

    @property
    def args(self) -> tuple:
        return (self.q_ptr, self.q_atoms, self.q_vals, self.e_ptr, self.e_atoms, self.e_vals)


@dataclass(frozen=True)
class Problem:
    """A grounded program with its queries, ready for repeated evaluation."""

    gp: GroundProgram
    arrays: SolverArrays
    queries: tuple[Query, ...]
    query_arrays: QueryArrays
    fact_ids: np.ndarray
    probabilities: np.ndarray
    log_p: np.ndarray = field(repr=False)
    log_q: np.ndarray = field(repr=False)

    @classmethod
    def from_plp(cls, plp: PlpProgram, queries=None, simplify: bool = True) -> "Problem":
        gp = ground(plp, simplify=simplify)
        check_disjoint_condition(gp)
        return cls.from_ground(gp, plp.queries if queries is None else queries)

    @classmethod
    def from_ground(cls, gp: GroundProgram, queries) -> "Problem":
        probs = np.array(gp.probabilities, float)
        with np.errstate(divide="ignore"):
            log_p = np.log(probs)
            log_q = np.log1p(-probs)
        queries = tuple(queries)
        return cls(gp, SolverArrays.from_ground(gp), queries, QueryArrays.build(queries, gp),
                   np.array(gp.fact_ids, np.int32), probs, log_p, log_q)

    @property
    def n_facts(self) -> int:
        return self.fact_ids.shape[0]

    def evaluate(self, choices: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Raw ``(flags, answer_set_counts)`` for a ``(B, n_facts)`` batch."""
        choices = np.ascontiguousarray(choices, np.uint8)
        if choices.ndim == 1:
            choices = choices.reshape(1, self.n_facts)
        return kernels.evaluate_batch(*self.arrays.program_args, self.fact_ids, choices,
                                      *self.query_arrays.args)

    def evaluate_checked(self, choices: np.ndarray) -> np.ndarray:
        flags, counts = self.evaluate(choices)
        bad = np.flatnonzero(counts == 0)
        if bad.size:
            raise InconsistencyError(self.choice_atoms(choices[bad[0]]))
        return flags

    def choice_atoms(self, choice) -> list[str]:
        return [self.gp.atoms.name(int(self.fact_ids[i])) for i in np.flatnonzero(choice)]

    def log_probabilities(self, choices: np.ndarray) -> np.ndarray:
        bits = choices.astype(bool)
        with np.errstate(invalid="ignore"):
            terms = np.where(bits, self.log_p, self.log_q)
        return terms.sum(axis=1)


def evaluate_choice(problem: Problem, choice) -> tuple[list[ChoiceFlags], int]:
    """Per-query flags for one total choice, plus the number of answer sets."""
    choice = np.asarray(choice, np.uint8).reshape(1, problem.n_facts)
    flags, counts = problem.evaluate(choice)
    if counts[0] == 0:
        raise InconsistencyError(problem.choice_atoms(choice[0]))
    return [ChoiceFlags(*(bool(x) for x in f)) for f in flags[0]], int(counts[0])


@dataclass
class ExactResult:
    bounds: list[BoundEstimate]
    counters: list[CredalCounters]
    choices_evaluated: int
    total_mass: float
    worker_counts: list[int]


def _exact_range(problem: Problem, start: int, stop: int):
    nq = len(problem.queries)
    sums = np.zeros((nq, 4))
    mass = 0.0
    for lo in range(start, stop, CHUNK):
        hi = min(lo + CHUNK, stop)
        choices = choices_in_range(lo, hi, problem.n_facts)
        flags = problem.evaluate_checked(choices)
        weights = np.exp(problem.log_probabilities(choices))
        mass += float(weights.sum())
        sums += np.einsum("b,bqk->qk", weights, flags.astype(float))
    return sums, mass


def exact_inference(problem: Problem | PlpProgram, cap: int = DEFAULT_EXACT_CAP,
                    workers: int = 1) -> ExactResult:
    """Enumerate all ``2^n`` total choices, optionally split over worker threads."""
    if isinstance(problem, PlpProgram):
        problem = Problem.from_plp(problem)
    n = problem.n_facts
    if n > cap:
        raise CapExceededError(
            f"{n} probabilistic facts give 2^{n} total choices, above the exact cap of "
            f"2^{cap}; use approximate mode (--mode approx)"
        )
    total = 1 << n
    workers = max(1, min(workers, total))
    edges = [total * i // workers for i in range(workers + 1)]
    ranges = list(zip(edges[:-1], edges[1:]))
    if workers == 1:
        parts = [_exact_range(problem, *ranges[0])]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda r: _exact_range(problem, *r), ranges))
    sums = np.zeros((len(problem.queries), 4))
    mass = 0.0
    for s, m in parts:
        sums += s
        mass += m
    if abs(mass - 1.0) > MASS_TOLERANCE:
        log.warning("total-choice probabilities sum to %.12g, not 1", mass)
    counters = [CredalCounters(*row) for row in sums.tolist()]
    bounds = [credal_bounds(c, str(q)) for c, q in zip(counters, problem.queries)]
    return ExactResult(bounds, counters, total, mass, [hi - lo for lo, hi in ranges])
