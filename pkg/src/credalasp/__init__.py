"""Probabilistic answer set programs under the credal semantics.

Parse a program, ground it, and bound ``P(Q | E)`` either exactly, by
enumerating every total choice, or by sampling total choices.

>>> from credalasp import run, RunConfig
>>> report = run("0.3::a. p :- not q, a. q :- not p. #query(q).",
...              RunConfig(mode="exact"))
>>> round(report.bounds[0].lower, 12), report.bounds[0].upper
(0.7, 1.0)
"""

from .credal import (
    BoundEstimate,
    CredalCounters,
    ExactResult,
    Problem,
    credal_bounds,
    exact_inference,
)
from .engine import OutputRecord, RunConfig, RunReport, prepare, run, run_problem
from .errors import (
    CapExceededError,
    CredalError,
    InconsistencyError,
    ProgramError,
    ProgramSyntaxError,
    SemanticError,
    ZeroEvidenceError,
)
from .ground import ground
from .lang import format_program, parse_program, parse_query
from .sample import SamplerConfig, approximate_inference, uncertainty
from .seeding import derive_worker_seed
from .stable import answer_sets, brute_force_answer_sets, is_stratified
from .translate import translate

__version__ = "0.1.0"

__all__ = [
    "BoundEstimate", "CredalCounters", "ExactResult", "Problem", "credal_bounds",
    "exact_inference", "OutputRecord", "RunConfig", "RunReport", "prepare", "run",
    "run_problem", "CapExceededError", "CredalError", "InconsistencyError", "ProgramError",
    "ProgramSyntaxError", "SemanticError", "ZeroEvidenceError", "ground", "format_program",
    "parse_program", "parse_query", "SamplerConfig", "approximate_inference", "uncertainty",
    "derive_worker_seed", "answer_sets", "brute_force_answer_sets", "is_stratified",
    "translate",
]
