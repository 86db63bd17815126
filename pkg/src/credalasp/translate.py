"""Translation of annotated rules into independent probabilistic facts plus
plain rules.

=====  ==============================  =========================================
form   source                          result
=====  ==============================  =========================================
1      ``pr::p.``                      fact ``pr::p``
2      ``pr::p :- B.``                 fact ``pr::aux`` and rule ``p :- B, aux``
3      ``pr1::p1; ...; prk::pk.``      facts ``a_j::aux_j`` with
                                       ``a_j = pr_j / (1 - sum_{i<j} pr_i)`` and
                                       rules ``p_j :- aux_j, not aux_1, ...,
                                       not aux_{j-1}``
4      form 3 with ``:- B``            as form 3, ``B`` appended to every rule
=====  ==============================  =========================================

Auxiliary atoms are named ``__aux_<n>``. User predicates must start with a
lowercase letter, so these can never collide with user atoms.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .errors import (
    AnnotationError,
    DisjointConditionError,
    DisjunctionSumError,
    DuplicateProbFactError,
)
from .lang import AnnotatedRule, Atom, Literal, ParsedProgram, Query, Rule

AUX_PREFIX = "__aux_"
SUM_TOLERANCE = 1e-9
ZERO_RESIDUAL = 1e-12


@dataclass(frozen=True)
class ProbabilisticFact:
    atom: Atom
    probability: float
    index: int

    def __str__(self) -> str:
        return f"{self.probability!r}::{self.atom}"


@dataclass(frozen=True)
class PlpProgram:
    logic_rules: tuple[Rule, ...]
    facts: tuple[ProbabilisticFact, ...]
    queries: tuple[Query, ...] = ()
    aux_counter: int = 0
    source: ParsedProgram | None = field(default=None, compare=False, repr=False)

    @property
    def probabilities(self) -> list[float]:
        return [f.probability for f in self.facts]

    def __str__(self) -> str:
        lines = [str(f) + "." for f in self.facts]
        lines += [str(r) for r in self.logic_rules]
        lines += [q.directive() for q in self.queries]
        return "\n".join(lines) + ("\n" if lines else "")


def disjunction_fact_probabilities(probs) -> list[float]:
    """Sequential-guard probabilities for an annotated disjunction.

    ``pr_j`` becomes ``pr_j / (1 - sum_{i<j} pr_i)`` so that alternative ``j``
    is selected with marginal probability ``pr_j``. Annotations are decimal
    literals, so the arithmetic runs on their exact decimal values and each
    result is rounded once.
    """
    exact = [Fraction(repr(float(p))) for p in probs]
    total = sum(exact, Fraction(0))
    if total > 1 + Fraction(SUM_TOLERANCE):
        raise DisjunctionSumError(
            f"annotated disjunction probabilities sum to {float(total)!r} > 1"
        )
    out = []
    residual = Fraction(1)
    for j, pr in enumerate(exact):
        if pr == 0:
            out.append(0.0)
            continue
        if residual <= ZERO_RESIDUAL:
            raise DisjunctionSumError(
                f"alternative {j + 1} has probability {float(pr)!r} but no residual mass is left"
            )
        out.append(min(1.0, float(pr / residual)))
        residual -= pr
    return out


def _aux_atom(n: int) -> Atom:
    return Atom(f"{AUX_PREFIX}{n}")


def translate(program: ParsedProgram) -> PlpProgram:
    rules: list[Rule] = []
    facts: list[ProbabilisticFact] = []
    seen: dict[Atom, int] = {}
    aux = 0

    def add_fact(atom: Atom, prob: float):
        key = Atom(atom.predicate, atom.args)
        if key in seen:
            raise DuplicateProbFactError(f"probabilistic atom {atom} declared twice")
        seen[key] = len(facts)
        facts.append(ProbabilisticFact(key, prob, len(facts)))

    for rule in program.rules:
        if isinstance(rule, Rule):
            rules.append(rule)
            continue
        assert isinstance(rule, AnnotatedRule)
        for _, head in rule.heads:
            if not head.is_ground():
                raise AnnotationError(
                    f"annotated head {head} must be ground"
                    + (f" (line {rule.loc.line})" if rule.loc else "")
                )
        if rule.form == 1:
            prob, head = rule.heads[0]
            add_fact(head, prob)
        elif rule.form == 2:
            prob, head = rule.heads[0]
            aux += 1
            guard = _aux_atom(aux)
            add_fact(guard, prob)
            rules.append(Rule(head, rule.body + (Literal(guard),), False, rule.loc))
        else:
            fact_probs = disjunction_fact_probabilities(rule.probabilities)
            guards = []
            for (_, head), prob in zip(rule.heads, fact_probs):
                aux += 1
                guard = _aux_atom(aux)
                add_fact(guard, prob)
                body = (Literal(guard),) + tuple(Literal(g, True) for g in guards)
                rules.append(Rule(head, body + rule.body, False, rule.loc))
                guards.append(guard)
    return PlpProgram(tuple(rules), tuple(facts), program.queries, aux, program)


def find_disjoint_violations(ground_program) -> list[tuple[str, str]]:
    """(atom, rule) pairs where a probabilistic atom heads a ground rule."""
    table = ground_program.atoms
    out = []
    for rule in ground_program.rules:
        if table.is_probabilistic(rule.head):
            out.append((table.name(rule.head), ground_program.format_rule(rule)))
    return out


def check_disjoint_condition(ground_program) -> None:
    """Raise :class:`DisjointConditionError` listing every violation."""
    violations = find_disjoint_violations(ground_program)
    if violations:
        raise DisjointConditionError(violations)
