"""Grounding: variable instantiation, range expansion and atom interning.

Two instantiation strategies are available:

* ``simplify=True`` (default) joins positive body atoms against the set of
  atoms that can possibly become true (probabilistic atoms, facts and heads of
  instantiated rules, iterated to a fixpoint). Instances whose positive body
  mentions an atom that can never hold are skipped and negative literals over
  such atoms are dropped. Answer sets are unchanged.
* ``simplify=False`` instantiates every rule over the full cross product of
  the program's constants and only filters by comparison literals.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import IntEnum
from typing import Iterable, Iterator, NamedTuple

from .errors import ComparisonTypeError, UnsafeRuleError
from .lang import Atom, Comparison, Constant, Integer, IntRange, Literal, Rule, Variable
from .translate import PlpProgram

HIDDEN_PREFIX = "__co_"


class AtomKind(IntEnum):
    DERIVED = 0
    PROBABILISTIC = 1
    HIDDEN = 2


class GroundAtom(NamedTuple):
    predicate: str
    args: tuple = ()

    def __str__(self) -> str:
        if not self.args:
            return self.predicate
        return f"{self.predicate}({','.join(str(a) for a in self.args)})"


def ground_value(term) -> int | str:
    if isinstance(term, Integer):
        return term.value
    if isinstance(term, Constant):
        return term.name
    raise TypeError(f"term {term} is not ground")


def ground_atom(atom: Atom) -> GroundAtom:
    return GroundAtom(atom.predicate, tuple(ground_value(t) for t in atom.args))


class AtomTable:
    """Bijection between ground atoms and contiguous integer ids."""

    def __init__(self):
        self._atoms: list[GroundAtom] = []
        self._ids: dict[GroundAtom, int] = {}
        self._kinds: list[AtomKind] = []

    def intern(self, atom: GroundAtom, kind: AtomKind = AtomKind.DERIVED) -> int:
        i = self._ids.get(atom)
        if i is None:
            i = len(self._atoms)
            self._ids[atom] = i
            self._atoms.append(atom)
            self._kinds.append(kind)
        return i

    def get(self, atom: GroundAtom) -> int | None:
        return self._ids.get(atom)

    def __getitem__(self, i: int) -> GroundAtom:
        return self._atoms[i]

    def __len__(self) -> int:
        return len(self._atoms)

    def __iter__(self) -> Iterator[GroundAtom]:
        return iter(self._atoms)

    def __contains__(self, atom) -> bool:
        return atom in self._ids

    def name(self, i: int) -> str:
        return str(self._atoms[i])

    def kind(self, i: int) -> AtomKind:
        return self._kinds[i]

    def is_probabilistic(self, i: int) -> bool:
        return self._kinds[i] == AtomKind.PROBABILISTIC

    def is_hidden(self, i: int) -> bool:
        return self._kinds[i] == AtomKind.HIDDEN

    def visible_ids(self) -> list[int]:
        return [i for i, k in enumerate(self._kinds) if k != AtomKind.HIDDEN]


@dataclass(frozen=True)
class GroundRule:
    head: int
    pos: tuple[int, ...] = ()
    neg: tuple[int, ...] = ()
    choice: bool = False


@dataclass(frozen=True)
class GroundProgram:
    rules: tuple[GroundRule, ...]
    atoms: AtomTable
    fact_ids: tuple[int, ...] = ()
    probabilities: tuple[float, ...] = ()

    @property
    def herbrand_size(self) -> int:
        return len(self.atoms)

    def complement_of(self, atom_id: int) -> int | None:
        """Id of the hidden complement of a choice atom, if any."""
        a = self.atoms[atom_id]
        return self.atoms.get(GroundAtom(HIDDEN_PREFIX + a.predicate, a.args))

    def format_rule(self, rule: GroundRule) -> str:
        name = self.atoms.name
        head = f"{{{name(rule.head)}}}" if rule.choice else name(rule.head)
        body = [name(i) for i in rule.pos] + [f"not {name(i)}" for i in rule.neg]
        return head + (" :- " + ", ".join(body) if body else "") + "."

    def __str__(self) -> str:
        return "\n".join(self.format_rule(r) for r in self.rules)


# ------------------------------------------------------------------- comparisons


def compare(lhs, op: str, rhs) -> bool:
    if op == "==":
        return type(lhs) is type(rhs) and lhs == rhs
    if op == "!=":
        return not (type(lhs) is type(rhs) and lhs == rhs)
    if not (isinstance(lhs, int) and isinstance(rhs, int)):
        raise ComparisonTypeError(f"ordering comparison {lhs} {op} {rhs} needs integers")
    if op == "<":
        return lhs < rhs
    if op == "<=":
        return lhs <= rhs
    if op == ">":
        return lhs > rhs
    if op == ">=":
        return lhs >= rhs
    raise ValueError(f"unknown comparison operator {op}")


# ---------------------------------------------------------------- rule templates

_VAR, _VAL = 0, 1


def _pattern(atom: Atom) -> tuple[str, tuple]:
    args = []
    for t in atom.args:
        if isinstance(t, Variable):
            args.append((_VAR, t.name))
        else:
            args.append((_VAL, ground_value(t)))
    return atom.predicate, tuple(args)


def _instantiate(pattern, binding: dict) -> GroundAtom:
    pred, args = pattern
    return GroundAtom(pred, tuple(binding[v] if k == _VAR else v for k, v in args))


def _term_value(term, binding: dict):
    return binding[term.name] if isinstance(term, Variable) else ground_value(term)


class _Template:
    """A non-ground rule prepared for instantiation."""

    def __init__(self, rule: Rule):
        self.rule = rule
        self.head = _pattern(rule.head)
        self.pos = [_pattern(b.atom) for b in rule.body if isinstance(b, Literal) and not b.negated]
        self.neg = [_pattern(b.atom) for b in rule.body if isinstance(b, Literal) and b.negated]
        comps = [b for b in rule.body if isinstance(b, Comparison)]
        bound: set[str] = set()
        depth_of = []
        for b in rule.body:
            if isinstance(b, Literal) and not b.negated:
                bound |= b.variables()
                depth_of.append(set(bound))
        pos_vars = bound
        needed = rule.head.variables()
        for b in rule.body:
            if isinstance(b, Comparison) or b.negated:
                needed |= b.variables()
        for v in sorted(needed - pos_vars):
            raise UnsafeRuleError(str(rule), v, rule.loc.line if rule.loc else None)
        self.variables = sorted(pos_vars)
        # each comparison is checked at the first join depth binding all its variables
        self.checks: list[list[Comparison]] = [[] for _ in range(len(self.pos) + 1)]
        for c in comps:
            vs = c.variables()
            depth = 0
            if vs:
                depth = next(i + 1 for i, seen in enumerate(depth_of) if vs <= seen)
            self.checks[depth].append(c)

    def passes(self, depth: int, binding: dict) -> bool:
        return all(
            compare(_term_value(c.lhs, binding), c.op, _term_value(c.rhs, binding))
            for c in self.checks[depth]
        )

    def emit(self, binding: dict):
        head = _instantiate(self.head, binding)
        pos = tuple(_instantiate(p, binding) for p in self.pos)
        neg = tuple(_instantiate(p, binding) for p in self.neg)
        return head, pos, neg

    def joins(self, possible: dict) -> Iterator[dict]:
        """Bindings of the positive body against the possibly-true atoms."""
        if not self.passes(0, {}):
            return

        def rec(i: int, binding: dict):
            if i == len(self.pos):
                yield binding
                return
            pred, args = self.pos[i]
            for cand in possible.get((pred, len(args)), ()):
                b = binding
                ok = True
                for (kind, v), value in zip(args, cand):
                    if kind == _VAL:
                        if type(v) is not type(value) or v != value:
                            ok = False
                            break
                    elif v in b:
                        if type(b[v]) is not type(value) or b[v] != value:
                            ok = False
                            break
                    else:
                        if b is binding:
                            b = dict(binding)
                        b[v] = value
                if ok and self.passes(i + 1, b):
                    yield from rec(i + 1, b)

        yield from rec(0, {})

    def cross_product(self, constants: list) -> Iterator[dict]:
        for values in itertools.product(constants, repeat=len(self.variables)):
            binding = dict(zip(self.variables, values))
            if all(self.passes(d, binding) for d in range(len(self.checks))):
                yield binding


# ----------------------------------------------------------------------- grounding


def expand_ranges(rule: Rule) -> list[Rule]:
    """``p(1..3)`` style facts become one rule per tuple in the range product."""
    if not rule.head.has_range():
        return [rule]
    choices = []
    for t in rule.head.args:
        if isinstance(t, IntRange):
            choices.append([Integer(v) for v in range(t.lo, t.hi + 1)])
        else:
            choices.append([t])
    return [
        Rule(Atom(rule.head.predicate, tuple(args), rule.head.loc), rule.body, rule.choice, rule.loc)
        for args in itertools.product(*choices)
    ]


def _constants(rules: Iterable[Rule], plp: PlpProgram) -> list:
    values: dict = {}

    def visit(t):
        if isinstance(t, (Integer, Constant)):
            values[ground_value(t)] = None

    for r in rules:
        for t in r.head.args:
            visit(t)
        for b in r.body:
            if isinstance(b, Literal):
                for t in b.atom.args:
                    visit(t)
            else:
                visit(b.lhs)
                visit(b.rhs)
    for f in plp.facts:
        for t in f.atom.args:
            visit(t)
    return sorted(values, key=lambda v: (isinstance(v, str), v))


def ground(plp: PlpProgram, simplify: bool = True) -> GroundProgram:
    rules = [r for rule in plp.logic_rules for r in expand_ranges(rule)]
    templates = [_Template(r) for r in rules]
    pf_atoms = [ground_atom(f.atom) for f in plp.facts]

    emitted: dict[tuple, None] = {}  # (head, pos, neg, choice) in discovery order

    def add(t: _Template, binding: dict) -> GroundAtom | None:
        head, pos, neg = t.emit(binding)
        if head in pos:
            return None
        pos = tuple(dict.fromkeys(pos))
        neg = tuple(dict.fromkeys(neg))
        key = (head, pos, neg, t.rule.choice)
        if key in emitted:
            return None
        emitted[key] = None
        return head

    if simplify:
        possible: dict[tuple, dict] = {}
        for a in pf_atoms:
            possible.setdefault((a.predicate, len(a.args)), {})[a.args] = None
        changed = True
        while changed:
            changed = False
            for t in templates:
                for binding in list(t.joins(possible)):
                    head = add(t, binding)
                    if head is None:
                        continue
                    bucket = possible.setdefault((head.predicate, len(head.args)), {})
                    if head.args not in bucket:
                        bucket[head.args] = None
                        changed = True

        def can_hold(a: GroundAtom) -> bool:
            return a.args in possible.get((a.predicate, len(a.args)), ())

    else:
        constants = _constants(rules, plp)
        for t in templates:
            for binding in t.cross_product(constants):
                add(t, binding)

        def can_hold(a: GroundAtom) -> bool:
            return True

    table = AtomTable()
    fact_ids = tuple(table.intern(a, AtomKind.PROBABILISTIC) for a in pf_atoms)
    out: dict[GroundRule, None] = {}
    for head, pos, neg, choice in emitted:
        h = table.intern(head)
        p = tuple(sorted(set([table.intern(a) for a in pos])))
        n = tuple(sorted(set([table.intern(a) for a in neg if can_hold(a)])))
        out[GroundRule(h, p, n, choice)] = None
    for h in dict.fromkeys(r.head for r in out if r.choice):
        a = table[h]
        table.intern(GroundAtom(HIDDEN_PREFIX + a.predicate, a.args), AtomKind.HIDDEN)
    return GroundProgram(tuple(out), table, fact_ids, tuple(plp.probabilities))


def program_from_text(text: str, simplify: bool = True) -> GroundProgram:
    """Parse, translate and ground in one step (convenience for tests and tools)."""
    from .lang import parse_program
    from .translate import translate

    return ground(translate(parse_program(text)), simplify=simplify)
