"""Tokenizer, recursive-descent parser and pretty-printer for the input language.

A program is a sequence of ``.``-terminated statements::

    0.3::a.                          % probabilistic fact
    0.5::p :- q.                     % probabilistic clause
    0.2::x; 0.3::y :- z.             % annotated disjunction (optional body)
    p :- not q, a.                   % normal rule
    {node(2)}.                       % choice rule
    node(1..6).                      % range fact
    path(X,Y) :- path(X,Z), path(Z,Y), Y != Z.
    #query(p1, not p2 | p4:true, p5:false).

Every AST node keeps its source location in a ``loc`` field that is excluded
from equality, so ``parse_program(format_program(p)) == p`` holds structurally.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterator, Union

from .errors import DuplicateAtomError, ProbabilityRangeError, ProgramSyntaxError

__all__ = [
    "Loc",
    "Constant",
    "Integer",
    "Variable",
    "IntRange",
    "Term",
    "Atom",
    "Literal",
    "Comparison",
    "BodyElement",
    "Rule",
    "AnnotatedRule",
    "Query",
    "ParsedProgram",
    "COMPARISON_OPS",
    "parse_program",
    "parse_query",
    "format_program",
]

COMPARISON_OPS = ("!=", "==", "<", "<=", ">", ">=")


@dataclass(frozen=True)
class Loc:
    line: int
    col: int

    def __str__(self) -> str:
        return f"{self.line}:{self.col}"


_NOLOC = field(default=None, compare=False, repr=False)


# --------------------------------------------------------------------------- terms


@dataclass(frozen=True)
class Constant:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Integer:
    value: int

    def __str__(self) -> str:
        return str(self.value)


@dataclass(frozen=True)
class Variable:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class IntRange:
    lo: int
    hi: int

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"empty range {self.lo}..{self.hi}")

    def __str__(self) -> str:
        return f"{self.lo}..{self.hi}"


Term = Union[Constant, Integer, Variable, IntRange]


@dataclass(frozen=True)
class Atom:
    predicate: str
    args: tuple[Term, ...] = ()
    loc: Loc | None = _NOLOC

    @property
    def arity(self) -> int:
        return len(self.args)

    def variables(self) -> set[str]:
        return {t.name for t in self.args if isinstance(t, Variable)}

    def is_ground(self) -> bool:
        return not any(isinstance(t, (Variable, IntRange)) for t in self.args)

    def has_range(self) -> bool:
        return any(isinstance(t, IntRange) for t in self.args)

    def __str__(self) -> str:
        if not self.args:
            return self.predicate
        return f"{self.predicate}({','.join(str(t) for t in self.args)})"


@dataclass(frozen=True)
class Literal:
    """An atom, possibly under default negation (``not``)."""

    atom: Atom
    negated: bool = False

    def variables(self) -> set[str]:
        return self.atom.variables()

    def __str__(self) -> str:
        return f"not {self.atom}" if self.negated else str(self.atom)


@dataclass(frozen=True)
class Comparison:
    lhs: Term
    op: str
    rhs: Term

    def variables(self) -> set[str]:
        return {t.name for t in (self.lhs, self.rhs) if isinstance(t, Variable)}

    def __str__(self) -> str:
        return f"{self.lhs} {self.op} {self.rhs}"


BodyElement = Union[Literal, Comparison]


def _body_str(body: tuple[BodyElement, ...]) -> str:
    return " :- " + ", ".join(str(b) for b in body) if body else ""


@dataclass(frozen=True)
class Rule:
    """Normal rule ``head :- body.`` or choice rule ``{head} :- body.``."""

    head: Atom
    body: tuple[BodyElement, ...] = ()
    choice: bool = False
    loc: Loc | None = _NOLOC

    def __str__(self) -> str:
        head = f"{{{self.head}}}" if self.choice else str(self.head)
        return head + _body_str(self.body) + "."


@dataclass(frozen=True)
class AnnotatedRule:
    """``pr1::h1; ...; prk::hk :- body.`` with k >= 1 and an optional body."""

    heads: tuple[tuple[float, Atom], ...]
    body: tuple[BodyElement, ...] = ()
    loc: Loc | None = _NOLOC

    @property
    def probabilities(self) -> tuple[float, ...]:
        return tuple(p for p, _ in self.heads)

    @property
    def form(self) -> int:
        """Annotated rule form 1-4: fact, clause, disjunction, disjunctive clause."""
        if len(self.heads) == 1:
            return 2 if self.body else 1
        return 4 if self.body else 3

    def __str__(self) -> str:
        head = "; ".join(f"{p!r}::{a}" for p, a in self.heads)
        return head + _body_str(self.body) + "."


@dataclass(frozen=True)
class Query:
    targets: tuple[tuple[Atom, bool], ...]
    evidence: tuple[tuple[Atom, bool], ...] = ()
    index: int = 0
    loc: Loc | None = _NOLOC

    def __str__(self) -> str:
        text = ", ".join(str(a) if t else f"not {a}" for a, t in self.targets)
        if self.evidence:
            text += " | " + ", ".join(
                f"{a}:{'true' if t else 'false'}" for a, t in self.evidence
            )
        return text

    def directive(self) -> str:
        return f"#query({self})."


@dataclass(frozen=True)
class ParsedProgram:
    rules: tuple[Union[Rule, AnnotatedRule], ...] = ()
    queries: tuple[Query, ...] = ()

    def __str__(self) -> str:
        return format_program(self)


def format_program(program: ParsedProgram) -> str:
    lines = [str(r) for r in program.rules]
    lines += [q.directive() for q in program.queries]
    return "\n".join(lines) + ("\n" if lines else "")


# ----------------------------------------------------------------------- tokenizer

_TOKEN_SPEC = [
    ("WS", r"[ \t\r\f\v]+"),
    ("NL", r"\n"),
    ("COMMENT", r"%[^\n]*"),
    ("NUMBER", r"-?\d+(?:\.\d+)?(?:[eE][-+]?\d+)?(?!\.\d)"),
    ("DIRECTIVE", r"\#[a-z_]+"),
    ("IDENT", r"[a-z][A-Za-z0-9_']*"),
    ("VARIABLE", r"[A-Z_][A-Za-z0-9_']*"),
    ("OP", r"::|:-|\.\.|!=|==|<=|>=|[<>=.,;|(){}:]"),
    ("MISMATCH", r"."),
]
_TOKEN_RE = re.compile("|".join(f"(?P<{name}>{pat})" for name, pat in _TOKEN_SPEC))


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> Iterator[Token]:
    line, line_start = 1, 0
    for m in _TOKEN_RE.finditer(text):
        kind, value = m.lastgroup, m.group()
        col = m.start() - line_start + 1
        if kind == "NL":
            line += 1
            line_start = m.end()
        elif kind in ("WS", "COMMENT"):
            continue
        elif kind == "MISMATCH":
            raise ProgramSyntaxError(f"unexpected character {value!r}", line, col)
        else:
            if kind == "OP":
                kind = value
            elif kind == "IDENT" and value == "not":
                kind = "not"
            yield Token(kind, value, line, col)
    yield Token("EOF", "", line, len(text) - line_start + 1)


# -------------------------------------------------------------------------- parser


class _Parser:
    def __init__(self, text: str):
        self.tokens = list(tokenize(text))
        self.pos = 0

    # token helpers
    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def peek(self, k: int = 1) -> Token:
        return self.tokens[min(self.pos + k, len(self.tokens) - 1)]

    def advance(self) -> Token:
        t = self.tokens[self.pos]
        self.pos += 1
        return t

    def error(self, message: str, expected: str | None = None, tok: Token | None = None):
        tok = tok or self.tok
        found = "end of input" if tok.kind == "EOF" else repr(tok.text)
        return ProgramSyntaxError(f"{message}, found {found}", tok.line, tok.col, expected)

    def expect(self, kind: str, what: str | None = None) -> Token:
        if self.tok.kind != kind:
            raise self.error("unexpected token", what or repr(kind))
        return self.advance()

    def loc(self, tok: Token | None = None) -> Loc:
        tok = tok or self.tok
        return Loc(tok.line, tok.col)

    # grammar
    def program(self) -> ParsedProgram:
        rules: list = []
        queries: list[Query] = []
        while self.tok.kind != "EOF":
            if self.tok.kind == "DIRECTIVE":
                queries.append(self.query(len(queries)))
            else:
                rules.append(self.rule())
        return ParsedProgram(tuple(rules), tuple(queries))

    def rule(self):
        start = self.tok
        if start.kind == ":-":
            raise self.error("integrity constraints are not supported", "a rule head")
        if start.kind == "{":
            self.advance()
            head = self.atom()
            self.expect("}")
            body = self.opt_body()
            self.expect(".", "'.'")
            rule = Rule(head, body, True, self.loc(start))
        elif start.kind == "NUMBER" and self.peek().kind == "::":
            heads = [self.annotated_head()]
            while self.tok.kind == ";":
                self.advance()
                heads.append(self.annotated_head())
            body = self.opt_body()
            self.expect(".", "'.'")
            rule = AnnotatedRule(tuple(heads), body, self.loc(start))
            for _, atom in rule.heads:
                if atom.has_range():
                    raise ProgramSyntaxError(
                        "ranges are not allowed in annotated heads", atom.loc.line, atom.loc.col
                    )
            return rule
        elif start.kind == "IDENT":
            head = self.atom()
            body = self.opt_body()
            self.expect(".", "'.'")
            rule = Rule(head, body, False, self.loc(start))
        else:
            raise self.error("unexpected token at start of statement", "a rule or #query")
        if rule.head.has_range() and rule.body:
            loc = rule.head.loc
            raise ProgramSyntaxError("ranges are only allowed in facts", loc.line, loc.col)
        return rule

    def annotated_head(self) -> tuple[float, Atom]:
        tok = self.expect("NUMBER", "a probability")
        prob = float(tok.text)
        if not 0.0 <= prob <= 1.0:
            raise ProbabilityRangeError(
                f"probability {tok.text} outside [0, 1]", tok.line, tok.col
            )
        self.expect("::", "'::'")
        return prob, self.atom()

    def opt_body(self) -> tuple[BodyElement, ...]:
        if self.tok.kind != ":-":
            return ()
        self.advance()
        body = [self.body_element()]
        while self.tok.kind == ",":
            self.advance()
            body.append(self.body_element())
        return tuple(body)

    def body_atom(self) -> Atom:
        atom = self.atom()
        if atom.has_range():
            raise ProgramSyntaxError("ranges are only allowed in facts", atom.loc.line, atom.loc.col)
        return atom

    def body_element(self) -> BodyElement:
        if self.tok.kind == "not":
            self.advance()
            return Literal(self.body_atom(), True)
        if self.peek().kind in COMPARISON_OPS or self.peek().kind == "=":
            lhs = self.term(allow_range=False)
            op = self.advance().kind
            rhs = self.term(allow_range=False)
            return Comparison(lhs, "==" if op == "=" else op, rhs)
        if self.tok.kind == "IDENT":
            return Literal(self.body_atom(), False)
        raise self.error("unexpected token in rule body", "a literal or comparison")

    def atom(self) -> Atom:
        tok = self.expect("IDENT", "a predicate name")
        args: list[Term] = []
        if self.tok.kind == "(":
            self.advance()
            args.append(self.term())
            while self.tok.kind == ",":
                self.advance()
                args.append(self.term())
            self.expect(")", "',' or ')'")
        return Atom(tok.text, tuple(args), self.loc(tok))

    def term(self, allow_range: bool = True) -> Term:
        tok = self.tok
        if tok.kind == "VARIABLE":
            self.advance()
            return Variable(tok.text)
        if tok.kind == "IDENT":
            self.advance()
            if self.tok.kind == "(":
                raise self.error("function terms are not supported", "a constant")
            return Constant(tok.text)
        if tok.kind == "NUMBER":
            lo = self.integer(self.advance())
            if self.tok.kind != "..":
                return Integer(lo)
            if not allow_range:
                raise self.error("ranges are only allowed in facts")
            self.advance()
            hi_tok = self.expect("NUMBER", "an integer")
            hi = self.integer(hi_tok)
            if lo > hi:
                raise ProgramSyntaxError(f"empty range {lo}..{hi}", tok.line, tok.col)
            return IntRange(lo, hi)
        raise self.error("unexpected token", "a term")

    def integer(self, tok: Token) -> int:
        try:
            return int(tok.text)
        except ValueError:
            raise ProgramSyntaxError(
                f"expected an integer, found {tok.text!r}", tok.line, tok.col
            ) from None

    def query(self, index: int) -> Query:
        start = self.tok
        if start.text != "#query":
            raise self.error("unknown directive", "#query")
        self.advance()
        self.expect("(", "'('")
        targets = [self.query_target()]
        while self.tok.kind == ",":
            self.advance()
            targets.append(self.query_target())
        evidence = []
        if self.tok.kind == "|":
            self.advance()
            evidence.append(self.evidence_entry())
            while self.tok.kind == ",":
                self.advance()
                evidence.append(self.evidence_entry())
        self.expect(")", "',', '|' or ')'")
        self.expect(".", "'.'")
        for group, what in ((targets, "query"), (evidence, "evidence")):
            seen: set[Atom] = set()
            for atom, _ in group:
                if atom in seen:
                    raise DuplicateAtomError(
                        f"atom {atom} repeated in {what}", atom.loc.line, atom.loc.col
                    )
                seen.add(atom)
        return Query(tuple(targets), tuple(evidence), index, self.loc(start))

    def ground_atom(self) -> Atom:
        atom = self.atom()
        if not atom.is_ground() or atom.has_range():
            raise ProgramSyntaxError(
                f"query atom {atom} must be ground", atom.loc.line, atom.loc.col
            )
        return atom

    def query_target(self) -> tuple[Atom, bool]:
        if self.tok.kind == "not":
            self.advance()
            return self.ground_atom(), False
        return self.ground_atom(), True

    def evidence_entry(self) -> tuple[Atom, bool]:
        atom = self.ground_atom()
        self.expect(":", "':true' or ':false'")
        tok = self.expect("IDENT", "'true' or 'false'")
        if tok.text not in ("true", "false"):
            raise self.error("bad evidence value", "'true' or 'false'", tok)
        return atom, tok.text == "true"


def parse_program(text: str) -> ParsedProgram:
    """Parse a whole program; raises :class:`ProgramSyntaxError` with a location."""
    return _Parser(text).program()


def parse_query(text: str) -> Query:
    """Parse a single ``#query(...)`` directive."""
    p = _Parser(text)
    if p.tok.kind != "DIRECTIVE":
        raise p.error("expected a #query directive", "#query")
    q = p.query(0)
    if p.tok.kind != "EOF":
        raise p.error("trailing input after query", "end of input")
    return q
