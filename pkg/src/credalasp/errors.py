"""Exception hierarchy.

Everything raised on purpose derives from :class:`CredalError`. The CLI maps
:class:`ProgramError` subclasses to exit code 2 and :class:`SemanticError`
subclasses to exit code 3.
"""

from __future__ import annotations


class CredalError(Exception):
    """Base class for all library errors."""


class ProgramError(CredalError):
    """Problem with the input program (syntax, translation, grounding)."""


class SemanticError(CredalError):
    """The program is well formed but inference is undefined for it."""


class ProgramSyntaxError(ProgramError, SyntaxError):
    def __init__(self, message: str, line: int, col: int, expected: str | None = None):
        self.msg = message
        self.line = line
        self.col = col
        self.expected = expected
        text = f"line {line}, column {col}: {message}"
        if expected:
            text += f" (expected {expected})"
        Exception.__init__(self, text)

    def __str__(self) -> str:
        return self.args[0]


class ProbabilityRangeError(ProgramSyntaxError):
    pass


class DuplicateAtomError(ProgramSyntaxError):
    pass


class DisjunctionSumError(ProgramError):
    pass


class DuplicateProbFactError(ProgramError):
    pass


class AnnotationError(ProgramError):
    """An annotated head that cannot be translated (e.g. it is not ground)."""


class DisjointConditionError(ProgramError):
    def __init__(self, violations: list[tuple[str, str]]):
        self.violations = violations
        lines = "; ".join(f"{atom} is the head of '{rule}'" for atom, rule in violations)
        super().__init__(f"probabilistic atoms used as rule heads: {lines}")


class UnsafeRuleError(ProgramError):
    def __init__(self, rule: str, variable: str, line: int | None = None):
        self.rule = rule
        self.variable = variable
        self.line = line
        where = f"line {line}: " if line is not None else ""
        super().__init__(
            f"{where}variable {variable} in '{rule}' does not occur in a positive body atom"
        )


class ComparisonTypeError(ProgramError, TypeError):
    pass


class SizeError(CredalError, ValueError):
    pass


class CapExceededError(CredalError, ValueError):
    pass


class SpecError(CredalError, ValueError):
    pass


class InconsistencyError(SemanticError):
    """A total choice leaves the logic program without answer sets."""

    def __init__(self, choice: list[str]):
        self.choice = choice
        shown = "{" + ", ".join(choice) + "}"
        super().__init__(f"no answer set for total choice {shown}")


class ZeroEvidenceError(SemanticError):
    def __init__(self, query: str | None = None):
        self.query = query
        what = f" for query {query}" if query else ""
        super().__init__(f"evidence has zero measure{what}; bounds are undefined")
