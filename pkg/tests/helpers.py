"""Shared programs and slow-but-obvious reference implementations."""

from __future__ import annotations

import itertools
import math
import random

from credalasp.ground import GroundAtom, ground, ground_atom
from credalasp.lang import parse_program
from credalasp.stable import brute_force_answer_sets
from credalasp.translate import translate

TOGGLE = "0.3::a.\np :- not q, a.\nq :- not p.\n#query(q).\n#query(p).\n"
DISJ3 = "0.2::p1;0.3::p2;0.5::p3.\n#query(p1).\n#query(p2).\n#query(p3).\n"


def random_propositional(rng: random.Random, n_atoms: int, n_rules: int,
                         choice_prob: float = 0.2, neg_prob: float = 0.5) -> str:
    """A random normal program over atoms ``x0..x{n-1}`` with some choice rules."""
    names = [f"x{i}" for i in range(n_atoms)]
    lines = []
    for _ in range(n_rules):
        head = rng.choice(names)
        body = [rng.choice(names) for _ in range(rng.randint(0, 2))]
        if rng.random() < neg_prob:
            body += ["not " + rng.choice(names) for _ in range(rng.randint(1, 2))]
        h = f"{{{head}}}" if rng.random() < choice_prob else head
        lines.append(h + (" :- " + ", ".join(body) if body else "") + ".")
    return "\n".join(lines) + "\n"


def random_stratified(rng: random.Random, n_atoms: int, n_rules: int) -> str:
    """Bodies only mention atoms numbered at most the head, negation strictly lower."""
    lines = []
    for _ in range(n_rules):
        h = rng.randrange(n_atoms)
        body = [f"x{rng.randrange(h + 1)}" for _ in range(rng.randint(0, 2))]
        if h > 0 and rng.random() < 0.6:
            body.append(f"not x{rng.randrange(h)}")
        lines.append(f"x{h}" + (" :- " + ", ".join(body) if body else "") + ".")
    return "\n".join(lines) + "\n"


def reference_bounds(text: str) -> list[tuple[float, float]]:
    """Credal bounds by enumerating choices and brute-forcing every answer set.

    Shares only parsing and grounding with the library; answer sets come from
    the subset-enumeration oracle and the flag logic is written out directly.
    """
    plp = translate(parse_program(text))
    gp = ground(plp)
    fact_ids = list(gp.fact_ids)
    out = []
    for q in plp.queries:
        a = b = c = d = 0.0
        for bits in itertools.product((0, 1), repeat=len(fact_ids)):
            weight = math.prod(p if bit else 1 - p for bit, p in zip(bits, gp.probabilities))
            chosen = [f for f, bit in zip(fact_ids, bits) if bit]
            models = [set(map(int, m.nonzero()[0]))
                      for m in brute_force_answer_sets(gp, chosen).models]
            assert models, "inconsistent choice"

            def holds(model, pairs):
                for atom, truth in pairs:
                    ident = gp.atoms.get(ground_atom(atom))
                    present = ident is not None and ident in model
                    if present != truth:
                        return False
                return True

            qe = [holds(m, q.targets) and holds(m, q.evidence) for m in models]
            nqe = [not holds(m, q.targets) and holds(m, q.evidence) for m in models]
            a += weight * all(qe)
            b += weight * any(qe)
            c += weight * all(nqe)
            d += weight * any(nqe)
        if b + c == 0 and d > 0:
            out.append((0.0, 0.0))
        elif a + d == 0 and b > 0:
            out.append((1.0, 1.0))
        else:
            out.append((a / (a + d), b / (b + c)))
    return out


def atom_id(gp, name: str, *args) -> int:
    return gp.atoms.get(GroundAtom(name, tuple(args)))

# filled by test_acceptance.py, echoed by conftest.py
ACCEPTANCE_LINES: list[str] = []
