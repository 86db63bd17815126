"""Answer-set machinery over ground programs.

:func:`reduct`, :func:`least_model` and :func:`brute_force_answer_sets` follow
the textbook definitions literally and are kept deliberately simple; they are
the reference the compiled search in :func:`answer_sets` is tested against.

Choice rules ``{p} :- B.`` are handled two ways. The reference functions use
the direct reduct (keep ``p :- B+`` when ``p`` is in the interpretation and
``B-`` is not blocked). The search rewrites them into ``p :- B, not p'`` and
``p' :- not p`` with a hidden complement ``p'`` that is removed from every
reported answer set.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from . import kernels
from .errors import SizeError
from .ground import HIDDEN_PREFIX, GroundAtom, GroundProgram, GroundRule

BRUTE_FORCE_CAP = 20


def _csr(rows: list[list[int]]) -> tuple[np.ndarray, np.ndarray]:
    ptr = np.zeros(len(rows) + 1, np.int32)
    ptr[1:] = np.cumsum([len(r) for r in rows])
    idx = np.fromiter((a for r in rows for a in r), np.int32, count=int(ptr[-1]))
    return ptr, idx


@dataclass(frozen=True)
class SolverArrays:
    """Flat array form of a ground program consumed by the kernels."""

    n_atoms: int
    head: np.ndarray
    pos_ptr: np.ndarray
    pos_idx: np.ndarray
    neg_ptr: np.ndarray
    neg_idx: np.ndarray
    occ_ptr: np.ndarray
    occ_idx: np.ndarray
    branch: np.ndarray
    visible: np.ndarray

    @property
    def program_args(self) -> tuple:
        return (self.head, self.pos_ptr, self.pos_idx, self.neg_ptr, self.neg_idx,
                self.occ_ptr, self.occ_idx, self.branch)

    @classmethod
    def from_ground(cls, gp: GroundProgram) -> "SolverArrays":
        table = gp.atoms
        heads: list[int] = []
        pos: list[list[int]] = []
        neg: list[list[int]] = []
        choice_atoms: dict[int, int] = {}
        for r in gp.rules:
            extra = []
            if r.choice:
                a = table[r.head]
                co = table.get(GroundAtom(HIDDEN_PREFIX + a.predicate, a.args))
                choice_atoms[r.head] = co
                extra = [co]
            heads.append(r.head)
            pos.append(list(r.pos))
            neg.append(list(r.neg) + extra)
        for atom, co in choice_atoms.items():
            heads.append(co)
            pos.append([])
            neg.append([atom])
        n = len(table)
        occ: list[list[int]] = [[] for _ in range(n)]
        for ri, body in enumerate(pos):
            for a in body:
                occ[a].append(ri)
        pos_ptr, pos_idx = _csr(pos)
        neg_ptr, neg_idx = _csr(neg)
        occ_ptr, occ_idx = _csr(occ)
        branch = np.array(sorted({a for body in neg for a in body}), np.int32)
        visible = np.array([not table.is_hidden(i) for i in range(n)], bool)
        return cls(n, np.array(heads, np.int32), pos_ptr, pos_idx, neg_ptr, neg_idx,
                   occ_ptr, occ_idx, branch, visible)


@dataclass(frozen=True)
class AnswerSetCollection:
    """Answer sets as rows of a boolean ``(k, herbrand_size)`` matrix."""

    models: np.ndarray
    complete: bool = True

    def __len__(self) -> int:
        return self.models.shape[0]

    def __iter__(self):
        return iter(self.models)

    def as_sets(self, gp: GroundProgram) -> list[frozenset[str]]:
        return [frozenset(gp.atoms.name(i) for i in np.flatnonzero(m)) for m in self.models]


def interpretation(gp: GroundProgram, atoms) -> np.ndarray:
    """Bit vector of an interpretation given as atom names or ids."""
    bits = np.zeros(gp.herbrand_size, bool)
    for a in atoms:
        if isinstance(a, str):
            matches = [i for i in range(len(gp.atoms)) if gp.atoms.name(i) == a]
            if not matches:
                raise KeyError(a)
            a = matches[0]
        bits[a] = True
    return bits


def reduct(gp: GroundProgram, interp) -> GroundProgram:
    """Drop rules blocked by ``interp`` and strip the remaining negative literals."""
    interp = np.asarray(interp, bool)
    if interp.shape != (gp.herbrand_size,):
        raise ValueError(f"interpretation width {interp.shape} != {gp.herbrand_size}")
    rules = []
    for r in gp.rules:
        if any(interp[a] for a in r.neg):
            continue
        if r.choice and not interp[r.head]:
            continue
        rules.append(GroundRule(r.head, r.pos))
    return GroundProgram(tuple(rules), gp.atoms, gp.fact_ids, gp.probabilities)


def least_model(gp: GroundProgram, facts=()) -> np.ndarray:
    """Least Herbrand model of a definite program by naive fixpoint iteration."""
    if any(r.neg or r.choice for r in gp.rules):
        raise ValueError("least_model needs a definite program; take the reduct first")
    model = set(facts)
    while True:
        derived = {r.head for r in gp.rules if all(a in model for a in r.pos)}
        if derived <= model:
            break
        model |= derived
    out = np.zeros(gp.herbrand_size, bool)
    out[list(model)] = True
    return out


def answer_sets(gp: GroundProgram, facts=(), limit: int | None = None,
                arrays: SolverArrays | None = None) -> AnswerSetCollection:
    """All answer sets of ``gp`` with extra ``facts`` (atom ids) added."""
    arrays = arrays or SolverArrays.from_ground(gp)
    init = np.zeros(arrays.n_atoms, np.uint8)
    init[list(facts)] = 1
    models, complete = kernels.enumerate_models(
        *arrays.program_args, init, -1 if limit is None else int(limit)
    )
    models = models.astype(bool) & arrays.visible
    return AnswerSetCollection(models, bool(complete))


def brute_force_answer_sets(gp: GroundProgram, facts=()) -> AnswerSetCollection:
    """Test oracle: keep every ``I`` with ``I == least_model(reduct(P, I))``."""
    visible = gp.atoms.visible_ids()
    if len(visible) > BRUTE_FORCE_CAP:
        raise SizeError(f"{len(visible)} atoms exceed the brute-force cap of {BRUTE_FORCE_CAP}")
    facts = list(facts)
    found = []
    for mask in range(1 << len(visible)):
        interp = np.zeros(gp.herbrand_size, bool)
        for j, a in enumerate(visible):
            if mask >> j & 1:
                interp[a] = True
        if np.array_equal(least_model(reduct(gp, interp), facts), interp):
            found.append(interp)
    models = np.array(found, bool).reshape(len(found), gp.herbrand_size)
    return AnswerSetCollection(models, True)


def stratify(gp: GroundProgram) -> list[int] | None:
    """Stratum per atom, or ``None`` when negation occurs inside a cycle.

    Programs with choice rules are reported as not stratified.
    """
    if any(r.choice for r in gp.rules):
        return None
    n = gp.herbrand_size
    src, dst, sign = [], [], []
    for r in gp.rules:
        for a in r.pos:
            src.append(r.head)
            dst.append(a)
            sign.append(0)
        for a in r.neg:
            src.append(r.head)
            dst.append(a)
            sign.append(1)
    graph = csr_matrix((np.ones(len(src)), (src, dst)), shape=(n, n))
    n_comp, comp = connected_components(graph, directed=True, connection="strong")
    comp_edges: dict[int, list[tuple[int, int]]] = {c: [] for c in range(n_comp)}
    for s, d, neg in zip(src, dst, sign):
        cs, cd = comp[s], comp[d]
        if cs == cd:
            if neg:
                return None
            continue
        comp_edges[cs].append((cd, neg))
    level: dict[int, int] = {}

    def visit(c: int) -> int:
        # iterative post-order over the acyclic component graph
        stack = [(c, iter(comp_edges[c]))]
        while stack:
            node, it = stack[-1]
            for child, _ in it:
                if child not in level:
                    stack.append((child, iter(comp_edges[child])))
                    break
            else:
                stack.pop()
                level[node] = max((level[ch] + neg for ch, neg in comp_edges[node]), default=0)
        return level[c]

    for c in range(n_comp):
        if c not in level:
            visit(c)
    return [level[comp[a]] for a in range(n)]


def is_stratified(gp: GroundProgram) -> bool:
    return stratify(gp) is not None
