"""Numba-compiled kernels.

Program arrays (see :class:`credalasp.stable.SolverArrays`) use CSR layout:
rule ``r`` has head ``head[r]``, positive body ``pos_idx[pos_ptr[r]:pos_ptr[r+1]]``
and negative body ``neg_idx[neg_ptr[r]:neg_ptr[r+1]]``; ``occ_idx[occ_ptr[a]:occ_ptr[a+1]]``
lists the rules whose positive body contains atom ``a``. Choice rules have
already been rewritten with hidden complement atoms, so every rule is normal.

All kernels are ``nogil`` so worker threads run them in parallel.
"""

import numba
import numpy as np

_jit = numba.njit(cache=True, nogil=True)

UNASSIGNED = -1


@_jit
def _lhm(head, pos_ptr, pos_idx, occ_ptr, occ_idx, active, init, out, missing, queue):
    """Least model of the active rules plus ``init`` facts, written into ``out``.

    Counter-based forward chaining: each rule keeps the number of positive
    body atoms not yet derived and fires when it reaches zero.
    """
    n_atoms = out.shape[0]
    n_rules = head.shape[0]
    qt = 0
    for a in range(n_atoms):
        out[a] = init[a]
        if init[a]:
            queue[qt] = a
            qt += 1
    for r in range(n_rules):
        if active[r]:
            missing[r] = pos_ptr[r + 1] - pos_ptr[r]
        else:
            missing[r] = -1
    for r in range(n_rules):
        if missing[r] == 0:
            h = head[r]
            if out[h] == 0:
                out[h] = 1
                queue[qt] = h
                qt += 1
    qh = 0
    while qh < qt:
        a = queue[qh]
        qh += 1
        for k in range(occ_ptr[a], occ_ptr[a + 1]):
            r = occ_idx[k]
            if missing[r] > 0:
                missing[r] -= 1
                if missing[r] == 0:
                    h = head[r]
                    if out[h] == 0:
                        out[h] = 1
                        queue[qt] = h
                        qt += 1


@_jit
def least_model(head, pos_ptr, pos_idx, occ_ptr, occ_idx, active, init):
    n_atoms = init.shape[0]
    out = np.zeros(n_atoms, np.uint8)
    missing = np.empty(head.shape[0], np.int32)
    queue = np.empty(n_atoms, np.int32)
    _lhm(head, pos_ptr, pos_idx, occ_ptr, occ_idx, active, init, out, missing, queue)
    return out


@_jit
def _activation(val, neg_ptr, neg_idx, act_lo, act_hi):
    for r in range(act_lo.shape[0]):
        lo = 1
        hi = 1
        for k in range(neg_ptr[r], neg_ptr[r + 1]):
            v = val[neg_idx[k]]
            if v != 0:
                lo = 0
            if v == 1:
                hi = 0
                break
        act_lo[r] = lo
        act_hi[r] = hi


@_jit
def _propagate(val, is_neg, head, pos_ptr, pos_idx, neg_ptr, neg_idx, occ_ptr, occ_idx, init,
               act_lo, act_hi, lower, upper, missing, queue):
    """Tighten a partial assignment; return False on conflict.

    ``lower`` is the least model of rules whose negative body is certainly
    satisfied and ``upper`` that of rules not certainly blocked. Any answer
    set extending ``val`` lies between the two, so atoms in ``lower`` are
    forced true and atoms outside ``upper`` are forced false. Only atoms that
    occur under negation change rule activation, so a bound is recomputed
    only after such an atom was fixed to the matching value.
    """
    n_atoms = val.shape[0]
    redo_lo = True
    redo_hi = True
    while redo_lo or redo_hi:
        _activation(val, neg_ptr, neg_idx, act_lo, act_hi)
        if redo_lo:
            _lhm(head, pos_ptr, pos_idx, occ_ptr, occ_idx, act_lo, init, lower, missing, queue)
        if redo_hi:
            _lhm(head, pos_ptr, pos_idx, occ_ptr, occ_idx, act_hi, init, upper, missing, queue)
        redo_lo = False
        redo_hi = False
        for a in range(n_atoms):
            v = val[a]
            if lower[a]:
                if v == 0:
                    return False
                if v == UNASSIGNED:
                    val[a] = 1
                    if is_neg[a]:
                        redo_hi = True
            elif not upper[a]:
                if v == 1:
                    return False
                if v == UNASSIGNED:
                    val[a] = 0
                    if is_neg[a]:
                        redo_lo = True
    return True


@_jit
def _is_stable(model, head, pos_ptr, pos_idx, neg_ptr, neg_idx, occ_ptr, occ_idx, init,
               act, check, missing, queue):
    """``model == LHM(reduct(P, model))``."""
    n_rules = head.shape[0]
    for r in range(n_rules):
        ok = 1
        for k in range(neg_ptr[r], neg_ptr[r + 1]):
            if model[neg_idx[k]]:
                ok = 0
                break
        act[r] = ok
    _lhm(head, pos_ptr, pos_idx, occ_ptr, occ_idx, act, init, check, missing, queue)
    for a in range(model.shape[0]):
        if check[a] != model[a]:
            return False
    return True


@_jit
def enumerate_models(head, pos_ptr, pos_idx, neg_ptr, neg_idx, occ_ptr, occ_idx, branch,
                     init, limit):
    """All answer sets of the program with ``init`` atoms added as facts.

    Depth-first branch-and-propagate over the atoms that occur under
    negation, lowest id first, false before true. Returns ``(models, complete)``
    where ``models`` is a ``(k, n_atoms)`` uint8 array in enumeration order.
    ``limit < 0`` means no limit.
    """
    n_atoms = init.shape[0]
    n_rules = head.shape[0]
    nb = branch.shape[0]
    act_lo = np.empty(n_rules, np.uint8)
    act_hi = np.empty(n_rules, np.uint8)
    lower = np.empty(n_atoms, np.uint8)
    upper = np.empty(n_atoms, np.uint8)
    missing = np.empty(n_rules, np.int32)
    queue = np.empty(n_atoms, np.int32)
    stack = np.empty((nb + 2, n_atoms), np.int8)
    is_neg = np.zeros(n_atoms, np.uint8)
    for j in range(nb):
        is_neg[branch[j]] = 1
    models = np.empty((4, n_atoms), np.uint8)
    count = 0
    stack[0, :] = UNASSIGNED
    top = 1
    complete = True
    while top > 0:
        top -= 1
        val = stack[top].copy()
        if not _propagate(val, is_neg, head, pos_ptr, pos_idx, neg_ptr, neg_idx, occ_ptr, occ_idx,
                          init, act_lo, act_hi, lower, upper, missing, queue):
            continue
        pick = -1
        for j in range(nb):
            if val[branch[j]] == UNASSIGNED:
                pick = branch[j]
                break
        if pick >= 0:
            stack[top, :] = val
            stack[top, pick] = 1
            stack[top + 1, :] = val
            stack[top + 1, pick] = 0
            top += 2
            continue
        for a in range(n_atoms):
            lower[a] = 1 if val[a] == 1 else 0
        if not _is_stable(lower, head, pos_ptr, pos_idx, neg_ptr, neg_idx, occ_ptr, occ_idx,
                          init, act_lo, upper, missing, queue):
            continue
        if limit >= 0 and count == limit:
            complete = False
            break
        if count == models.shape[0]:
            grown = np.empty((2 * count, n_atoms), np.uint8)
            grown[:count] = models
            models = grown
        models[count, :] = lower
        count += 1
    return models[:count].copy(), complete


@_jit
def _holds(model, ptr, atoms, vals, q):
    for k in range(ptr[q], ptr[q + 1]):
        a = atoms[k]
        truth = 0
        if a >= 0:
            truth = model[a]
        if truth != vals[k]:
            return False
    return True


@_jit
def evaluate_batch(head, pos_ptr, pos_idx, neg_ptr, neg_idx, occ_ptr, occ_idx, branch,
                   fact_ids, choices, q_ptr, q_atoms, q_vals, e_ptr, e_atoms, e_vals):
    """Query flags for each total choice in ``choices``.

    ``flags[b, q]`` holds (Q&E in every answer set, Q&E in some, not-Q&E in
    every, not-Q&E in some); ``counts[b]`` is the number of answer sets.
    """
    n_batch = choices.shape[0]
    n_facts = fact_ids.shape[0]
    n_queries = q_ptr.shape[0] - 1
    n_atoms = occ_ptr.shape[0] - 1
    flags = np.zeros((n_batch, n_queries, 4), np.uint8)
    counts = np.zeros(n_batch, np.int64)
    init = np.zeros(n_atoms, np.uint8)
    for b in range(n_batch):
        init[:] = 0
        for i in range(n_facts):
            if choices[b, i]:
                init[fact_ids[i]] = 1
        models, _ = enumerate_models(head, pos_ptr, pos_idx, neg_ptr, neg_idx, occ_ptr,
                                     occ_idx, branch, init, -1)
        k = models.shape[0]
        counts[b] = k
        if k == 0:
            continue
        for q in range(n_queries):
            qe_all = 1
            qe_some = 0
            nqe_all = 1
            nqe_some = 0
            for m in range(k):
                e = _holds(models[m], e_ptr, e_atoms, e_vals, q)
                t = _holds(models[m], q_ptr, q_atoms, q_vals, q)
                if e and t:
                    qe_some = 1
                else:
                    qe_all = 0
                if e and not t:
                    nqe_some = 1
                else:
                    nqe_all = 0
            flags[b, q, 0] = qe_all
            flags[b, q, 1] = qe_some
            flags[b, q, 2] = nqe_all
            flags[b, q, 3] = nqe_some
    return flags, counts


@_jit
def mh_chain(state, log_p, log_q, flip_u, log_accept_u, p_change):
    """Metropolis chain over total choices with independent bit-flip proposals.

    ``log_p``/``log_q`` are per-fact log-probabilities of true/false. Bits at
    an impossible value (log-probability -inf) are counted separately: a
    proposal with fewer of them is accepted, one with more is rejected.
    Returns ``(samples, final_state, n_accepted)``; rejected steps repeat the
    current state.
    """
    n_steps = flip_u.shape[0]
    n = state.shape[0]
    cur = state.copy()
    out = np.empty((n_steps, n), np.uint8)
    imp = 0
    for i in range(n):
        w = log_p[i] if cur[i] else log_q[i]
        if w == -np.inf:
            imp += 1
    accepted = 0
    for t in range(n_steps):
        delta = 0.0
        new_imp = imp
        for i in range(n):
            if flip_u[t, i] < p_change:
                if cur[i]:
                    w_old = log_p[i]
                    w_new = log_q[i]
                else:
                    w_old = log_q[i]
                    w_new = log_p[i]
                if w_old == -np.inf:
                    new_imp -= 1
                else:
                    delta -= w_old
                if w_new == -np.inf:
                    new_imp += 1
                else:
                    delta += w_new
        if new_imp < imp or (new_imp == imp and log_accept_u[t] < delta):
            for i in range(n):
                if flip_u[t, i] < p_change:
                    cur[i] = 1 - cur[i]
            imp = new_imp
            accepted += 1
        out[t, :] = cur
    return out, cur, accepted


@_jit
def gibbs_chain(state, probs, idx, u):
    """Block Gibbs chain: at step ``t`` redraw bits ``idx[t]`` from their marginals."""
    n_steps = idx.shape[0]
    bk = idx.shape[1]
    cur = state.copy()
    out = np.empty((n_steps, state.shape[0]), np.uint8)
    for t in range(n_steps):
        for j in range(bk):
            i = idx[t, j]
            cur[i] = 1 if u[t, j] < probs[i] else 0
        out[t, :] = cur
    return out, cur
