"""Pure-numpy kernels, selected with ``CREDALASP_BACKEND=numpy``.

Same signatures and bit-identical results as the numba kernels. The least
model is computed by vectorised rounds of the immediate-consequence step
(one ``bincount`` per round) instead of counter-based chaining; the search and
chain loops stay in Python, so this path is meant for debugging and for
checking the compiled one.
"""

import numpy as np

UNASSIGNED = -1


def _rule_index(ptr):
    return np.repeat(np.arange(ptr.shape[0] - 1), np.diff(ptr))


def _lhm(head, pos_ptr, pos_idx, pos_rule, active, init):
    n_rules = head.shape[0]
    pos_len = np.diff(pos_ptr)
    x = init.astype(bool)
    act = active.astype(bool)
    while True:
        true_count = np.bincount(pos_rule, weights=x[pos_idx], minlength=n_rules)
        fire = act & (true_count == pos_len)
        new = x.copy()
        new[head[fire]] = True
        if np.array_equal(new, x):
            return x
        x = new


def least_model(head, pos_ptr, pos_idx, occ_ptr, occ_idx, active, init):
    return _lhm(head, pos_ptr, pos_idx, _rule_index(pos_ptr), active, init).astype(np.uint8)


class _Program:
    def __init__(self, head, pos_ptr, pos_idx, neg_ptr, neg_idx):
        self.head = head
        self.pos_ptr = pos_ptr
        self.pos_idx = pos_idx
        self.pos_rule = _rule_index(pos_ptr)
        self.neg_idx = neg_idx
        self.neg_rule = _rule_index(neg_ptr)
        self.n_rules = head.shape[0]

    def blocked_counts(self, mask):
        return np.bincount(self.neg_rule, weights=mask[self.neg_idx], minlength=self.n_rules)

    def lhm(self, active, init):
        return _lhm(self.head, self.pos_ptr, self.pos_idx, self.pos_rule, active, init)

    def propagate(self, val, init) -> bool:
        while True:
            act_lo = self.blocked_counts(val != 0) == 0
            act_hi = self.blocked_counts(val == 1) == 0
            lower = self.lhm(act_lo, init)
            upper = self.lhm(act_hi, init)
            if np.any(lower & (val == 0)) or np.any(~upper & (val == 1)):
                return False
            free = val == UNASSIGNED
            set_true = lower & free
            set_false = ~upper & free
            if not (set_true.any() or set_false.any()):
                return True
            val[set_true] = 1
            val[set_false] = 0

    def is_stable(self, model, init) -> bool:
        act = self.blocked_counts(model) == 0
        return np.array_equal(self.lhm(act, init), model)

    def enumerate(self, branch, init, limit):
        n_atoms = init.shape[0]
        stack = [np.full(n_atoms, UNASSIGNED, np.int8)]
        models = []
        complete = True
        while stack:
            val = stack.pop().copy()
            if not self.propagate(val, init):
                continue
            free = branch[val[branch] == UNASSIGNED]
            if free.size:
                pick = free[0]
                hi = val.copy()
                hi[pick] = 1
                lo = val.copy()
                lo[pick] = 0
                stack.append(hi)
                stack.append(lo)
                continue
            model = val == 1
            if not self.is_stable(model, init):
                continue
            if 0 <= limit == len(models):
                complete = False
                break
            models.append(model.astype(np.uint8))
        if models:
            return np.stack(models), complete
        return np.zeros((0, n_atoms), np.uint8), complete


def enumerate_models(head, pos_ptr, pos_idx, neg_ptr, neg_idx, occ_ptr, occ_idx, branch,
                     init, limit):
    prog = _Program(head, pos_ptr, pos_idx, neg_ptr, neg_idx)
    return prog.enumerate(branch, init, limit)


def _holds(models, ptr, atoms, vals, q):
    sl = slice(ptr[q], ptr[q + 1])
    a = atoms[sl]
    if a.size == 0:
        return np.ones(models.shape[0], bool)
    truth = np.where(a >= 0, models[:, np.maximum(a, 0)], 0)
    return np.all(truth == vals[sl], axis=1)


def evaluate_batch(head, pos_ptr, pos_idx, neg_ptr, neg_idx, occ_ptr, occ_idx, branch,
                   fact_ids, choices, q_ptr, q_atoms, q_vals, e_ptr, e_atoms, e_vals):
    prog = _Program(head, pos_ptr, pos_idx, neg_ptr, neg_idx)
    n_atoms = occ_ptr.shape[0] - 1
    n_queries = q_ptr.shape[0] - 1
    flags = np.zeros((choices.shape[0], n_queries, 4), np.uint8)
    counts = np.zeros(choices.shape[0], np.int64)
    for b in range(choices.shape[0]):
        init = np.zeros(n_atoms, bool)
        init[fact_ids[choices[b].astype(bool)]] = True
        models, _ = prog.enumerate(branch, init, -1)
        counts[b] = models.shape[0]
        if models.shape[0] == 0:
            continue
        for q in range(n_queries):
            e = _holds(models, e_ptr, e_atoms, e_vals, q)
            t = _holds(models, q_ptr, q_atoms, q_vals, q)
            qe = e & t
            nqe = e & ~t
            flags[b, q] = (qe.all(), qe.any(), nqe.all(), nqe.any())
    return flags, counts


def mh_chain(state, log_p, log_q, flip_u, log_accept_u, p_change):
    cur = state.astype(np.uint8).copy()
    out = np.empty((flip_u.shape[0], cur.shape[0]), np.uint8)
    weight = np.where(cur == 1, log_p, log_q)
    imp = int(np.sum(weight == -np.inf))
    accepted = 0
    lp = log_p.tolist()
    lq = log_q.tolist()
    for t in range(flip_u.shape[0]):
        flips = np.flatnonzero(flip_u[t] < p_change)
        delta = 0.0
        new_imp = imp
        # sequential accumulation keeps the sum identical to the compiled kernel
        for i in flips.tolist():
            w_old, w_new = (lp[i], lq[i]) if cur[i] else (lq[i], lp[i])
            if w_old == -np.inf:
                new_imp -= 1
            else:
                delta -= w_old
            if w_new == -np.inf:
                new_imp += 1
            else:
                delta += w_new
        if new_imp < imp or (new_imp == imp and log_accept_u[t] < delta):
            cur[flips] = 1 - cur[flips]
            imp = new_imp
            accepted += 1
        out[t] = cur
    return out, cur, accepted


def gibbs_chain(state, probs, idx, u):
    cur = state.astype(np.uint8).copy()
    out = np.empty((idx.shape[0], cur.shape[0]), np.uint8)
    for t in range(idx.shape[0]):
        cur[idx[t]] = u[t] < probs[idx[t]]
        out[t] = cur
    return out, cur
