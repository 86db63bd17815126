import math

import numpy as np
import pytest

from credalasp import kernels
from credalasp.credal import BoundEstimate, Problem
from credalasp.errors import InconsistencyError, ZeroEvidenceError
from credalasp.lang import parse_program
from credalasp.sample import (
    Chain,
    QueryTally,
    SamplerConfig,
    approximate_inference,
    gibbs_step,
    mh_step,
    naive_sample,
    should_stop,
    tally_flags,
    uncertainty,
)
from credalasp.seeding import make_rng
from credalasp.translate import translate
from helpers import TOGGLE


def problem(text):
    return Problem.from_plp(translate(parse_program(text)))


def cfg(**kw):
    base = dict(threshold=None, max_sample=20_000, min_sample=1, check_interval=5000)
    base.update(kw)
    return SamplerConfig(**base)


# --------------------------------------------------------------------- samplers


def test_naive_forced_bits():
    rng = make_rng(1)
    assert naive_sample(rng, [1.0, 1.0, 1.0]).tolist() == [1, 1, 1]
    assert naive_sample(rng, [0.0, 0.0]).tolist() == [0, 0]


def test_naive_bernoulli_frequency():
    rng = make_rng(2)
    draws = [naive_sample(rng, [0.3])[0] for _ in range(20_000)]
    chain = Chain([0.3], SamplerConfig(), 3).draw(100_000)[:, 0]
    tol = 4 * math.sqrt(0.3 * 0.7 / 100_000)
    assert abs(chain.mean() - 0.3) < tol
    assert abs(np.mean(draws) - 0.3) < 4 * math.sqrt(0.21 / 20_000)


def test_naive_marginals():
    probs = np.array([0.05, 0.3, 0.5, 0.77, 0.99])
    draws = Chain(probs, SamplerConfig(), 11).draw(100_000)
    sigma = np.sqrt(probs * (1 - probs) / 100_000)
    assert (np.abs(draws.mean(axis=0) - probs) < 4 * sigma).all()


def test_mh_no_flip_is_accepted():
    state = np.array([1, 0, 1], np.uint8)
    probs = np.array([0.2, 0.5, 0.9])
    lp, lq = np.log(probs), np.log1p(-probs)
    flip = np.full((1, 3), 0.99)
    out, cur, acc = kernels.mh_chain(state, lp, lq, flip, np.array([-1e-300]), 0.3)
    assert out[0].tolist() == [1, 0, 1] and acc == 1


def test_mh_uphill_always_accepted():
    probs = np.array([0.9, 0.5])
    lp, lq = np.log(probs), np.log1p(-probs)
    flip = np.array([[0.0, 0.99]])  # flip fact 0 from 0 to 1: ratio 9
    out, _, acc = kernels.mh_chain(np.zeros(2, np.uint8), lp, lq, flip,
                                   np.array([np.log(0.999999)]), 0.3)
    assert out[0].tolist() == [1, 0] and acc == 1


def test_mh_rejection_repeats_state():
    probs = np.array([0.1])
    lp, lq = np.log(probs), np.log1p(-probs)
    # 0 -> 1 has ratio 1/9; a uniform of 0.5 rejects
    out, cur, acc = kernels.mh_chain(np.zeros(1, np.uint8), lp, lq, np.zeros((2, 1)),
                                     np.log(np.array([0.5, 0.05])), 0.3)
    assert out[:, 0].tolist() == [0, 1] and acc == 1


def test_mh_step_and_gibbs_step_shapes():
    rng = make_rng(4)
    cur = np.array([0, 1, 0, 1], np.uint8)
    probs = [0.2, 0.4, 0.6, 0.8]
    assert mh_step(rng, cur, probs).shape == (4,)
    for _ in range(50):
        nxt = gibbs_step(rng, cur, probs, block_size=1, cursor=2)
        assert np.sum(nxt != cur) <= 1 and (nxt[[0, 1, 3]] == cur[[0, 1, 3]]).all()


def _tv(draws, probs):
    n = len(probs)
    codes = draws.astype(np.int64) @ (1 << np.arange(n))
    emp = np.bincount(codes, minlength=1 << n) / len(draws)
    exact = np.array([math.prod(p if code >> i & 1 else 1 - p for i, p in enumerate(probs))
                      for code in range(1 << n)])
    return 0.5 * np.abs(emp - exact).sum()


@pytest.mark.parametrize("method, extra", [
    ("naive", {}), ("mh", {"p_change": 0.3}), ("gibbs", {"block_size": 1}),
    ("gibbs", {"block_size": 2, "gibbs_scan": "random"}), ("gibbs", {"block_size": 4}),
])
def test_stationary_distribution_small(method, extra):
    probs = [0.15, 0.5, 0.7, 0.9]
    draws = Chain(probs, SamplerConfig(method=method, **extra), 21).draw(60_000)
    assert _tv(draws, probs) < 0.03


def test_gibbs_full_block_matches_naive_marginals():
    probs = np.array([0.2, 0.6, 0.9])
    draws = Chain(probs, SamplerConfig(method="gibbs", block_size=3), 5).draw(50_000)
    sigma = np.sqrt(probs * (1 - probs) / 50_000)
    assert (np.abs(draws.mean(axis=0) - probs) < 4 * sigma).all()


def test_burn_discards_steps():
    c1 = Chain([0.5, 0.5], SamplerConfig(method="mh", burn=0), 8)
    c2 = Chain([0.5, 0.5], SamplerConfig(method="mh", burn=0), 8)
    c3 = Chain([0.5, 0.5], SamplerConfig(method="mh", burn=5), 8)
    full = c1.draw(20)
    assert np.array_equal(c2.draw(20), full)
    # same stream, first five steps thrown away
    assert np.array_equal(c3.draw(15), full[5:])


# -------------------------------------------------------------------- uncertainty


def test_uncertainty_values():
    assert uncertainty(0.5, 10_000, 1.96) == 0.0196
    assert uncertainty(0.5, 40_000, 1.96) == pytest.approx(0.0098, abs=1e-15)
    assert uncertainty(0.0, 17) == 0.0 and uncertainty(1.0, 17) == 0.0
    with pytest.raises(ValueError):
        uncertainty(0.5, 0)


def test_should_stop_examples():
    c = SamplerConfig(threshold=0.02, min_sample=1000, max_sample=100_000)
    t = QueryTally(5000, 5000, 5000, 5000, 10_000)
    b = BoundEstimate(0.5, 0.5, 10_000, 0.0196, 0.0196)
    assert should_stop([t], [b], c, 10_000).reason == "threshold"
    t = QueryTally(50, 50, 0, 0, 50)
    b = BoundEstimate(1.0, 1.0, 50, 0.0, 0.0)
    assert not should_stop([t], [b], c, 50).stop
    assert should_stop([t], [b], c, 100_000).reason == "max_samples"
    assert not should_stop([t], [None], c, 10).stop


def test_tally_flags_counts_evidence_samples():
    flags = np.array([[[1, 1, 0, 0]], [[0, 1, 0, 1]], [[0, 0, 0, 0]]], np.uint8)
    assert tally_flags(flags).tolist() == [[1, 2, 0, 1, 2]]


def test_query_tally_bounds_normalize_by_counted():
    est = QueryTally(70, 100, 0, 30, 100).bounds()
    assert (est.lower, est.upper) == pytest.approx((0.7, 1.0))
    assert est.uncertainty_lower == uncertainty(0.7, 100)
    with pytest.raises(ZeroEvidenceError):
        QueryTally(0, 0, 0, 0, 0).bounds()


# ---------------------------------------------------------------- inference runs


@pytest.mark.parametrize("method", ["naive", "mh", "gibbs"])
def test_toggle_sampling(method):
    res = approximate_inference(problem(TOGGLE), cfg(method=method, max_sample=50_000, seed=3))
    q = res.bounds[0]
    assert abs(q.lower - 0.7) < 3 * uncertainty(0.7, 50_000)
    assert q.upper == 1.0
    assert res.total_drawn == 50_000 and res.stop_reason == "max_samples"


@pytest.mark.parametrize("method", ["naive", "mh", "gibbs"])
def test_single_fact(method):
    res = approximate_inference(problem("0.3::a.\n#query(a)."), cfg(method=method, seed=9))
    b = res.bounds[0]
    assert b.lower == b.upper
    assert abs(b.lower - 0.3) < 3 * uncertainty(0.3, 20_000)


def test_unsatisfiable_evidence():
    with pytest.raises(ZeroEvidenceError):
        approximate_inference(problem("0.3::a.\n#query(a | b:true)."), cfg(max_sample=2000))


def test_inconsistency_aborts():
    with pytest.raises(InconsistencyError):
        approximate_inference(problem("0.5::a.\nq :- not q, a.\n#query(q)."), cfg())


def test_evidence_dependent_counting():
    pr = problem("0.4::a.\n0.5::b.\nc :- a, b.\n#query(c | a:true).\n#query(c).")
    res = approximate_inference(pr, cfg(seed=1))
    t_ev, t_all = res.tallies
    assert t_all.counted == 20_000
    assert abs(t_ev.counted / 20_000 - 0.4) < 4 * math.sqrt(0.24 / 20_000)
    for t in res.tallies:
        assert t.a <= t.b <= t.counted and t.c <= t.d <= t.counted


def test_threshold_stops_at_first_qualifying_checkpoint():
    c = SamplerConfig(threshold=0.02, min_sample=100, max_sample=100_000, check_interval=1000)
    res = approximate_inference(problem("0.3::a.\n#query(a)."), c)
    assert res.stop_reason == "threshold"
    for cp in res.checkpoints[:-1]:
        (b,) = cp.bounds
        assert max(b.uncertainty_lower, b.uncertainty_upper) >= 0.02
    (last,) = res.checkpoints[-1].bounds
    assert last.uncertainty_lower < 0.02 and res.total_drawn == res.checkpoints[-1].total_drawn


def test_min_sample_governs_degenerate_bounds():
    c = SamplerConfig(threshold=0.5, min_sample=3000, max_sample=100_000, check_interval=1000)
    res = approximate_inference(problem("1.0::a.\n#query(a)."), c)
    assert res.total_drawn == 3000


@pytest.mark.parametrize("method", ["naive", "mh", "gibbs"])
def test_deterministic_and_worker_split(method):
    pr = problem(TOGGLE)
    c = cfg(method=method, max_sample=10_001, check_interval=1000, seed=77)
    a = approximate_inference(pr, c, workers=3)
    b = approximate_inference(pr, c, workers=3)
    assert a.bounds == b.bounds and a.tallies == b.tallies
    assert sum(a.worker_counts) == a.total_drawn == 10_001


def test_mh_acceptance_rate_reported():
    res = approximate_inference(problem(TOGGLE), cfg(method="mh", max_sample=5000))
    assert 0 < res.acceptance_rate <= 1


@pytest.mark.parametrize("kw", [
    {"method": "x"}, {"p_change": 0.0}, {"block_size": 0}, {"burn": -1}, {"threshold": 0.0},
    {"percentile": 0.0}, {"min_sample": 5, "max_sample": 4}, {"check_interval": 0},
    {"gibbs_scan": "diagonal"},
])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        SamplerConfig(**kw).validate()


def test_block_size_bounded_by_facts():
    with pytest.raises(ValueError):
        approximate_inference(problem(TOGGLE), cfg(method="gibbs", block_size=2))
