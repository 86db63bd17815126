"""The twelve acceptance criteria, one test each, at their stated tolerances.

Each test prints a ``[PASS]`` or ``[FAIL]`` line; ``conftest.py`` repeats the
lines in the terminal summary. Run standalone with
``python3 tests/test_acceptance.py``.
"""

import math
import random
import sys
import time
from dataclasses import replace

import numpy as np
import pytest

from credalasp.bench import BenchSpec, generate_task, linearity_ratio, run_bench
from credalasp.credal import CredalCounters, credal_bounds, exact_inference
from credalasp.engine import RunConfig, prepare, run
from credalasp.ground import program_from_text
from credalasp.sample import Chain, SamplerConfig, approximate_inference, should_stop, uncertainty
from credalasp.stable import answer_sets, brute_force_answer_sets, is_stratified
from credalasp.translate import translate
from credalasp.lang import parse_program
from helpers import ACCEPTANCE_LINES, TOGGLE, DISJ3, random_propositional

METHODS = ("naive", "mh", "gibbs")


def record(n: int, title: str, ok: bool, detail: str) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {n:>2}: {title} -- {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def sampled(problem, method, n, seed, **kw):
    cfg = SamplerConfig(method=method, threshold=None, max_sample=n, min_sample=1,
                        check_interval=10_000, seed=seed, **kw)
    return approximate_inference(problem, cfg)


def test_c01_toggle_exact():
    prepare(TOGGLE)  # JIT warm-up stays outside the timing
    run(TOGGLE, RunConfig(mode="exact"))
    t0 = time.perf_counter()
    rep = run(TOGGLE, RunConfig(mode="exact"))
    secs = time.perf_counter() - t0
    q, p = rep.bounds
    err = max(abs(q.lower - 0.7), abs(q.upper - 1.0), abs(p.lower), abs(p.upper - 0.3))
    record(1, "toggle program exact", err <= 1e-12 and secs < 1.0,
           f"q=[{q.lower!r}, {q.upper!r}] p=[{p.lower!r}, {p.upper!r}] "
           f"max err {err:.1e}, {secs * 1000:.1f} ms")


def test_c02_guard_cases():
    zero = credal_bounds(CredalCounters(0.0, 0.0, 0.0, 0.4))
    one = credal_bounds(CredalCounters(0.0, 0.4, 0.0, 0.0))
    zero_c = credal_bounds(CredalCounters(0, 0, 0, 7))
    one_c = credal_bounds(CredalCounters(0, 5, 0, 0))
    ok = all((b.lower, b.upper) == (0.0, 0.0) for b in (zero, zero_c)) and \
        all((b.lower, b.upper) == (1.0, 1.0) for b in (one, one_c))
    record(2, "credal bound guard cases", ok,
           f"b+c=0,d>0 -> [{zero.lower}, {zero.upper}]; a+d=0,b>0 -> [{one.lower}, {one.upper}]")


def test_c03_oracle_equivalence():
    rng = random.Random(20240603)
    mismatches = checked = 0
    with_choice = with_neg = 0
    while checked < 200:
        text = random_propositional(rng, rng.randint(2, 12), rng.randint(2, 18))
        gp = program_from_text(text, simplify=False)
        if len(gp.atoms.visible_ids()) > 12:
            continue
        got = {frozenset(s) for s in answer_sets(gp).as_sets(gp)}
        want = {frozenset(s) for s in brute_force_answer_sets(gp).as_sets(gp)}
        mismatches += got != want
        checked += 1
        with_choice += any(r.choice for r in gp.rules)
        with_neg += any(r.neg for r in gp.rules)
    record(3, "answer_sets == brute force", mismatches == 0,
           f"{checked} programs ({with_choice} with choice rules, {with_neg} with negation), "
           f"{mismatches} mismatches")


def test_c04_stratified_collapse():
    worst = 0.0
    all_strat = True
    for seed in range(50):
        text = generate_task(BenchSpec(nodes=6, edges=6 + seed % 5, graph_seed=seed))
        all_strat &= is_stratified(program_from_text(text))
        (b,) = exact_inference(prepare(text)).bounds
        worst = max(worst, b.upper - b.lower)
    record(4, "stratified collapse", all_strat and worst <= 1e-12,
           f"50 programs, all stratified={all_strat}, max upper-lower={worst:.1e}")


def test_c05_exponential_choice_count():
    counts = {}
    secs16 = None
    for n in (6, 10, 16):
        pr = prepare(generate_task(BenchSpec(edges=n, graph_seed=n)))
        t0 = time.perf_counter()
        res = exact_inference(pr)
        if n == 16:
            secs16 = time.perf_counter() - t0
        counts[n] = res.choices_evaluated
    ok = all(counts[n] == 2 ** n for n in counts) and secs16 < 120
    record(5, "2^n choices evaluated", ok, f"counts {counts}, n=16 took {secs16:.2f} s")


def _hits(estimates, target, n):
    tol = 3 * uncertainty(target, n)
    return sum(abs(e - target) <= tol for e in estimates), tol


def test_c06_convergence_stratified():
    pr = prepare(generate_task(BenchSpec(edges=10, graph_seed=6)))
    (exact,) = exact_inference(pr).bounds
    target = exact.lower
    parts, ok = [], True
    for method in METHODS:
        ests = []
        for rep in range(10):
            b = sampled(pr, method, 100_000, seed=1000 + rep).bounds[0]
            ests.append(b.lower)
            ok &= b.lower == b.upper
        hits, tol = _hits(ests, target, 100_000)
        ok &= hits >= 9
        parts.append(f"{method} {hits}/10")
    record(6, "sampler convergence (stratified)", ok,
           f"exact {target:.6f}, 3U={tol:.5f}: " + ", ".join(parts))


def test_c07_convergence_unstratified():
    pr = prepare(TOGGLE)
    parts, ok = [], True
    for method in METHODS:
        good = 0
        for rep in range(10):
            q = sampled(pr, method, 100_000, seed=2000 + rep).bounds[0]
            good += abs(q.lower - 0.7) <= 3 * uncertainty(0.7, 100_000) and q.upper >= 0.999
        ok &= good >= 9
        parts.append(f"{method} {good}/10")
    record(7, "sampler convergence (toggle program)", ok,
           f"3U={3 * uncertainty(0.7, 100_000):.5f}: " + ", ".join(parts))


def _tv(draws, probs):
    codes = draws.astype(np.int64) @ (1 << np.arange(len(probs)))
    emp = np.bincount(codes, minlength=1 << len(probs)) / len(draws)
    exact = np.array([math.prod(p if c >> i & 1 else 1 - p for i, p in enumerate(probs))
                      for c in range(1 << len(probs))])
    return 0.5 * float(np.abs(emp - exact).sum())


def test_c08_mcmc_stationarity():
    probs = [0.2, 0.35, 0.5, 0.65, 0.8]
    mh = Chain(probs, SamplerConfig(method="mh", p_change=0.3), 31).draw(200_000)
    gibbs = Chain(probs, SamplerConfig(method="gibbs", block_size=1), 32).draw(200_000)
    tv_mh, tv_g = _tv(mh, probs), _tv(gibbs, probs)
    record(8, "MCMC stationarity", tv_mh <= 0.02 and tv_g <= 0.02,
           f"TV mh={tv_mh:.4f}, gibbs={tv_g:.4f} (limit 0.02)")


def test_c09_uncertainty_and_stopping():
    u = uncertainty(0.5, 10_000, 1.96)
    zeros = uncertainty(0.0, 123, 1.96) == 0.0 and uncertainty(1.0, 5, 2.5) == 0.0
    cfg = SamplerConfig(method="naive", threshold=0.01, min_sample=1000, max_sample=200_000,
                        check_interval=1000, seed=4)
    pr = prepare(TOGGLE)
    res = approximate_inference(pr, cfg)
    first = None
    for i, cp in enumerate(res.checkpoints):
        # rebuild the rule from the stored bounds, independently of should_stop
        fine = all(
            b is not None
            and all(unc < cfg.threshold and (p not in (0.0, 1.0) or b.samples_counted >= 1000)
                    for p, unc in ((b.lower, b.uncertainty_lower), (b.upper, b.uncertainty_upper)))
            for b in cp.bounds
        )
        if fine:
            first = i
            break
    stop_ok = first == len(res.checkpoints) - 1 and res.stop_reason == "threshold"
    record(9, "uncertainty formula and stopping", u == 0.0196 and zeros and stop_ok,
           f"U(0.5,1e4,1.96)={u!r}, U(0)=U(1)=0: {zeros}, stopped at checkpoint "
           f"{len(res.checkpoints)} ({res.total_drawn} samples), first qualifying "
           f"{None if first is None else first + 1}")


def test_c10_determinism():
    text = generate_task(BenchSpec(edges=12, task="choice", graph_seed=3))
    pr = prepare(text)
    same = True
    for workers in (1, 4):
        for method in METHODS:
            cfg = RunConfig(mode="approximate", workers=workers,
                            sampler=SamplerConfig(method=method, threshold=None,
                                                  max_sample=6000, min_sample=1, seed=99))
            same &= run(text, cfg).comparable() == run(text, cfg).comparable()
    base = exact_inference(pr, workers=1).bounds
    drift = 0.0
    for w in (2, 4, 8):
        for a, b in zip(base, exact_inference(pr, workers=w).bounds):
            drift = max(drift, abs(a.lower - b.lower), abs(a.upper - b.upper))
    record(10, "determinism and parallel consistency", same and drift <= 1e-12,
           f"repeat runs bit-identical={same}, exact drift over workers 1/2/4/8 = {drift:.1e}")


def test_c11_disjunction_translation():
    plp = translate(parse_program(DISJ3))
    probs = plp.probabilities
    bounds = exact_inference(prepare(DISJ3)).bounds
    marg = [b.lower for b in bounds]
    err = max(max(abs(b.lower - m), abs(b.upper - m)) for b, m in zip(bounds, (0.2, 0.3, 0.5)))
    record(11, "three-way disjunction translation", probs == [0.2, 0.375, 1.0] and err <= 1e-12,
           f"fact probabilities {probs}, marginals {marg}, max err {err:.1e}")


def test_c12_convergence_shape():
    details, ok = [], True
    for task in ("stratified", "choice"):
        spec = BenchSpec(edges=20, task=task, graph_seed=9,
                         schedule=(1000, 10_000, 100_000), repetitions=10)
        rows, summary = run_bench(spec, SamplerConfig(seed=12))
        for method in METHODS:
            s = [x for x in summary if x.method == method]
            lo = [x.lower_std for x in s]
            up = [x.upper_std for x in s]
            dec = all(a > b for a, b in zip(lo, lo[1:])) and all(a > b for a, b in zip(up, up[1:]))
            ratio = linearity_ratio(summary, method)
            ok &= dec and ratio <= 2.0
            details.append(f"{task}/{method}: std {lo[0]:.4f}>{lo[1]:.4f}>{lo[2]:.4f} "
                           f"{'ok' if dec else 'NOT decreasing'}, time ratio {ratio:.2f}")
        if task == "stratified":
            ok &= all(r.lower == r.upper for r in rows)
    record(12, "convergence shape", ok, "; ".join(details))


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s"]))
