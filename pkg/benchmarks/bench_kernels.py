"""Compare the numba and numpy kernel backends.

Times batch evaluation of total choices (the stable-model search per choice)
and the MH / Gibbs chain kernels on a generated path-graph program, checks
that both backends return identical arrays, and prints a small table.

    python3 benchmarks/bench_kernels.py [--edges 20] [--task choice] [--batch 2000]
"""

import argparse
import time

import numpy as np

from credalasp.bench import BenchSpec, generate_task
from credalasp.engine import prepare
from credalasp.kernels import get_backend
from credalasp.seeding import make_rng


def best_of(fn, repeat):
    times = []
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--edges", type=int, default=20)
    ap.add_argument("--task", choices=("stratified", "choice"), default="choice")
    ap.add_argument("--batch", type=int, default=2000)
    ap.add_argument("--steps", type=int, default=200_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    pr = prepare(generate_task(BenchSpec(edges=args.edges, task=args.task, graph_seed=9)))
    rng = make_rng(0)
    choices = (rng.random((args.batch, pr.n_facts)) < pr.probabilities).astype(np.uint8)
    eval_args = (*pr.arrays.program_args, pr.fact_ids, choices, *pr.query_arrays.args)

    n = pr.n_facts
    u = rng.random((args.steps, n + 1))
    flip = np.ascontiguousarray(u[:, :n])
    log_acc = np.log(u[:, n])
    idx = (np.arange(args.steps)[:, None] % n).astype(np.int64)
    gu = rng.random((args.steps, 1))
    start = np.zeros(n, np.uint8)

    jobs = {
        f"evaluate_batch ({args.batch} choices)":
            lambda be: be.evaluate_batch(*eval_args),
        f"mh_chain ({args.steps} steps)":
            lambda be: be.mh_chain(start.copy(), pr.log_p, pr.log_q, flip, log_acc, 0.3),
        f"gibbs_chain ({args.steps} steps)":
            lambda be: be.gibbs_chain(start.copy(), pr.probabilities, idx, gu),
    }

    print(f"program: {args.task}, {args.edges} edges, {pr.gp.herbrand_size} ground atoms, "
          f"{len(pr.gp.rules)} ground rules")
    print(f"{'kernel':<34}{'numba s':>10}{'numpy s':>10}{'speedup':>9}  equal")
    nb, np_ = get_backend("numba"), get_backend("numpy")
    for name, job in jobs.items():
        job(nb)  # compile
        t_nb, out_nb = best_of(lambda: job(nb), args.repeat)
        t_np, out_np = best_of(lambda: job(np_), 1)
        equal = all(np.array_equal(a, b) for a, b in zip(out_nb, out_np))
        print(f"{name:<34}{t_nb:>10.4f}{t_np:>10.4f}{t_np / t_nb:>9.1f}  {equal}")


if __name__ == "__main__":
    main()
