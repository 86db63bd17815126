"""Command-line front end.

    credalasp solve FILE [--mode exact|approx] [--method naive|mh|gibbs] ...
    credalasp generate --edges N [--task stratified|choice] [--graph-seed S]
    credalasp bench --edges N [--task stratified|choice|both] -o out.csv

Exit codes: 0 success, 1 usage error, 2 program error (including unreadable
files), 3 inconsistent program or zero-measure evidence.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import asdict, fields
from pathlib import Path

from .bench import TASKS, BenchSpec, bench, generate_task
from .credal import DEFAULT_EXACT_CAP
from .engine import OutputRecord, RunConfig, RunReport, prepare, run_problem
from .errors import CapExceededError, ProgramError, SemanticError, SpecError
from .sample import GIBBS_SCANS, METHODS, SamplerConfig

EXIT_OK, EXIT_USAGE, EXIT_PROGRAM, EXIT_SEMANTIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(float(x)) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of integers: {text!r}")


def _sampler_flags(p: argparse.ArgumentParser) -> None:
    d = SamplerConfig()
    p.add_argument("--method", choices=METHODS, default=d.method)
    p.add_argument("--threshold", type=float, default=d.threshold,
                   help="stop once every uncertainty is below this (0 disables)")
    p.add_argument("--percentile", type=float, default=d.percentile)
    p.add_argument("--min-samples", type=int, default=d.min_sample)
    p.add_argument("--max-samples", type=int, default=d.max_sample)
    p.add_argument("--burn", type=int, default=d.burn)
    p.add_argument("--p-change", type=float, default=d.p_change)
    p.add_argument("--block-size", type=int, default=d.block_size)
    p.add_argument("--gibbs-scan", choices=GIBBS_SCANS, default=d.gibbs_scan)
    p.add_argument("--check-interval", type=int, default=d.check_interval)
    p.add_argument("--seed", type=int, default=d.seed)
    p.add_argument("--workers", type=int, default=1)


def _sampler_config(ns) -> SamplerConfig:
    return SamplerConfig(
        method=ns.method, p_change=ns.p_change, block_size=ns.block_size, burn=ns.burn,
        threshold=ns.threshold if ns.threshold and ns.threshold > 0 else None,
        percentile=ns.percentile, min_sample=min(ns.min_samples, ns.max_samples),
        max_sample=ns.max_samples, seed=ns.seed, check_interval=ns.check_interval,
        gibbs_scan=ns.gibbs_scan,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="credalasp", description="Credal inference for probabilistic ASP.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", help="compute query bounds for a program file")
    s.add_argument("file")
    s.add_argument("--mode", choices=("exact", "approx"), default="exact")
    s.add_argument("--format", choices=("text", "json", "csv"), default="text")
    s.add_argument("--exact-cap", type=int, default=DEFAULT_EXACT_CAP,
                   help="refuse exact mode above this many probabilistic facts")
    s.add_argument("--no-simplify", action="store_true",
                   help="instantiate rules over every constant instead of derivable atoms")
    _sampler_flags(s)

    g = sub.add_parser("generate", help="print a random path-graph program")
    _task_flags(g, allow_both=False)
    g.add_argument("-o", "--output")

    b = sub.add_parser("bench", help="sampler convergence benchmark to CSV")
    _task_flags(b, allow_both=True)
    b.add_argument("--schedule", type=_int_list, default=(1000, 10_000, 100_000))
    b.add_argument("--reps", type=int, default=10)
    b.add_argument("--methods", default=",".join(METHODS))
    b.add_argument("-o", "--output", required=True,
                   help="CSV path; with --task both, one file per task is written")
    _sampler_flags(b)
    return parser


def _task_flags(p: argparse.ArgumentParser, allow_both: bool) -> None:
    p.add_argument("--nodes", type=int, default=6)
    p.add_argument("--edges", type=int, required=True)
    p.add_argument("--task", choices=TASKS + (("both",) if allow_both else ()),
                   default="stratified")
    p.add_argument("--graph-seed", type=int, default=0)
    p.add_argument("--choice-nodes", type=_int_list, default=(2, 3))


# --------------------------------------------------------------------- output


def format_text(report: RunReport) -> str:
    lines = []
    for rec in report.records():
        line = f"{rec.query}: [{rec.lower:.6f}, {rec.upper:.6f}]"
        if rec.mode == "approximate":
            line += (f"  uncertainty [{rec.uncertainty_lower:.6f}, {rec.uncertainty_upper:.6f}]"
                     f"  samples {rec.samples}")
        lines.append(line)
    return "\n".join(lines)


def format_json(report: RunReport) -> str:
    return json.dumps([asdict(r) for r in report.records()], indent=2)


def format_csv(report: RunReport) -> str:
    import io

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    names = [f.name for f in fields(OutputRecord)]
    w.writerow(names)
    for rec in report.records():
        w.writerow(["" if getattr(rec, k) is None else getattr(rec, k) for k in names])
    return buf.getvalue().rstrip("\n")


FORMATTERS = {"text": format_text, "json": format_json, "csv": format_csv}


# ------------------------------------------------------------------- commands


def _solve(ns) -> int:
    try:
        text = Path(ns.file).read_text()
    except OSError as exc:
        raise FileError(f"{ns.file}: cannot read file: {exc.strerror or exc}") from exc
    config = RunConfig(
        mode="exact" if ns.mode == "exact" else "approximate",
        sampler=_sampler_config(ns), workers=ns.workers, exact_cap=ns.exact_cap,
    )
    if ns.mode == "approx":
        config.sampler.validate()
    problem = prepare(text, simplify=not ns.no_simplify)
    report = run_problem(problem, config)
    print(FORMATTERS[ns.format](report))
    return EXIT_OK


def _spec(ns, task: str, with_schedule: bool) -> BenchSpec:
    extra = {}
    if with_schedule:
        extra = dict(schedule=tuple(ns.schedule), repetitions=ns.reps,
                     methods=tuple(m.strip() for m in ns.methods.split(",") if m.strip()))
    spec = BenchSpec(nodes=ns.nodes, edges=ns.edges, task=task, graph_seed=ns.graph_seed,
                     choice_nodes=tuple(ns.choice_nodes), **extra)
    spec.validate()
    return spec


def _generate(ns) -> int:
    text = generate_task(_spec(ns, ns.task, False))
    if ns.output:
        Path(ns.output).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _bench(ns) -> int:
    tasks = TASKS if ns.task == "both" else (ns.task,)
    out = Path(ns.output)
    base = _sampler_config(ns)
    for task in tasks:
        path = out if len(tasks) == 1 else out.with_name(f"{out.stem}_{task}{out.suffix}")
        bench(_spec(ns, task, True), base, path, ns.workers)
        print(f"wrote {path}")
    return EXIT_OK


class FileError(Exception):
    pass


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        ns = build_parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    source = getattr(ns, "file", None)
    prefix = f"{source}: " if source else ""
    try:
        return {"solve": _solve, "generate": _generate, "bench": _bench}[ns.command](ns)
    except FileError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PROGRAM
    except ProgramError as exc:
        print(f"error: {prefix}{exc}", file=sys.stderr)
        return EXIT_PROGRAM
    except SemanticError as exc:
        print(f"error: {prefix}{exc}", file=sys.stderr)
        return EXIT_SEMANTIC
    except (CapExceededError, SpecError, ValueError) as exc:
        print(f"usage error: {prefix}{exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
