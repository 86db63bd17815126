import csv
import io
import json

import pytest

from credalasp.bench import (
    BenchSpec,
    DATA_HEADER,
    generate_task,
    read_bench_csv,
    run_bench,
    write_bench_csv,
)
from credalasp.cli import main
from credalasp.engine import run, RunConfig
from credalasp.errors import SpecError
from helpers import TOGGLE


@pytest.fixture
def toggle(tmp_path):
    path = tmp_path / "toggle.plp"
    path.write_text(TOGGLE)
    return path


def test_solve_exact_text(toggle, capsys):
    assert main(["solve", str(toggle), "--mode", "exact"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "q: [0.700000, 1.000000]"
    assert out[1] == "p: [0.000000, 0.300000]"


def test_solve_approx(toggle, capsys):
    code = main(["solve", str(toggle), "--mode", "approx", "--method", "naive",
                 "--max-samples", "100000", "--seed", "7", "--threshold", "0"])
    assert code == 0
    line = capsys.readouterr().out.splitlines()[0]
    lo = float(line.split("[")[1].split(",")[0])
    assert abs(lo - 0.7) < 0.02 and "uncertainty" in line and "samples 100000" in line


def test_solve_json_mirrors_record(toggle, capsys):
    assert main(["solve", str(toggle), "--format", "json"]) == 0
    recs = json.loads(capsys.readouterr().out)
    assert set(recs[0]) == {"query", "lower", "upper", "uncertainty_lower", "uncertainty_upper",
                            "samples", "mode", "method", "elapsed"}
    assert recs[0]["query"] == "q" and abs(recs[0]["lower"] - 0.7) < 1e-12


def test_solve_csv(toggle, capsys):
    assert main(["solve", str(toggle), "--format", "csv"]) == 0
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert [r["query"] for r in rows] == ["q", "p"]


def test_missing_file(tmp_path, capsys):
    assert main(["solve", str(tmp_path / "missing.plp")]) == 2
    assert "missing.plp" in capsys.readouterr().err


def test_syntax_error_has_location(tmp_path, capsys):
    path = tmp_path / "bad.plp"
    path.write_text("0.3::a.\nq :- a b.\n")
    assert main(["solve", str(path)]) == 2
    err = capsys.readouterr().err
    assert "bad.plp" in err and "line 2" in err


def test_inconsistent_and_zero_evidence(tmp_path):
    p = tmp_path / "inc.plp"
    p.write_text("0.3::a.\nq :- not q, a.\n#query(q).\n")
    assert main(["solve", str(p)]) == 3
    p.write_text("0.3::a.\n#query(a | b:true).\n")
    assert main(["solve", str(p)]) == 3


def test_usage_errors(toggle):
    assert main([]) == 1
    assert main(["solve", str(toggle), "--mode", "bogus"]) == 1
    assert main(["solve", str(toggle), "--max-samples", "ten"]) == 1
    assert main(["solve", str(toggle), "--mode", "approx", "--p-change", "2"]) == 1
    assert main(["solve", str(toggle), "--exact-cap", "0"]) == 1


def test_generate_program_shape(capsys):
    assert main(["generate", "--edges", "2", "--graph-seed", "3"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 6
    assert all("::edge(" in l for l in lines[:2])
    assert lines[2] == "node(1..6)."
    assert lines[3] == "path(X,Y) :- path(X,Z), path(Z, Y), Y != Z."
    assert lines[4] == "path(X,Y) :- node(X), node(Y), edge(X,Y)."
    assert lines[5] == "#query(path(1,5))."


def test_generate_choice_task():
    text = generate_task(BenchSpec(edges=5, task="choice", choice_nodes=(2, 3)))
    assert "{node(2)}." in text and "{node(3)}." in text and "node(1)." in text


def test_generate_deterministic_and_valid():
    spec = BenchSpec(edges=12, graph_seed=9)
    text = generate_task(spec)
    assert text == generate_task(spec) and text != generate_task(BenchSpec(edges=12, graph_seed=10))
    edges = [l for l in text.splitlines() if "::edge" in l]
    pairs = [l.split("edge(")[1].rstrip(").") for l in edges]
    assert len(set(pairs)) == 12
    for l in edges:
        prob, rest = l.split("::")
        assert len(prob.split(".")[1]) == 4 and 0 < float(prob) < 1
        i, j = rest[5:-2].split(", ")
        assert i != j


def test_empty_graph_has_no_path():
    rep = run(generate_task(BenchSpec(edges=0)), RunConfig(mode="exact"))
    assert (rep.bounds[0].lower, rep.bounds[0].upper) == (0.0, 0.0)


@pytest.mark.parametrize("kw", [{"edges": 31}, {"edges": -1}, {"nodes": 4, "edges": 2},
                                {"edges": 2, "repetitions": 0}, {"edges": 2, "schedule": ()},
                                {"edges": 2, "choice_nodes": (9,)}])
def test_bench_spec_validation(kw):
    with pytest.raises(SpecError):
        generate_task(BenchSpec(**kw))


def test_generate_impossible_edges_exit_code():
    assert main(["generate", "--edges", "40"]) == 1


def test_bench_rows_and_summary(tmp_path):
    out = tmp_path / "b.csv"
    assert main(["bench", "--edges", "6", "--task", "both", "--schedule", "200,400",
                 "--reps", "2", "-o", str(out)]) == 0
    for task in ("stratified", "choice"):
        rows, summary = read_bench_csv(tmp_path / f"b_{task}.csv")
        assert len(rows) == 12 and len(summary) == 6
        assert [(r.method, r.samples, r.repetition) for r in rows] == sorted(
            [(r.method, r.samples, r.repetition) for r in rows],
            key=lambda k: (["naive", "mh", "gibbs"].index(k[0]), k[1], k[2]))
        if task == "stratified":
            assert all(r.lower == r.upper for r in rows)
    text = (tmp_path / "b_stratified.csv").read_text()
    assert text.splitlines()[0] == ",".join(DATA_HEADER)
    assert "\n\nmethod,samples,runs," in text


def test_bench_csv_round_trip():
    rows, summary = run_bench(BenchSpec(edges=5, schedule=(100,), repetitions=2))
    buf = io.StringIO()
    write_bench_csv(rows, summary, buf)
    buf.seek(0)
    assert read_bench_csv(buf) == (rows, summary)
