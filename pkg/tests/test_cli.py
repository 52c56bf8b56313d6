import csv
import subprocess
import sys

import pytest

from tailmap.bench import synth_dataset
from tailmap.cli import main, split_distparams
from tailmap.errors import TailmapError
from tailmap.seqio import SeqRecord, load_modifications, read_fasta, write_fasta


@pytest.fixture
def refs(tmp_path):
    path = tmp_path / "refs.fasta"
    write_fasta(synth_dataset(25, 80, 11), path)
    return path


def run(argv):
    try:
        return main([str(a) for a in argv])
    except SystemExit as exc:
        return exc.code


def test_split_distparams():
    spec, window = split_distparams("gamma", [125.0, 1.0, 0.0, 250.0])
    assert spec.params == (125.0, 1.0) and (window.left, window.right) == (0.0, 250.0)
    spec, window = split_distparams("exponential", [3.0])
    assert spec.params == (3.0,) and window.left is None
    with pytest.raises(TailmapError):
        split_distparams("gamma", [1.0, 2.0, 3.0])


def test_simulate_tails_full_invocation(tmp_path, capsys, caplog):
    src = tmp_path / "myseq.fasta"
    write_fasta(synth_dataset(1648, 30, 1), src)
    code = run(["simulate-tails", "--fastafile", src, "--taildist", "gamma",
                "--distparams", 125.0, 1.0, 0.0, 250.0, "--maxseqs", 1000, "--modformat", "YAML",
                "--seed", 4, "--outdir", tmp_path / "out", "--numreps", 1, "--readlen", 100])
    assert code == 0
    printed = capsys.readouterr()
    assert "--numreps is accepted for compatibility and ignored" in caplog.text
    fastas = sorted((tmp_path / "out").glob("*.fasta"))
    assert [len(read_fasta(p)) for p in fastas] == [1000, 648]
    assert len(load_modifications(tmp_path / "out" / "myseq_polyA_mods.yaml")) == 1648
    assert all(str(p) in printed.out for p in fastas)


def test_simulate_tails_errors(tmp_path, refs, capsys):
    assert run(["simulate-tails"]) == 2
    assert run(["simulate-tails", "--fastafile", refs, "--taildist", "bogus", "--distparams", 1, 2,
                "--outdir", tmp_path]) == 1
    assert "bogus" in capsys.readouterr().err
    assert run(["simulate-tails", "--fastafile", refs, "--modformat", "xml"]) == 2
    assert run(["simulate-tails", "--fastafile", tmp_path / "nope.fa", "--outdir", tmp_path]) == 1


def test_simulate_then_trim_with_ledger(tmp_path, capsys):
    src = tmp_path / "in.fasta"
    write_fasta([SeqRecord(f"s{i}", "CGT" * 20) for i in range(40)], src)
    assert run(["simulate-tails", "--fastafile", src, "--taildist", "lognormal",
                "--distparams", 4.8283137373023015, 1.0, 0.0, 250.0, "--outdir", tmp_path]) == 0
    capsys.readouterr()
    assert run(["trim", "--input", tmp_path / "in_polyA_1.fasta", "--ledger", tmp_path / "in_polyA_mods.json",
                "--outdir", tmp_path / "trim"]) == 0
    out = capsys.readouterr().out
    for alg in ("classic", "modified", "regex", "changepoint"):
        assert f"[{alg}]" in out
    classic = [line for line in out.splitlines() if line.startswith("classic\t")]
    assert classic == ["classic\t40\t1.0000\t0.0000"]
    trimmed = read_fasta(tmp_path / "trim" / "in_polyA_1.classic.trimmed.fasta")
    assert all(r.seq == "CGT" * 20 for r in trimmed)
    report = list(csv.reader((tmp_path / "trim" / "in_polyA_1.trim.tsv").open(), delimiter="\t"))
    assert report[0] == ["id", "algorithm", "tail_length", "statistic"] and len(report) == 1 + 4 * 40


def test_trim_single_algorithm_and_knobs(tmp_path, capsys):
    src = tmp_path / "x.fasta"
    write_fasta([SeqRecord("a", "CCAAAAA")], src)
    assert run(["trim", "--input", src, "--algorithm", "changepoint", "--odds", 100]) == 0
    assert (tmp_path / "x.changepoint.trimmed.fasta").read_text() == ">a\nCC\n"
    assert run(["trim", "--input", src, "--algorithm", "changepoint", "--p-tail", 0.1]) == 1


def test_trim_empty_input(tmp_path, capsys):
    src = tmp_path / "empty.fasta"
    src.write_text("")
    assert run(["trim", "--input", src]) == 1
    assert "no sequences" in capsys.readouterr().err


def test_trim_bad_algorithm(tmp_path, refs):
    assert run(["trim", "--input", refs, "--algorithm", "fastest"]) == 2


def test_makedb_and_map(tmp_path, refs, capsys):
    assert run(["makedb", "--fasta", refs, "--location", tmp_path / "db", "--name", "r"]) == 0
    out1, out4 = tmp_path / "m1.tsv", tmp_path / "m4.tsv"
    assert run(["map", "--queries", refs, "--location", tmp_path / "db", "--name", "r", "--output", out1]) == 0
    assert run(["map", "--queries", refs, "--location", tmp_path / "db", "--name", "r", "--workers", 4,
                "--threads", 3, "--chunk-size", 2, "--flow", "linearlinear", "--output", out4]) == 0
    rows = [line.split("\t") for line in out1.read_text().splitlines()]
    assert len(rows) == 25 and all(q == r and d == "0" for q, r, d in rows)
    assert out1.read_bytes() == out4.read_bytes()


def test_map_disjoint_query_unmapped(tmp_path, refs, capsys):
    run(["makedb", "--fasta", refs, "--location", tmp_path, "--name", "r", "--per-file"])
    queries = tmp_path / "q.fasta"
    write_fasta([SeqRecord("q1", "N" * 10)], queries)
    capsys.readouterr()
    assert run(["map", "--queries", queries, "--location", tmp_path, "--name", "r", "--max-distance", 0]) == 0
    assert capsys.readouterr().out == "q1\t*\tinf\n"


def test_map_threads_from_environment(tmp_path, refs, monkeypatch, capsys):
    run(["makedb", "--fasta", refs, "--location", tmp_path, "--name", "r"])
    capsys.readouterr()
    monkeypatch.setenv("SEQMAP_THREADS", "3")
    assert run(["map", "--queries", refs, "--location", tmp_path, "--name", "r"]) == 0
    assert capsys.readouterr().out.count("\n") == 25


def test_map_usage_and_runtime_errors(tmp_path, refs):
    assert run(["map", "--queries", refs]) == 2
    assert run(["map", "--queries", refs, "--location", tmp_path, "--name", "r", "--mode", "HW"]) == 2
    assert run(["map", "--queries", refs, "--location", tmp_path, "--name", "absent"]) == 1
    assert run(["map", "--queries", refs, "--location", tmp_path, "--name", "r", "--workers", 0]) == 2


def test_bench_grid(tmp_path, capsys):
    path = tmp_path / "grid.csv"
    assert run(["bench", "grid", "--count", 8, "--length", 40, "--workers", 1, 2,
                "--threads", 1, 2, "--csv", path]) == 0
    assert len(list(csv.DictReader(path.open()))) == 4
    assert "top 5%" in capsys.readouterr().out


def test_bench_trim(tmp_path, capsys):
    path = tmp_path / "trim.tsv"
    assert run(["bench", "trim", "--lengths", 100, 200, "--repetitions", 5, "--tsv", path]) == 0
    assert len(path.read_text().splitlines()) == 1 + 2 * 4


def test_bench_requires_kind():
    assert run(["bench"]) == 2


def test_console_entry_point(refs):
    proc = subprocess.run([sys.executable, "-m", "tailmap", "trim", "--input", str(refs), "--algorithm", "regex"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "[regex]" in proc.stdout
    proc = subprocess.run([sys.executable, "-m", "tailmap"], capture_output=True, text=True)
    assert proc.returncode == 2 and "usage" in proc.stderr
