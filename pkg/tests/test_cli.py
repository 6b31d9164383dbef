import csv
import hashlib
import os
import subprocess
import sys

import numpy as np
import pytest

from golden import (LATIN_FIG_TARGET, MINOR_FIG_HOST, MINOR_FIG_TARGET, SQUARE_FIG_BEDGES,
                    SQUARE_FIG_EDGES, SQUARE_FIG_RESULT, SQUARE_FIG_TREE, TWD_FIG_BAD_BEDGES,
                    TWD_FIG_TREE, adjacency, latin_fig_host, named_decomposition)
from twinmul import cli, square
from twinmul.matprod import DenseMatrix, dump_fqm, parse_fqm
from twinmul.minors import dump_msc, parse_msc
from twinmul.trigraph import dump_ctr
from twinmul.twindec import dump_twd, materialize, parse_twd, twd_to_seq


def put(path, text):
    path.write_text(text)
    return str(path)


def digest(path):
    return hashlib.sha256(open(path, "rb").read()).hexdigest()


@pytest.fixture
def fig6(tmp_path):
    D = named_decomposition(SQUARE_FIG_TREE, SQUARE_FIG_BEDGES, "1234567")
    return put(tmp_path / "g.twd", dump_twd(D))


def test_square_validate_and_diff(tmp_path, fig6, capsys):
    out = str(tmp_path / "sq.twd")
    assert cli.run(["square", "--twd", fig6, "--out", out]) == 0
    assert cli.run(["validate", "--twd", out]) == 0
    M = materialize(parse_twd(open(out).read()))
    want = adjacency(SQUARE_FIG_RESULT, "1234567")
    assert (M == want).all()


def test_query_prints_value(fig6, capsys):
    assert cli.run(["query", "--twd", fig6, "--u", "3", "--v", "5"]) == 0
    assert capsys.readouterr().out.strip() == "0"
    assert cli.run(["query", "--twd", fig6, "--u", "0", "--v", "1"]) == 0
    assert capsys.readouterr().out.strip() == "1"


def test_report_lines(tmp_path, fig6, capsys):
    out = str(tmp_path / "sq.twd")
    assert cli.run(["--report", "square", "--twd", fig6, "--out", out]) == 0
    lines = [ln for ln in capsys.readouterr().out.splitlines() if ln.startswith("#")]
    keys = dict(ln[1:].split("=", 1) for ln in lines)
    assert keys["n"] == "7" and keys["mode"] == "modular" and int(keys["outWidth"]) >= 0


def test_distance_mode(tmp_path, fig6):
    out = str(tmp_path / "d.twd")
    assert cli.run(["square", "--twd", fig6, "--out", out, "--mode", "distance"]) == 0
    M = materialize(parse_twd(open(out).read()))
    A = adjacency(SQUARE_FIG_EDGES, "1234567")
    assert M[3].tolist() == [1, 1, 1, 0, 1, 0, 0]
    assert (M >= A).all()


def test_multiply_matches_naive(tmp_path, capsys):
    prefix = str(tmp_path / "blk")
    assert cli.run(["gen", "--n", "30", "--d", "3", "--p", "3", "--seed", "2",
                    "--block", "--out-prefix", prefix]) == 0
    a, b = prefix + ".a.fqm", prefix + ".b.fqm"
    o1, o2 = str(tmp_path / "ab.fqm"), str(tmp_path / "ab_naive.fqm")
    assert cli.run(["multiply", "--a", a, "--b", b, "--out", o1]) == 0
    assert cli.run(["multiply", "--a", a, "--b", b, "--out", o2, "--naive"]) == 0
    P, Q = parse_fqm(open(o1).read()), parse_fqm(open(o2).read())
    rng = np.random.default_rng(0)
    for i, j in rng.integers(0, 30, (50, 2)):
        assert P[i, j] == Q[i, j]
    assert P == Q
    # decompositions are accepted in place of dense operands
    assert cli.run(["multiply", "--a", prefix + ".twd", "--b", prefix + ".twd", "--out", o1]) == 0


def test_multiply_budget_and_fallback(tmp_path, capsys):
    rng = np.random.default_rng(1)
    A = DenseMatrix.from_rows(rng.integers(0, 5, (20, 20)).tolist(), 5)
    a = put(tmp_path / "a.fqm", dump_fqm(A))
    out = str(tmp_path / "o.fqm")
    assert cli.run(["multiply", "--a", a, "--b", a, "--out", out, "--budget", "0"]) == 1
    assert not os.path.exists(out)
    assert cli.run(["--report", "multiply", "--a", a, "--b", a, "--out", out, "--budget", "0",
                    "--dense-fallback"]) == 0
    assert "#route=dense-fallback" in capsys.readouterr().out


def test_convert_round_trip(tmp_path):
    prefix = str(tmp_path / "g")
    assert cli.run(["gen", "--n", "25", "--d", "2", "--p", "2", "--seed", "4", "--out-prefix", prefix]) == 0
    back = str(tmp_path / "back.twd")
    assert cli.run(["convert", "--from", "ctr", "--to", "twd", "--in", prefix + ".ctr",
                    "--graph", prefix + ".fqm", "--out", back]) == 0
    D0, D1 = parse_twd(open(prefix + ".twd").read()), parse_twd(open(back).read())
    assert (materialize(D0) == materialize(D1)).all()
    ctr, fqm = str(tmp_path / "x.ctr"), str(tmp_path / "x.fqm")
    assert cli.run(["convert", "--from", "twd", "--to", "ctr", "--in", back, "--out", ctr,
                    "--graph", fqm]) == 0
    assert open(ctr).read() == dump_ctr(twd_to_seq(D1))
    assert cli.run(["validate", "--ctr", ctr, "--graph", fqm, "--max-width", "2"]) == 0


def test_gen_is_deterministic(tmp_path):
    p1, p2 = str(tmp_path / "a"), str(tmp_path / "b")
    for p in (p1, p2):
        assert cli.run(["gen", "--n", "40", "--d", "3", "--p", "5", "--seed", "9", "--out-prefix", p]) == 0
    for ext in (".twd", ".fqm", ".ctr"):
        assert digest(p1 + ext) == digest(p2 + ext)


def test_liftup(tmp_path, capsys):
    D = named_decomposition(SQUARE_FIG_TREE, SQUARE_FIG_BEDGES, "1234567")
    # split node6-1 into 6-1 and 7-1, which lift_up merges back
    B = dict(D.bedges)
    del B[(0, 12)]
    B[(0, 5)] = B[(0, 6)] = (1, 1)
    f = put(tmp_path / "u.twd", dump_twd(D.with_bedges(B)))
    out = str(tmp_path / "l.twd")
    assert cli.run(["--report", "liftup", "--twd", f, "--out", out]) == 0
    text = capsys.readouterr().out
    assert "#before=6" in text and "#after=5" in text
    assert parse_twd(open(out).read()) == D


def test_validation_failures(tmp_path, capsys):
    bad = named_decomposition(TWD_FIG_TREE, TWD_FIG_BAD_BEDGES, "abcdef")
    f = put(tmp_path / "bad.twd", dump_twd(bad))
    assert cli.run(["validate", "--twd", f]) == 1
    assert "crosses border 5, 4" in capsys.readouterr().err
    g = put(tmp_path / "junk.twd", "TWD 7\n")
    assert cli.run(["validate", "--twd", g]) == 1
    assert cli.run(["square", "--twd", f, "--out", str(tmp_path / "o.twd")]) == 1
    assert not os.path.exists(tmp_path / "o.twd")


def test_usage_errors_write_nothing(tmp_path, fig6, capsys):
    out = tmp_path / "o.twd"
    assert cli.run(["square", "--twd", fig6, "--out", str(out), "--frobnicate"]) == 2
    assert cli.run(["square", "--twd", fig6]) == 2
    assert cli.run(["nope"]) == 2
    assert cli.run(["validate"]) == 2
    assert cli.run(["square", "--twd", str(tmp_path / "missing"), "--out", str(out)]) == 2
    assert cli.run(["bench", "square", "--sweep", "9", "--d", "1"]) == 2
    assert cli.run(["minor", "apply", "--m", fig6]) == 2
    assert not out.exists()


def test_internal_error_exit_code(tmp_path, fig6, monkeypatch):
    def broken(*a, **k):
        raise square.CertificateError("injected")
    monkeypatch.setattr(cli, "modular_square_twd", broken)
    assert cli.run(["square", "--twd", fig6, "--out", str(tmp_path / "o.twd")]) == 3


def test_inputs_are_not_mutated(tmp_path, fig6):
    before = digest(fig6)
    cli.run(["square", "--twd", fig6, "--out", str(tmp_path / "o.twd")])
    cli.run(["liftup", "--twd", fig6, "--out", str(tmp_path / "l.twd")])
    cli.run(["convert", "--from", "twd", "--to", "ctr", "--in", fig6, "--out", str(tmp_path / "c")])
    assert digest(fig6) == before


def test_writes_are_atomic(tmp_path, fig6, monkeypatch):
    out = tmp_path / "o.twd"
    out.write_text("old\n")

    def fail(src, dst):
        raise OSError("disk full")
    monkeypatch.setattr(os, "replace", fail)
    with pytest.raises(OSError):
        cli.run(["square", "--twd", fig6, "--out", str(out)])
    assert out.read_text() == "old\n"
    assert sorted(p.name for p in tmp_path.iterdir()) == ["g.twd", "o.twd"]


def test_minor_commands(tmp_path, capsys):
    M = put(tmp_path / "m.fqm", dump_fqm(DenseMatrix.from_rows(MINOR_FIG_HOST, 2)))
    N = put(tmp_path / "n.fqm", dump_fqm(DenseMatrix.from_rows(MINOR_FIG_TARGET, 2)))
    assert cli.run(["minor", "check", "--m", M, "--n", N]) == 0
    assert capsys.readouterr().out.strip() == "true"
    one = put(tmp_path / "one.fqm", dump_fqm(DenseMatrix.from_rows([[1]], 2)))
    assert cli.run(["minor", "check", "--m", one, "--n", N]) == 1
    A, _ = latin_fig_host()
    H = put(tmp_path / "h.fqm", dump_fqm(DenseMatrix.from_rows(A.tolist(), 2)))
    T = put(tmp_path / "t.fqm", dump_fqm(DenseMatrix.from_rows(LATIN_FIG_TARGET, 2)))
    S = str(tmp_path / "s.msc")
    assert cli.run(["minor", "extract", "--m", H, "--n", T, "--out", S]) == 0
    parse_msc(open(S).read())
    out = str(tmp_path / "r.fqm")
    assert cli.run(["minor", "apply", "--m", H, "--script", S, "--out", out]) == 0
    assert parse_fqm(open(out).read()) == DenseMatrix.from_rows(LATIN_FIG_TARGET, 2)
    assert cli.run(["minor", "extract", "--m", M, "--n", T]) == 1


def test_guardrail_env(tmp_path, monkeypatch, capsys):
    big = put(tmp_path / "b.fqm", dump_fqm(DenseMatrix.zeros(13, 13, 2)))
    assert cli.run(["stats", "--fqm", big]) == 2
    monkeypatch.setenv("TWINMUL_GUARDRAILS", "off")
    assert cli.run(["stats", "--fqm", big]) == 0
    assert capsys.readouterr().out.strip() == "0 0 0"


def test_stats(tmp_path, capsys):
    f = put(tmp_path / "i.fqm", dump_fqm(DenseMatrix.from_rows([[1, 0], [0, 1]], 2)))
    assert cli.run(["--report", "stats", "--fqm", f]) == 0
    out = capsys.readouterr().out
    assert "#gridNumber=1" in out


def test_bench_csv(tmp_path):
    out = tmp_path / "b.csv"
    assert cli.run(["bench", "square", "--sweep", "16..64", "--d", "2", "--p", "3", "--out", str(out)]) == 0
    rows = list(csv.DictReader(open(out)))
    assert list(rows[0]) == ["n", "d", "p", "op", "seconds", "outWidth", "bedgeCount"]
    assert [int(r["n"]) for r in rows] == [16, 32, 64]
    assert cli.run(["bench", "multiply", "--sweep", "16..32", "--d", "2", "--out", str(out)]) == 0
    rows = list(csv.DictReader(open(out)))
    assert {r["op"] for r in rows} == {"multiply"}


def test_module_entry_point(tmp_path, fig6):
    r = subprocess.run([sys.executable, "-m", "twinmul", "query", "--twd", fig6, "--u", "0", "--v", "4"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.strip() == "1"
