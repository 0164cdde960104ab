import csv
import io
import json
import math

import numpy as np
import pytest

from mubcert import certify, cli
from mubcert import measurements as meas


def run(*argv):
    return cli.main([str(a) for a in argv])


def test_mub_round_trip(tmp_path):
    out = tmp_path / "m.json"
    assert run("mub", "--dim", 2, "--out", out) == 0
    assert meas.is_mub_pair(meas.load_pair(out), 1e-9)


def test_mub_dim6_valid(tmp_path):
    out = tmp_path / "m6.json"
    assert run("mub", "--dim", 6, "--out", out) == 0
    pair = meas.load_pair(out)
    assert pair.dim == 6 and meas.is_mub_pair(pair, 1e-9)


def test_mub_invalid_dim(capsys):
    assert run("mub", "--dim", 1) == 2
    assert "InvalidDim" in capsys.readouterr().err


def test_certify_builtin(tmp_path):
    out = tmp_path / "r.json"
    assert run("certify", "--dim", 4, "--out", out) == 0
    doc = json.loads(out.read_text())
    assert doc["p_bar"] == pytest.approx(0.75, abs=1e-12)
    assert doc["asp_bounds"]["incompat_upper"] == pytest.approx(0.6666667, abs=1e-7)
    assert doc["log_base"] == 2


def test_certify_noise(tmp_path):
    out = tmp_path / "r.json"
    assert run("certify", "--dim", 4, "--noise", 0.9, "--out", out) == 0
    assert json.loads(out.read_text())["p_bar"] == pytest.approx(0.7, abs=1e-12)


def test_certify_file_round_trip_matches_memory(tmp_path):
    mfile, rfile = tmp_path / "m.json", tmp_path / "r.json"
    run("mub", "--dim", 5, "--out", mfile)
    assert run("certify", "--measurements", mfile, "--out", rfile) == 0
    from_file = json.loads(rfile.read_text())
    in_memory = json.loads(
        json.dumps(certify.certification_report(meas.fourier_mub_pair(5)).to_dict())
    )

    def numbers(x):
        if isinstance(x, dict):
            for v in x.values():
                yield from numbers(v)
        elif isinstance(x, list):
            for v in x:
                yield from numbers(v)
        elif isinstance(x, (int, float)) and not isinstance(x, bool):
            yield x

    a, b = list(numbers(from_file)), list(numbers(in_memory))
    assert len(a) == len(b)
    assert max(abs(x - y) for x, y in zip(a, b)) <= 1e-12


def test_certify_json_has_17_digits(tmp_path):
    out = tmp_path / "r.json"
    run("certify", "--dim", 3, "--out", out)
    line = next(l for l in out.read_text().splitlines() if '"p_q"' in l)
    mantissa = line.split(":")[1].strip().rstrip(",").split("e")[0].replace(".", "").lstrip("0")
    assert len(mantissa) == 17


def test_certify_malformed(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    assert run("certify", "--measurements", bad) == 2
    assert "ParseError" in capsys.readouterr().err


def test_certify_incomplete_povm(tmp_path, capsys):
    doc = meas.pair_to_dict(meas.fourier_mub_pair(2))
    doc["B"][0] = doc["B"][1]
    bad = tmp_path / "inc.json"
    bad.write_text(json.dumps(doc))
    assert run("certify", "--measurements", bad) == 2
    assert "NotComplete" in capsys.readouterr().err


def read_csv(path):
    with open(path) as fh:
        return list(csv.reader(fh))


def test_sweep_entropy_rows(tmp_path):
    out = tmp_path / "s.csv"
    assert run("sweep", "--dim", 4, "--bound", "entropy", "--points", 3, "--range", 0.5625, 0.75, "--out", out) == 0
    rows = read_csv(out)
    assert rows[0] == ["p_bar", "h_s_lower"]
    values = [[float(x) for x in r] for r in rows[1:]]
    assert values[0] == [0.5625, 0.0]
    assert values[1][0] == 0.65625
    assert values[1][1] == pytest.approx(2 * math.log2(2.5), abs=1e-10)
    assert values[2] == [0.75, 4.0]


def test_sweep_norms_default_range(tmp_path):
    out = tmp_path / "s.csv"
    run("sweep", "--dim", 4, "--bound", "norms", "--points", 50, "--out", out)
    rows = read_csv(out)[1:]
    assert float(rows[-1][1]) == pytest.approx(4, abs=1e-10)
    assert float(rows[0][1]) == pytest.approx(4 - (2 + math.sqrt(2)) / 4, abs=1e-7)


def test_sweep_all_monotone(tmp_path):
    out = tmp_path / "s.csv"
    run("sweep", "--dim", 4, "--bound", "all", "--points", 200, "--out", out)
    rows = read_csv(out)
    assert rows[0] == ["p_bar", "h_s_lower", "norm_sum_lower", "incompat_upper", "uncertainty_lower"]
    cols = list(zip(*rows[1:]))
    for k, increasing in ((1, True), (2, True), (3, False), (4, True)):
        vals = [float(v) for v in cols[k] if v != ""]
        assert len(vals) >= 2
        diffs = np.diff(vals)
        assert np.all(diffs >= -1e-12) if increasing else np.all(diffs <= 1e-12)


def test_sweep_out_of_region_warns(tmp_path, caplog):
    out = tmp_path / "s.csv"
    assert run("sweep", "--dim", 4, "--bound", "norms", "--points", 4, "--range", 0.6, 0.75, "--out", out) == 0
    rows = read_csv(out)[1:]
    assert rows[0][1] == "" and rows[-1][1] != ""
    assert "non-trivial region" in caplog.text


def test_sweep_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run("sweep", "--dim", 3, "--out", a)
    run("sweep", "--dim", 3, "--out", b)
    assert a.read_bytes() == b.read_bytes()


def test_optimize(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run("optimize", "--dim", 2, "--restarts", 5, "--iters", 50, "--seed", 3, "--out", a) == 0
    err = capsys.readouterr().err
    gap = float(err.split("gap")[1])
    assert -1e-7 <= gap <= 1e-3
    run("optimize", "--dim", 2, "--restarts", 5, "--iters", 50, "--seed", 3, "--out", b)
    assert a.read_bytes() == b.read_bytes()
    assert run("optimize", "--dim", 1) == 2


def test_verify(capsys):
    assert run("verify", "--suite", "tracesq", "--trials", 200, "--dim", 3, "--seed", 1) == 0
    assert capsys.readouterr().out.startswith("PASS tracesq")
    assert run("verify", "--suite", "hlemma", "--trials", 10**6) == 0
    assert run("verify", "--suite", "nope") == 2


def test_verify_all_json(capsys):
    assert run("verify", "--suite", "all", "--trials", 100, "--dim", 3, "--seed", 7, "--json") == 0
    doc = json.loads(capsys.readouterr().out)
    assert [o["suite_name"] for o in doc] == list(cli.oracles.SUITES)
    assert all(o["passed"] for o in doc)


def test_verify_failure_exit_code(monkeypatch, capsys):
    failing = cli.oracles._outcome("schur", [-1.0], [0], 1e-9)
    monkeypatch.setattr(cli.oracles, "run_suite", lambda *a: failing)
    assert run("verify", "--suite", "schur") == 1
    assert capsys.readouterr().out.startswith("FAIL")


def test_sweep_spec_validation():
    with pytest.raises(Exception):
        cli.sweep_rows(cli.SweepSpec(4, "entropy", 1))
    with pytest.raises(Exception):
        cli.sweep_rows(cli.SweepSpec(4, "entropy", 5, (0.7, 0.6)))


def test_sweep_stdout(capsys):
    assert run("sweep", "--dim", 2, "--bound", "uncertainty", "--points", 3) == 0
    text = capsys.readouterr().out
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == ["p_bar", "uncertainty_lower"]
    assert float(rows[-1][1]) == pytest.approx(1, abs=1e-9)
