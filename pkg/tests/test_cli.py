import csv
import io
import json

import pytest
from hypothesis import given, strategies as st

from glnkit.cli import EXIT_FAIL, EXIT_PASS, EXIT_USAGE, UsageError, format_complex, main, parse_complex


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.mark.parametrize("text,value", [
    ("0.6+0.3i", 0.6 + 0.3j), ("0.5-5i", 0.5 - 5j), ("2i", 2j), ("-i", -1j), ("3", 3 + 0j),
    ("1e-3+2e+1i", 1e-3 + 20j), ("1.5 + 2j", 1.5 + 2j), ("-.5-.25i", -0.5 - 0.25j),
])
def test_parse_complex(text, value):
    assert parse_complex(text) == value


@pytest.mark.parametrize("text", ["", "1+2x", "i+1", "1++2i", "abc"])
def test_parse_complex_rejects(text):
    with pytest.raises(UsageError):
        parse_complex(text)


@given(st.floats(-1e6, 1e6), st.floats(-1e6, 1e6))
def test_complex_format_round_trip(a, b):
    z = complex(a, b)
    assert parse_complex(format_complex(z)) == z


def test_csv_is_rfc4180_with_crlf(capsys):
    code, out, _ = run(capsys, "iwasawa", "--matrix", "2,1;0,3")
    assert code == EXIT_PASS
    assert out.endswith("\r\n") and "\n" not in out.replace("\r\n", "")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert rows[0]["coord"] == "y1" and float(rows[0]["value"]) == pytest.approx(2 / 3)
    assert rows[1]["coord"] == "x12" and float(rows[1]["value"]) == pytest.approx(1 / 3)


def test_eisenstein_check_fe_example(capsys):
    code, out, _ = run(capsys, "eisenstein", "--n", "2", "--s", "0.6+0.3i", "--check-fe", "--format", "json")
    doc = json.loads(out)
    assert code == EXIT_PASS and doc["passed"]
    assert doc["rows"][0]["residual"] < 1e-8
    assert doc["rows"][0]["s"] == "0.6+0.3i"


def test_sieve_example(capsys):
    code, out, _ = run(capsys, "sieve", "eta-density", "--t", "10", "--n", "2", "--N", "100000")
    row = next(csv.DictReader(io.StringIO(out)))
    assert code == EXIT_PASS
    assert row["pass"] == "true" and float(row["fraction"]) >= float(row["threshold"])


def test_verify_all_passes(capsys):
    code, out, _ = run(capsys, "verify", "all", "--format", "json")
    doc = json.loads(out)
    assert code == EXIT_PASS
    assert {r["suite"] for r in doc["rows"]} == {"matrix", "coset", "theta", "whittaker", "lfun", "sieve", "psi"}
    assert all(r["pass"] for r in doc["rows"])


def test_failed_check_exits_one(capsys):
    # a tolerance no floating-point evaluation can meet
    code, out, _ = run(capsys, "eisenstein", "--s", "0.6+0.3i", "--check-fe", "--tol", "0")
    assert code == EXIT_FAIL
    assert "false" in out


@pytest.mark.parametrize("argv", [
    ["eisenstein", "--s", "1+2x"],
    ["coset", "--n", "2", "--m", "3"],
    ["sieve", "eta-density", "--N", "50"],
    ["zfr", "--lower", "-1"],
    ["psi", "--alpha", "1,0,-1", "--R", "0.1"],
    ["nonsense"],
    ["eisenstein", "--threads", "0"],
])
def test_usage_errors_exit_two(capsys, argv):
    code, _, _ = run(capsys, *argv)
    assert code == EXIT_USAGE


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# zero-free region run\nt = 10, 100\nlower = 2.0\nformat = json\n")
    code, out, _ = run(capsys, "zfr", "--config", str(cfg), "--lower", "4")
    doc = json.loads(out)
    assert code == EXIT_PASS
    assert [r["t"] for r in doc["rows"]] == [10.0, 100.0]
    assert doc["rows"][0]["c"] == 2.0  # command line wins over the file


def test_config_rejects_unknown_key(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("colour = blue\n")
    assert run(capsys, "zfr", "--config", str(cfg))[0] == EXIT_USAGE
    cfg.write_text("no equals sign\n")
    assert run(capsys, "zfr", "--config", str(cfg))[0] == EXIT_USAGE


def test_output_file_and_determinism(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        assert run(capsys, "coset", "--n", "3", "--m", "1", "--pool", "12", "--seed", "5",
                   "--threads", "1", "--output", str(path))[0] == EXIT_PASS
    assert a.read_bytes() == b.read_bytes()
    assert a.read_bytes().startswith(b"n,m,pairs")


def test_lfun_and_psi_commands(capsys):
    code, out, _ = run(capsys, "lfun", "--tau", "0.7,-0.7", "--t", "10", "--exact", "--format", "json")
    row = json.loads(out)["rows"][0]
    assert code == EXIT_PASS and row["rel_diff"] < 1e-6
    exact = parse_complex(row["exact"])
    assert abs(parse_complex(row["value"]) - exact) < 1e-8 * abs(exact)
    code, out, _ = run(capsys, "psi", "cutoff", "--x", "0.5,2")
    assert code == EXIT_PASS
    assert [float(r["exact"]) for r in csv.DictReader(io.StringIO(out))] == [0.0, 0.5]
