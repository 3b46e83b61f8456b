import csv
import io
import json
import math
import subprocess
import sys

import pytest

from primepatterns.cli import parse_int, parse_number, run

SMALL_RUNS = {
    "gaps": ["gaps", "--N", "2e4", "--k", "3", "--l", "1", "--gamma", "1/4", "--tuple", "0,2,6"],
    "eq333": ["eq333", "--R", "50,100", "--P-max", "1000"],
    "bv": ["bv", "--N", "1e4", "--Q", "10,20"],
    "dickson": ["dickson", "--system", "1 0; 1 2", "--box", "1:1000", "--P-max", "1000", "--count"],
    "tuple-series": ["tuple-series", "--tuple", "0,2,6", "--P-max", "1000"],
    "gallagher": ["gallagher", "--k", "1", "--H", "20,40", "--P-max", "1000"],
    "complexity": ["complexity", "--system", "1 0 0; 1 1 0; 1 2 0"],
    "digits-corr": ["digits-corr", "--Xmax", "2^14", "--steps", "3"],
    "spectrum": ["spectrum", "--kmin", "4", "--kmax", "8"],
    "vaughan": ["vaughan", "--X", "2^12", "--f", "char:7"],
    "type-sums": ["type-sums", "--X", "2^12", "--mu", "1,3"],
    "gowers": ["gowers", "--N", "31", "--k", "2,3", "--function", "random"],
    "wtrick": ["wtrick", "--w", "3", "--M", "1000"],
    "heisenberg": ["heisenberg", "--nmax", "5"],
}


def _run(argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(argv, out, err)
    return code, out.getvalue(), err.getvalue()


@pytest.mark.parametrize("name", sorted(SMALL_RUNS))
def test_subcommand_runs_and_is_deterministic(name):
    code, first, err = _run(SMALL_RUNS[name])
    assert code == 0, err
    lines = first.splitlines()
    meta = [ln for ln in lines if ln.startswith("#")]
    assert "# seed=0" in meta
    header = lines[len(meta)]
    assert header and not header.startswith("#")
    assert _run(SMALL_RUNS[name])[1] == first


@pytest.mark.parametrize("name", ["gaps", "spectrum", "gowers", "heisenberg"])
def test_csv_json_round_trip(name):
    _, text_csv, _ = _run(SMALL_RUNS[name])
    _, text_json, _ = _run(["--format", "json", *SMALL_RUNS[name]])
    data = json.loads(text_json)
    body = [ln for ln in text_csv.splitlines() if not ln.startswith("#")]
    rows = list(csv.DictReader(body))
    assert len(rows) == len(data["rows"])
    for parsed, original in zip(rows, data["rows"]):
        assert list(parsed) == list(original)
        for key, value in original.items():
            if isinstance(value, float):
                assert float(parsed[key]) == pytest.approx(value, rel=1e-12, abs=0)
            else:
                assert parsed[key] == str(value)
    assert data["meta"]["seed"] == 0


def test_complexity_plain():
    code, out, _ = _run(["--format", "plain", "complexity", "--system", "1 0 0; 1 1 0; 1 2 0"])
    assert code == 0 and out == "1\n"
    assert _run(["--format", "plain", "complexity", "--system", "1 0; 1 2"])[1] == "inf\n"


def test_gaps_columns():
    _, out, _ = _run(["--format", "json", *SMALL_RUNS["gaps"]])
    rows = json.loads(out)["rows"]
    assert [r["i"] for r in rows] == [1, 2, 3]
    assert {"rho_empirical", "rho_predicted"} <= set(rows[0])


def test_digits_corr_columns():
    _, out, _ = _run(["--format", "json", *SMALL_RUNS["digits-corr"]])
    data = json.loads(out)
    assert [r["X"] for r in data["rows"]] == [2**10, 2**12, 2**14]
    for r in data["rows"]:
        assert r["log2_abs_corr"] == pytest.approx(math.log2(abs(r["correlation"])))


def test_output_file(tmp_path):
    target = tmp_path / "out.csv"
    code, out, _ = _run(["--output", str(target), *SMALL_RUNS["spectrum"]])
    assert code == 0 and out == ""
    assert target.read_text().startswith("# ")


@pytest.mark.parametrize(
    "argv,code",
    [
        (["nonsense"], 1),
        (["gaps", "--N", "abc"], 1),
        (["complexity"], 1),
        (["gaps", "--N", "2e4", "--tuple", "0,1,2", "--k", "3"], 2),
        (["complexity", "--system", "1 0; 2 0"], 2),
        (["wtrick", "--b", "2", "--W", "6", "--M", "10"], 2),
        (["gowers", "--N", "1000", "--k", "3"], 3),
        (["eq333", "--R", "1e6"], 3),
    ],
)
def test_exit_codes(argv, code):
    got, out, err = _run(argv)
    assert got == code
    assert out == ""
    assert len(err.strip().splitlines()) == 1


def test_parse_number():
    assert parse_number("1e7") == 10**7
    assert parse_number("2^24") == 2**24
    assert parse_number("10**6") == 10**6
    assert parse_number("1/4") == 0.25
    assert parse_number("0.5") == 0.5
    assert parse_int("2^10") == 1024
    with pytest.raises(Exception):
        parse_int("1/3")


def test_console_script_module():
    proc = subprocess.run(
        [sys.executable, "-m", "primepatterns.cli", "--format", "plain", "complexity", "--system", "1 0 0; 1 1 0; 1 2 0; 1 3 0"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0 and proc.stdout == "2\n"
