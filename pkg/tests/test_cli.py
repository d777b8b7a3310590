import csv
import json

import pytest
from conftest import DAVIS_WORD

from hypqec.cli import main, parse_grid
from hypqec.errors import ParseError
from hypqec.gf2 import read_alist, read_parity_check

DAVIS = f"5,3,3,5/word({DAVIS_WORD})"


@pytest.fixture(scope="module")
def bundle(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli") / "davis.code"
    assert main(["build", "--descriptor", DAVIS, "--out", str(path)]) == 0
    return path


def test_parse_grid():
    assert parse_grid("0.01,0.02") == [0.01, 0.02]
    assert parse_grid("0.01:0.03:0.01") == [0.01, 0.02, 0.03]
    for bad in ("x", "0.1:0.05:0.01", "0:1:0"):
        with pytest.raises(ParseError):
            parse_grid(bad)


def test_build_writes_bundle_and_report(bundle, capsys):
    rep = json.loads(bundle.with_name(bundle.name + ".report.json").read_text())
    assert rep["n"] == 144 and rep["k"] == 72 and rep["failed_checks"] == []
    assert "seconds" not in json.dumps(rep)


def test_build_from_symbol_and_method(tmp_path, capsys):
    out = tmp_path / "t.code"
    assert main(["build", "--symbol", "4,4", "--method", "word(abcbabcbabcb)", "--out", str(out),
                 "--complex-out", str(tmp_path / "t.cx")]) == 0
    assert "n=18 k=2" in capsys.readouterr().out
    assert (tmp_path / "t.cx").read_text().startswith("# hypqec complex v1")


def test_verify(bundle, capsys):
    assert main(["verify", str(bundle)]) == 0
    out = capsys.readouterr().out
    assert "PASS css_condition" in out and "FAIL" not in out
    for name in ("k_matches_header", "chi_matches_counts", "shape_matches_counts", "rate_bound"):
        assert f"PASS {name}" in out


def test_verify_detects_a_flipped_entry(bundle, tmp_path, capsys):
    lines = bundle.read_text().splitlines()
    k = lines.index("[H_X]") + 2
    entries = lines[k].split()
    lines[k] = " ".join(entries[1:])  # drop one nonzero entry of H_X
    bad = tmp_path / "bad.code"
    bad.write_text("\n".join(lines) + "\n")
    assert main(["verify", str(bad)]) == 2
    assert "FAIL css_condition" in capsys.readouterr().out


def test_truncated_bundle_is_a_parse_error(bundle, tmp_path):
    cut = tmp_path / "cut.code"
    text = bundle.read_text()
    cut.write_text(text[: len(text) // 3])
    assert main(["verify", str(cut)]) == 4


def test_exit_codes(tmp_path, capsys):
    out = str(tmp_path / "x.code")
    assert main(["build", "--out", out]) == 4  # no method
    assert main(["build", "--descriptor", "5,3,3,5/bogus(1)", "--out", out]) == 4
    assert main(["build", "--descriptor", "5,3,3,5/ideal(2)?cap=1000", "--out", out]) == 3
    assert main(["build", "--descriptor", "5,3,3,5/ideal(2)?cap=3000000", "--out", out]) == 3
    assert main(["build", "--descriptor", "5,3,3,5/word(abab)", "--out", out]) == 2
    assert main(["simulate", out, "--p", "0.1", "--out", out]) == 4  # bundle missing
    assert main(["no-such-command"]) == 4
    assert main(["--help"]) == 0


def test_search(bundle, tmp_path, capsys):
    out = tmp_path / "s.json"
    assert main(["search", str(bundle), "--iterations", "30", "--target", "2", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["weight"] == 2


def test_simulate_is_byte_identical(bundle, tmp_path, capsys):
    args = ["simulate", str(bundle), "--decoder", "ca", "--p", "0.01:0.02:0.01", "--T", "2",
            "--trials", "50", "--seed", "3"]
    outs = []
    for i in range(2):
        paths = [tmp_path / f"r{i}.csv", tmp_path / f"r{i}.json", tmp_path / f"r{i}.py"]
        assert main(args + ["--out", str(paths[0]), "--json", str(paths[1]),
                            "--plot-script", str(paths[2])]) == 0
        outs.append([p.read_bytes() for p in paths])
    assert outs[0][0] == outs[1][0] and outs[0][1] == outs[1][1]
    rows = list(csv.DictReader(open(tmp_path / "r0.csv")))
    assert [r["p"] for r in rows] == ["0.01", "0.02"]
    assert rows[0]["decoder"] == "ca" and rows[0]["T"] == "2"
    assert b"matplotlib" in outs[0][2]
    compile(outs[0][2], "plot.py", "exec")


def test_export(bundle, tmp_path):
    assert main(["export", str(bundle), "--matrix", "H_Z", "--format", "alist",
                 "--out", str(tmp_path / "hz.alist")]) == 0
    assert main(["export", str(bundle), "--format", "pc", "--out", str(tmp_path / "hx.pc")]) == 0
    hz = read_alist(tmp_path / "hz.alist")
    hx = read_parity_check(tmp_path / "hx.pc")
    assert (hz.rows, hz.cols) == (60, 144) and (hx.rows, hx.cols) == (60, 144)
    assert (hx @ hz.transpose()).is_zero()


def test_info(capsys):
    assert main(["info"]) == 0
    assert "kernels:" in capsys.readouterr().out
