import json
import subprocess
import sys

import pytest

from restrictcat.cli import main
from restrictcat.core import compose_functors, functors_equal
from restrictcat.fundamental import is_hyperconnected
from restrictcat.io import load, parse, read_file, serialize
from restrictcat.ranges import verify_range
from verdicts import GOLDEN, MANIFEST, library_exit


def run_cli(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.mark.parametrize("name", sorted(p.name for p in GOLDEN.glob("*.doc")))
def test_golden_file_is_canonical(name):
    text = (GOLDEN / name).read_text(encoding="utf-8")
    assert serialize(parse(text)) == text


@pytest.mark.parametrize("name", sorted(p.name for p in GOLDEN.glob("*.doc") if p.name != "bar_not_endo.doc"))
def test_golden_object_round_trips(name):
    text = (GOLDEN / name).read_text(encoding="utf-8")
    assert serialize(load(text)) == text


def test_every_golden_file_is_exercised():
    assert {e["file"] for e in MANIFEST} == {p.name for p in GOLDEN.glob("*.doc")}
    assert {e["exit"] for e in MANIFEST} == {0, 1, 2}


@pytest.mark.parametrize("entry", MANIFEST, ids=lambda e: f"{e['file']}:{'_'.join(e['command'])}")
def test_cli_verdict_equals_library(entry, tmp_path, capsys):
    path = GOLDEN / entry["file"]
    argv = ["--json", *entry["command"], str(path)]
    if entry["command"][0] == "factorize":
        argv += ["-o", str(tmp_path)]
    code, out, err = run_cli(argv, capsys)
    assert code == library_exit(entry["command"], path) == entry["exit"]
    if code == 2:
        assert err.startswith("error:")
        return
    report = json.loads(out)
    assert report["verdict"] == ("pass" if code == 0 else "fail")
    failing = [w for w in report["checks"].values() if w is not None]
    assert bool(failing) == (code == 1)


def test_human_report_prints_witness(capsys):
    code, out, _ = run_cli(["check", "range", str(GOLDEN / "planted_rr3.doc")], capsys)
    assert code == 1
    line = next(ln for ln in out.splitlines() if ln.startswith("RR3"))
    assert "FAIL" in line and "witness:" in line
    assert out.rstrip().endswith("verdict: fail")


def test_json_flag_after_subcommand(capsys):
    code, out, _ = run_cli(["check", "restriction", str(GOLDEN / "point.doc"), "--json"], capsys)
    assert code == 0 and json.loads(out)["command"] == "check restriction"


def test_build_then_check(tmp_path, capsys):
    doc = tmp_path / "c.doc"
    assert run_cli(["build", "set_p", "1", "2", "-o", str(doc)], capsys)[0] == 0
    assert run_cli(["check", "restriction", str(doc)], capsys)[0] == 0
    assert read_file(str(doc)) == read_file(str(GOLDEN / "set_p_1_2.doc"))


@pytest.mark.parametrize("argv,kind", [
    (["set_p", "1", "2"], "join"),
    (["set_p", "2"], "range"),
    (["inverse", "2"], "range"),
    (["stab_op", "powerset2", "--join"], "join"),
    (["par", "0", "1"], "restriction"),
    (["trivial", "group", "3"], "restriction"),
    (["random", "7"], "restriction"),
])
def test_build_variants_pass_their_checks(argv, kind, tmp_path, capsys):
    doc = tmp_path / "x.doc"
    assert run_cli(["build", *argv, "-o", str(doc), "--kind", kind], capsys)[0] == 0
    assert run_cli(["check", kind, str(doc)], capsys)[0] == 0


def test_trivial_point_build_matches_golden(tmp_path, capsys):
    doc = tmp_path / "p.doc"
    run_cli(["build", "trivial", "point", "-o", str(doc)], capsys)
    assert doc.read_text() == (GOLDEN / "point.doc").read_text()


def test_factorize_then_recheck(tmp_path, capsys):
    src = GOLDEN / "functor_total_incl_1_2.doc"
    assert run_cli(["factorize", str(src), "-o", str(tmp_path)], capsys)[0] == 0
    assert run_cli(["localic", str(tmp_path / "H.doc")], capsys)[0] == 0
    assert run_cli(["hyperconnected", str(tmp_path / "K.doc")], capsys)[0] == 0
    assert run_cli(["check", "restriction", str(tmp_path / "E.doc")], capsys)[0] == 0
    H, K, F = (read_file(str(p)) for p in (tmp_path / "H.doc", tmp_path / "K.doc", src))
    assert functors_equal(compose_functors(K, H), F)


def test_outputs_written_by_constructions(tmp_path, capsys):
    out = tmp_path / "o.doc"
    assert run_cli(["fundamental", str(GOLDEN / "set_p_1_2.doc"), "-o", str(out)], capsys)[0] == 0
    assert is_hyperconnected(read_file(str(out)))
    assert run_cli(["derive-range", str(GOLDEN / "set_p_1_2.doc"), "-o", str(out)], capsys)[0] == 0
    assert verify_range(read_file(str(out))).ok
    assert run_cli(["lift", str(GOLDEN / "functor_injections_2.doc"), "-o", str(out)], capsys)[0] == 0
    assert read_file(str(out)).bar == read_file(str(GOLDEN / "functor_injections_2.doc")).source.bar
    assert run_cli(["filler", str(GOLDEN / "square_factorization.doc"), "-o", str(out)], capsys)[0] == 0
    sq = read_file(str(GOLDEN / "square_factorization.doc"))
    J = read_file(str(out))
    assert functors_equal(compose_functors(J, sq.left), sq.top)


@pytest.mark.parametrize("argv", [
    [],
    ["frobnicate"],
    ["check", "restriction", "/nonexistent/file.doc"],
    ["build", "inverse", "2", "-o", "/tmp/x.doc", "--kind", "join"],
    ["build", "stab_op", "lattice9", "-o", "/tmp/x.doc"],
    ["build", "set_p", "a", "-o", "/tmp/x.doc"],
    ["hyperconnected", str(GOLDEN / "point.doc")],
    ["check", "join", str(GOLDEN / "set_p_1_2.doc")],
])
def test_usage_errors_exit_two(argv, capsys):
    assert run_cli(argv, capsys)[0] == 2


def test_malformed_document_exits_two(tmp_path, capsys):
    bad = tmp_path / "bad.doc"
    bad.write_text((GOLDEN / "point.doc").read_text().replace("format_version: 1", "format_version: 9"))
    code, _, err = run_cli(["check", "restriction", str(bad)], capsys)
    assert code == 2 and "line 6" in err


def test_selftest_is_deterministic_across_workers(capsys):
    a = run_cli(["--json", "selftest", "--seed", "3", "--cases", "8"], capsys)
    b = run_cli(["--json", "selftest", "--seed", "3", "--cases", "8", "--workers", "2"], capsys)
    assert a[0] == b[0] == 0 and a[1] == b[1]


def test_module_entry_point(tmp_path):
    doc = tmp_path / "p.doc"
    r = subprocess.run([sys.executable, "-m", "restrictcat", "build", "trivial", "point", "-o", str(doc)],
                       capture_output=True, text=True)
    assert r.returncode == 0 and "verdict: pass" in r.stdout
