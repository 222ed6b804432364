import json
import subprocess
import sys

import pytest

from apk.cli import run


def _doc(path):
    return json.loads(path.read_text())


@pytest.fixture(scope="module")
def files(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    fib = d / "fib.json"
    assert run(["gen", "--family", "fibonacci-cps", "--region", "-10000", "10000",
                "--out", str(fib)]) == 0
    lat = d / "lattice.json"
    assert run(["gen", "--family", "lattice", "--region", "-1000", "1000",
                "--out", str(lat)]) == 0
    return d, fib, lat


def test_gen_writes_point_set(files):
    d, fib, _ = files
    doc = _doc(fib)
    assert doc["manifest"]["subcommand"] == "gen"
    assert doc["result"]["format"].startswith("apk-")
    small = d / "small.json"
    assert run(["gen", "--family", "fibonacci-cps", "--region", "-1000", "1000",
                "--out", str(small)]) == 0
    assert small.exists()


def test_stripe_verify_lattice_exit_1(files, tmp_path):
    _, _, lat = files
    out, svg = tmp_path / "v.json", tmp_path / "v.svg"
    code = run(["stripe-verify", str(lat), "--a", "1", "--L1", "1.41421356", "--L2", "0.1",
                "--R", "2", "--out", str(out), "--svg", str(svg)])
    res = _doc(out)["result"]
    assert code == 1 and res["violations"] and not res["holds"]
    assert svg.read_text().startswith("<?xml")
    assert run(["stripe-verify", str(lat), "--a", "1", "--L1", "1", "--L2", "0.01", "--R", "2",
                "--out", str(out)]) == 0
    assert _doc(out)["result"]["violations"] == []


def test_stripe_search_and_round_trip(files, tmp_path):
    _, fib, _ = files
    cert = tmp_path / "cert.json"
    assert run(["stripe-search", str(fib), "--target-period", "3", "--target-halfwidth", "0.2",
                "--eps", "0.05", "--out", str(cert)]) == 0
    res = _doc(cert)["result"]
    assert res["holds"] and abs(res["spec"]["L1"] - 3) < 0.05
    rt = tmp_path / "rt.json"
    assert run(["round-trip", str(fib), "--cert", str(cert), "--out", str(rt)]) == 0
    assert _doc(rt)["result"]["period_error"] < 0.1
    eq = tmp_path / "eq.json"
    assert run(["equivariance", str(fib), "--cert", str(cert), "--R-grid", "100", "400",
                "--out", str(eq)]) == 0
    assert len(_doc(eq)["result"]["omega"]) == 2


def test_search_outputs_are_reproducible(files, tmp_path):
    _, fib, _ = files
    outs = []
    for k in range(2):
        o, s = tmp_path / f"c{k}.json", tmp_path / f"c{k}.svg"
        assert run(["stripe-search", str(fib), "--target-period", "3", "--target-halfwidth",
                    "0.2", "--eps", "0.05", "--out", str(o), "--svg", str(s)]) == 0
        outs.append((_doc(o)["result"], s.read_bytes()))
    assert outs[0] == outs[1]


def test_discrete_spectrum_not_found(files, tmp_path):
    _, _, lat = files
    assert run(["stripe-search", str(lat), "--target-period", "sqrt2", "--target-halfwidth",
                "0.1", "--eps", "0.01", "--out", str(tmp_path / "x.json")]) == 3


def test_small_window_reports_no_decay(files, tmp_path):
    d, _, _ = files
    assert run(["stripe-search", str(d / "small.json"), "--target-period", "10",
                "--target-halfwidth", "0.5", "--eps", "0.05",
                "--out", str(tmp_path / "x.json")]) == 3


def test_usage_errors(files, tmp_path):
    _, _, lat = files
    assert run([]) == 2
    assert run(["nope"]) == 2
    assert run(["stripe-verify", str(lat)]) == 2
    assert run(["stripe-verify", str(tmp_path / "missing.json"), "--a", "1", "--L1", "1",
                "--L2", "0.1", "--R", "2"]) == 2
    assert run(["gen", "--family", "penrose", "--region", "0", "1"]) == 2


def test_misc_subcommands(files, tmp_path, capsys):
    d, fib, lat = files
    small = d / "small.json"
    for argv in (["eigenvalues", "--scheme", "fibonacci", "--target", "10"],
                 ["eigenvalues", str(small), "--phys-max", "0.5", "--int-max", "3"],
                 ["metric", str(lat), str(lat), "--r-grid", "0.1", "0.2"],
                 ["locator", str(small), "--x0", "0", "--R0", "5", "--derivability", "20"],
                 ["axioms-test", "--cases", "30"],
                 ["report", str(small)]):
        capsys.readouterr()
        assert run(argv) == 0, argv
        doc = json.loads(capsys.readouterr().out)
        assert doc["manifest"]["subcommand"] == argv[0]


def test_manifest_hashes_inputs(files, capsys, monkeypatch):
    d, _, _ = files
    monkeypatch.setenv("APK_THREADS", "2")
    assert run(["report", str(d / "small.json")]) == 0
    man = json.loads(capsys.readouterr().out)["manifest"]
    assert man["threads"] == 2 and len(man["inputs"][str(d / "small.json")]) == 64
    monkeypatch.setenv("APK_THREADS", "zero")
    assert run(["report", str(d / "small.json")]) == 2


def test_console_script(tmp_path):
    out = tmp_path / "z.json"
    p = subprocess.run([sys.executable, "-m", "apk.cli", "gen", "--family", "lattice",
                        "--region", "-5", "5", "--out", str(out)], capture_output=True)
    assert p.returncode == 0 and out.exists()
