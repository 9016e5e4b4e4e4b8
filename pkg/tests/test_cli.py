import json
import subprocess
import sys

import pytest

from sl2branch import classfun
from sl2branch.cli import EXIT_BUDGET, EXIT_CERT, EXIT_OK, EXIT_USAGE, RunConfig, main
from sl2branch.yudata import data_of_depth


@pytest.fixture(autouse=True)
def _restore_threads():
    old = classfun._threads
    yield
    classfun.set_threads(old)


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_depth_zero_table(capsys):
    code, out, _ = run(capsys, "table", "depth-zero", "--q", "3", "--omega", "1", "--vertex", "0", "--max-depth", "2")
    assert code == EXIT_OK
    obj = json.loads(out)
    assert [(c["d"], c["label"], c["degree"]) for c in obj["components"]] == [
        (0, "sigma", 2), (2, "pi+", 12), (2, "pi-", 12)]
    assert obj["datum"] == {"kind": "depth-zero", "q": 3, "sigma": "1", "vertex": 0}


def test_depth_zero_split_vertex1(capsys):
    code, out, _ = run(capsys, "table", "depth-zero", "--q", "3", "--omega", "plus", "--vertex", "1",
                       "--max-depth", "1", "--csv")
    assert code == EXIT_OK
    assert out.splitlines() == ["d,mu_t,mu_lambda,label,degree,certified", "1,1,1,pi+,4,true"]


@pytest.mark.parametrize("argv", [
    ["table", "depth-zero", "--q", "3", "--omega", "1"],                      # missing --vertex
    ["table", "depth-zero", "--q", "4", "--omega", "1", "--vertex", "0"],     # even q
    ["table", "depth-zero", "--q", "3", "--omega", "7", "--vertex", "0"],     # bad omega
    ["table", "depth-zero", "--q", "3", "--omega", "1", "--vertex", "2"],
    ["table", "positive", "--q", "3", "--torus", "u-eps", "--r", "1/2"],      # no such datum
    ["table", "positive", "--q", "3", "--torus", "u-eps"],
    ["table", "positive", "--q", "3", "--torus", "u-eps", "--r", "1", "--phi", "99"],
    ["table", "depth-zero", "--q", "3", "--omega", "1", "--vertex", "0", "--tol", "0.5"],
    ["intertwine", "--q", "3", "--datum", "/nonexistent.json"],
    ["frobnicate"],
])
def test_usage_errors(capsys, argv):
    try:
        code = main(argv)
    except SystemExit as exc:  # argparse
        code = exc.code
    capsys.readouterr()
    assert code == EXIT_USAGE


def test_budget_exit(capsys):
    argv = ["table", "depth-zero", "--q", "3", "--omega", "1", "--vertex", "0", "--max-depth", "2", "--cap", "100"]
    code, out, err = run(capsys, *argv)
    assert code == EXIT_OK and "predicted, unverified" in err
    assert json.loads(out)["components"][1]["certified"] is False
    code, _, _ = run(capsys, *argv, "--strict")
    assert code == EXIT_BUDGET


def test_certification_failure_exit(capsys, monkeypatch):
    from sl2branch import branching as br

    orig = br._is_int
    monkeypatch.setattr(br, "_is_int", lambda z, n, tol=br.TOL: orig(z, n + 1, tol))
    code, _, err = run(capsys, "table", "depth-zero", "--q", "3", "--omega", "plus", "--vertex", "1",
                       "--max-depth", "1")
    assert code == EXIT_CERT and "certification failed" in err


def test_positive_table_and_datum_file(capsys, tmp_path):
    code, out, _ = run(capsys, "table", "positive", "--q", "3", "--torus", "r-1-pi", "--r", "1/2",
                       "--phi", "1", "--max-depth", "2")
    assert code == EXIT_OK
    obj = json.loads(out)
    assert [c["d"] for c in obj["components"]] == [1, 2]
    path = tmp_path / "datum.json"
    path.write_text(json.dumps(obj["datum"]))
    code, out2, _ = run(capsys, "table", "positive", "--q", "3", "--datum", str(path), "--max-depth", "2")
    assert code == EXIT_OK and out2 == out


def test_intertwine(capsys, tmp_path):
    files = []
    for i, d in enumerate(data_of_depth("r-1-pi", 3, "1/2")[:2]):
        p = tmp_path / f"d{i}.json"
        p.write_text(json.dumps(d.to_json()))
        files += ["--datum", str(p)]
    p = tmp_path / "dz.json"
    p.write_text(json.dumps({"kind": "depth-zero", "q": 3, "sigma": "plus", "vertex": 0}))
    files += ["--datum", str(p)]
    code, out, _ = run(capsys, "intertwine", "--q", "3", "--max-depth", "2", *files)
    assert code == EXIT_OK
    obj = json.loads(out)
    assert obj["observed_equals_predicted"] is True
    assert len(obj["matrix"]) == 3


def test_chars(capsys):
    code, out, _ = run(capsys, "chars", "sl2fq", "--q", "5")
    assert code == EXIT_OK
    assert out.splitlines()[0] == "class,size,sigma(omega_1),sigma(omega_2),sigma0^+,sigma0^-"
    assert "(|G| = 120)" in out


def test_out_file(capsys, tmp_path):
    path = tmp_path / "t.json"
    code, out, _ = run(capsys, "table", "depth-zero", "--q", "3", "--omega", "1", "--vertex", "1",
                       "--max-depth", "1", "--out", str(path))
    assert code == EXIT_OK and out == ""
    assert json.loads(path.read_text())["components"][0]["degree"] == 8 // 2


def test_output_independent_of_threads(capsys):
    argv = ["table", "positive", "--q", "3", "--torus", "u-eps", "--r", "1", "--max-depth", "3", "--csv"]
    outs = {run(capsys, *argv, "--threads", n)[1] for n in ("1", "4")}
    assert len(outs) == 1


def test_threads_env(monkeypatch):
    monkeypatch.setenv("SL2B_THREADS", "3")
    classfun.set_threads(None)
    assert classfun.get_threads() == 3


def test_verify_filter(capsys):
    code, out, _ = run(capsys, "verify", "suite", "--q", "3", "--filter", "cuspidal")
    assert code == EXIT_OK
    lines = out.splitlines()
    assert len(lines) == 3 and all(line.startswith("PASS cuspidal-table") for line in lines)
    code, _, _ = run(capsys, "verify", "suite", "--filter", "no-such-check")
    assert code == EXIT_USAGE


def test_run_config_validation():
    RunConfig().validate()
    for bad in (RunConfig(q=9 * 3), RunConfig(tol=0), RunConfig(cap=0), RunConfig(threads=0), RunConfig(max_depth=-1)):
        with pytest.raises(ValueError):
            bad.validate()


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "sl2branch", "table", "depth-zero", "--q", "3", "--omega", "1"],
                          capture_output=True, text=True)
    assert proc.returncode == EXIT_USAGE
    assert "--vertex" in proc.stderr
