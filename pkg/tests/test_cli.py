import csv
import io
import json

import pytest

from qfragile.cli import run
from qfragile.fragility import r_wn


def call(capsys, *argv):
    code = run(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_e_estimate_cat(capsys):
    code, out, _ = call(capsys, "e-estimate", "--state", '{"kind":"cat","n":4}')
    assert code == 0
    report = json.loads(out)
    assert report["e"] == pytest.approx(1.0, abs=1e-6)
    assert set(report) == {"e", "witness_angles", "starts", "converged"}


def test_e_estimate_fixed_family(capsys):
    code, out, _ = call(capsys, "e-estimate", "--state", '{"kind":"cat","n":3}', "--family", '"P"')
    assert code == 0 and json.loads(out)["e"] == pytest.approx(1.0)


def test_bounds_table(capsys):
    code, out, _ = call(capsys, "bounds-table", "--n", "2..10", "--w", "0.1,0.3", "--alpha", "0.5")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert list(rows[0]) == ["n", "w", "r_wn", "asymptotic", "alpha", "haupt_x"]
    assert len(rows) == 18
    for row in rows:
        assert 0.0 <= float(row["r_wn"]) <= 1.0
        assert float(row["r_wn"]) == pytest.approx(r_wn(int(row["n"]), float(row["w"])), rel=1e-11)
    assert rows[2]["r_wn"] == "0.9855"


def test_sweep(capsys, monkeypatch):
    monkeypatch.setenv("QFRAGILE_THREADS", "2")
    code, out, _ = call(capsys, "sweep", "--n", "3,2", "--w", "0.1,0", "--method", "ascent")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [(r["n"], r["w"]) for r in rows] == [("2", "0"), ("2", "0.1"), ("3", "0"), ("3", "0.1")]
    for r in rows:
        assert float(r["e_D_cat"]) <= float(r["r_wn"]) + 1e-6
    assert rows[1]["e_D_cat"] == "0.81"


def test_hypersurface(capsys):
    code, out, _ = call(capsys, "hypersurface", "--state", '{"kind":"cat","n":5}')
    res = json.loads(out)
    assert code == 0 and res["certifies_entanglement"]
    code, out, _ = call(capsys, "hypersurface", "--state", '{"kind":"separable","n":3,"terms":4,"seed":1}',
                        "--format", "csv")
    assert code == 0 and out.splitlines()[1].endswith("true,false")


def test_channel_apply(capsys):
    code, out, _ = call(capsys, "channel-apply", "--state", '{"kind":"cat","n":1}',
                        "--channel", '{"channel":"D","w":1}')
    res = json.loads(out)
    assert code == 0
    flat = [v for row in res["rho"] for entry in row for v in entry]
    assert flat == pytest.approx([0.5, 0, 0, 0, 0, 0, 0.5, 0])


def test_circuit_run(capsys):
    circuit = {"n": 3, "w": 0.3, "gates": [{"u1": {"q": 1, "gate": "H"}},
                                           {"u2": {"qi": 1, "qj": 2, "gate": "CNOT"}},
                                           {"u2": {"qi": 2, "qj": 3, "gate": "CNOT"}}]}
    code, out, _ = call(capsys, "circuit-run", "--circuit", json.dumps(circuit))
    res = json.loads(out)
    assert code == 0 and res["passed"] and res["e"] < res["haupt_x"]
    code, out, _ = call(capsys, "circuit-run", "--random", "3", "--error-model", "dephasing", "--method", "ascent")
    assert code == 0 and json.loads(out)["passed"]


def test_circuit_run_failing_bound_exits_2(capsys):
    circuit = {"n": 2, "w": 0.0, "gates": [{"u1": {"q": 1, "gate": "H"}}, {"u2": {"qi": 1, "qj": 2, "gate": "CNOT"}}]}
    code, _, _ = call(capsys, "circuit-run", "--circuit", json.dumps(circuit), "--tol", "-0.5")
    assert code == 2


def test_verify_quick_subset(capsys):
    code, out, _ = call(capsys, "verify", "--level", "quick", "--only", "6,8,11")
    assert code == 0
    assert out.splitlines()[-1] == "3/3 checks passed"


@pytest.mark.parametrize("argv, needle", [
    (["e-estimate", "--state", '{"kind":"cat","n":40}'], "state.n"),
    (["e-estimate", "--state", '{"kind":"cat","n":4,"x":1}'], "state.x"),
    (["e-estimate", "--state", '{"kind":'], "malformed JSON"),
    (["e-estimate", "--state", '{"kind":"cat","n":2}', "--restarts", "1"], "restarts"),
    (["channel-apply", "--state", '{"kind":"cat","n":2}', "--channel", '{"channel":"D","w":3}'], "channel.w"),
    (["circuit-run"], "--circuit"),
    (["verify", "--only", "99"], "--only"),
])
def test_input_errors_exit_1(capsys, argv, needle):
    code, _, err = call(capsys, *argv)
    assert code == 1
    assert needle in err


@pytest.mark.parametrize("argv", [["e-estimate", "--bogus"], ["nope"], ["bounds-table", "--n", "0..3", "--w", "0.1"],
                                  ["bounds-table", "--n", "2", "--w", "1.5"]])
def test_usage_errors_exit_1(capsys, argv):
    with pytest.raises(SystemExit) as exc:
        run(argv)
    assert exc.value.code == 1


def test_deterministic_output(capsys, tmp_path):
    argv = ["e-estimate", "--state", '{"kind":"separable","n":3,"terms":3,"seed":5}', "--seed", "4"]
    first = call(capsys, *argv)[1]
    assert call(capsys, *argv)[1] == first
    target = tmp_path / "out.json"
    assert run(argv + ["--output", str(target)]) == 0
    assert target.read_text() == first


def test_threads_env_validation(capsys, monkeypatch):
    monkeypatch.setenv("QFRAGILE_THREADS", "zero")
    code, _, err = call(capsys, "sweep", "--n", "2", "--w", "0.1")
    assert code == 1 and "QFRAGILE_THREADS" in err
