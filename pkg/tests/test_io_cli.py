import json
import math

import numpy as np
import pytest

from soundranging.cli import main
from soundranging.exceptions import InvalidInputError
from soundranging.instances import random_instance
from soundranging.io import dump_json, load_problem, problem_from_dict, problem_to_dict, result_to_dict, save_problem
from soundranging.solver import SolverConfig, rcd_solve


def test_round_trip_bit_identical(tmp_path):
    for p in (1.0, 2.0, math.inf, 1.5):
        inst = random_instance(4, 3, p)
        path = tmp_path / "p.json"
        save_problem(path, inst.problem, inst.truth)
        pf = load_problem(path)
        assert np.array_equal(pf.problem.sensors, inst.problem.sensors)
        assert np.array_equal(pf.problem.times, inst.problem.times)
        assert pf.problem.norm == inst.problem.norm
        assert pf.problem.initial_ball == inst.problem.initial_ball
        assert np.array_equal(pf.truth.source, inst.truth.source)
        assert pf.truth.emission_time == inst.truth.emission_time
        save_problem(tmp_path / "q.json", pf.problem, pf.truth)
        assert path.read_bytes() == (tmp_path / "q.json").read_bytes()


def test_inf_written_as_string():
    d = problem_to_dict(random_instance(1, 2, "inf").problem)
    assert d["norm_p"] == "inf" and "ground_truth" not in d
    json.dumps(d, allow_nan=False)


@pytest.mark.parametrize(
    "mutate",
    [
        lambda d: d.update(format=2),
        lambda d: d.pop("times"),
        lambda d: d.update(kind="sr-result"),
        lambda d: d.update(times=d["times"][:-1]),
        lambda d: d.update(norm_p=0.5),
        lambda d: d.update(sensors=[[0.0, 0.0]] * len(d["sensors"])),
    ],
)
def test_malformed_files_rejected(mutate):
    d = problem_to_dict(random_instance(1, 2).problem)
    mutate(d)
    with pytest.raises(InvalidInputError):
        problem_from_dict(d)


def test_result_dict_fields():
    inst = random_instance(2, 2, radius=1.0)
    res = rcd_solve(inst.problem, SolverConfig(delta=1e-2))
    d = result_to_dict(res, truth=inst.truth, norm=inst.problem.norm)
    assert d["status"] == "converged" and d["truth_distance"] < 1e-2
    assert d["levels"][0]["k"] == 0 and len(d["levels"]) == d["halt_level"] + 1
    assert d["wall_time_s"] is None
    json.dumps(d, allow_nan=False)


# command line

def run(argv, capsys=None):
    rc = main([str(a) for a in argv])
    out = capsys.readouterr() if capsys is not None else None
    return rc, out


def test_cli_gen_solve_preset(tmp_path, capsys):
    prob = tmp_path / "ex1.json"
    assert run(["gen", "--preset", "example1", "--out", prob], capsys)[0] == 0
    out = tmp_path / "r.json"
    rc, _ = run(["solve", prob, "--out", out], capsys)
    assert rc == 0
    res = json.loads(out.read_text())
    assert res["status"] == "converged" and res["truth_distance"] < 1e-3
    assert res["solver"] == "rcd" and res["gamma"] is None


def test_cli_gen_dimension_one(tmp_path, capsys):
    prob = tmp_path / "p.json"
    assert run(["gen", "-m", "1", "--seed", "3", "--out", prob], capsys)[0] == 0
    d = json.loads(prob.read_text())
    assert len(d["sensors"]) == 3 and d["dimension"] == 1


def test_cli_blind_file_same_answer(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    run(["gen", "-m", "2", "--seed", "9", "--out", a], capsys)
    run(["gen", "-m", "2", "--seed", "9", "--blind", "--out", b], capsys)
    assert "ground_truth" not in json.loads(b.read_text())
    ra, rb = tmp_path / "ra.json", tmp_path / "rb.json"
    assert run(["solve", a, "--out", ra, "--delta", "1e-2"], capsys)[0] == 0
    assert run(["solve", b, "--out", rb, "--delta", "1e-2"], capsys)[0] == 0
    ja, jb = json.loads(ra.read_text()), json.loads(rb.read_text())
    assert ja["approx"] == jb["approx"]
    assert jb["truth_distance"] is None


def test_cli_custom_layout(tmp_path, capsys):
    prob = tmp_path / "p.json"
    rc, _ = run(["gen", "--layout", "custom", "--sensors", "0,0;3,0;0,3;-2,-2", "--source", "0.2,0.1",
                 "--radius", "1", "--out", prob], capsys)
    assert rc == 0
    d = json.loads(prob.read_text())
    assert d["ground_truth"]["source"] == [0.2, 0.1]
    assert run(["gen", "--layout", "custom", "--out", prob], capsys)[0] == 1


def test_cli_large_delta_and_gamma_zero(tmp_path, capsys):
    prob = tmp_path / "p.json"
    run(["gen", "-m", "2", "--seed", "1", "--out", prob], capsys)
    out = tmp_path / "r.json"
    assert run(["solve", prob, "--delta", "5", "--out", out], capsys)[0] == 0
    assert json.loads(out.read_text())["halt_level"] == 1
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    run(["solve", prob, "--no-timing", "--out", a], capsys)
    run(["solve", prob, "--no-timing", "--gamma", "0", "--out", b], capsys)
    assert a.read_bytes() == b.read_bytes()


def test_cli_noisy(tmp_path, capsys):
    prob = tmp_path / "p.json"
    run(["gen", "-m", "2", "--seed", "2", "--out", prob], capsys)
    out = tmp_path / "r.json"
    assert run(["solve", prob, "--gamma", "1e-3", "--delta", "1e-2", "--out", out], capsys)[0] == 0
    d = json.loads(out.read_text())
    assert d["solver"] == "noisy" and d["gamma"] == 1e-3


def test_cli_cap_exit_code(tmp_path, capsys):
    prob = tmp_path / "p.json"
    run(["gen", "--preset", "example1", "--out", prob], capsys)
    out = tmp_path / "r.json"
    assert run(["solve", prob, "--max-level", "2", "--out", out], capsys)[0] == 2
    assert json.loads(out.read_text())["status"] == "level-cap"
    rc, _ = run(["oracle", prob, "--step", "1e-4"], capsys)
    assert rc == 2


def test_cli_invalid_inputs(tmp_path, capsys):
    assert run(["solve", tmp_path / "missing.json", "--out", tmp_path / "r.json"], capsys)[0] == 1
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(["solve", bad, "--out", tmp_path / "r.json"], capsys)[0] == 1
    assert run(["gen", "--p", "0.5", "--out", tmp_path / "x.json"], capsys)[0] == 1
    assert run(["frobnicate"], capsys)[0] == 1


def test_cli_oracle(tmp_path, capsys):
    prob = tmp_path / "p.json"
    run(["gen", "--preset", "example1", "--out", prob], capsys)
    rc, out = run(["oracle", prob, "--step", "0.25"], capsys)
    assert rc == 0
    rep = json.loads(out.out)
    assert rep["argmin"] == [0.0, 0.0] and rep["truth_distance"] == 0.0


def test_cli_oracle_single_sensor_warns(tmp_path, capsys):
    prob = tmp_path / "p.json"
    dump_json({"format": 1, "kind": "sr-problem", "dimension": 2, "norm_p": 2, "sensors": [[1.0, 1.0]],
               "times": [0.0], "initial_ball": {"center": [0.0, 0.0], "radius": 1.0}}, prob)
    rc, out = run(["oracle", prob, "--step", "0.5"], capsys)
    assert rc == 0 and "warning" in out.err


def test_cli_gm(tmp_path, capsys):
    prob = tmp_path / "ex2.json"
    run(["gen", "--preset", "example2", "--out", prob], capsys)
    csv_path = tmp_path / "profile.csv"
    rc, out = run(["gm", prob, "--start-sensor", "1", "--profile-points", "11", "--out", csv_path], capsys)
    assert rc == 0
    rep = json.loads(out.out)
    assert np.allclose(rep["endpoint"], [2.039, 0.253], atol=5e-3)
    assert rep["D2"] == pytest.approx(0.00318, abs=5e-4)
    lines = csv_path.read_text().splitlines()
    assert lines[0] == "s,x1,x2,D2" and len(lines) == 12
    assert run(["gm", prob], capsys)[0] == 1
    assert run(["gm", prob, "--start-sensor", "9"], capsys)[0] == 1


def test_cli_threads_env(tmp_path, capsys, monkeypatch):
    prob = tmp_path / "p.json"
    run(["gen", "-m", "2", "--seed", "5", "--out", prob], capsys)
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    run(["solve", prob, "--no-timing", "--out", a], capsys)
    monkeypatch.setenv("RCD_THREADS", "8")
    run(["solve", prob, "--no-timing", "--out", b], capsys)
    assert a.read_bytes() == b.read_bytes()
