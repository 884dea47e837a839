import json
import subprocess
import sys

import pytest

from coordmech.cli import main


def run(args, capsys):
    code = main([str(a) for a in args])
    return code, capsys.readouterr().out


@pytest.fixture
def pair_file(tmp_path):
    path = tmp_path / "pair.json"
    path.write_text('{"weights":[1,1],"proc":[[1,2]]}')
    return path


def test_gen_random(tmp_path, capsys):
    out = tmp_path / "r.json"
    code, _ = run(["gen", "random", "--n", 5, "--m", 3, "--seed", 1, "-o", out], capsys)
    data = json.loads(out.read_text())
    assert code == 0 and len(data["weights"]) == 5 and len(data["proc"]) == 3


def test_gen_smith_lb(capsys):
    code, out = run(["gen", "smith-lb", "--k", 3, "--m", 36], capsys)
    data = json.loads(out)
    assert code == 0
    assert {"instance", "opt_assignment", "nash_assignment"} <= set(data)


def test_gen_tree_lb_target(capsys):
    code, out = run(["gen", "tree-lb", "--depth", 3, "--variant", "det"], capsys)
    assert code == 0 and json.loads(out)["target_ratio"] == "13/6"


def test_eval_ps_total(pair_file, capsys):
    code, out = run(["eval", pair_file, "--policy", "ps"], capsys)
    assert code == 0 and json.loads(out)["weighted_total"] == 5


def test_eval_single_job(tmp_path, capsys):
    path = tmp_path / "one.json"
    path.write_text('{"weights":[3],"proc":[["1/2"]]}')
    code, out = run(["eval", path], capsys)
    assert json.loads(out)["weighted_total"] == "3/2"


def test_eval_identities(tmp_path, capsys):
    path = tmp_path / "r.json"
    run(["gen", "random", "--n", 6, "--m", 3, "--seed", 2, "-o", path], capsys)
    code, out = run(["eval", path, "--identities"], capsys)
    assert code == 0 and all(json.loads(out)["checks"].values())


def test_eval_bad_instance(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text('{"weights":[1],"proc":[["inf"]]}')
    assert main(["eval", str(path)]) == 2


def test_approx_crossing(tmp_path, capsys):
    path = tmp_path / "x.json"
    path.write_text('{"weights":[1,1],"proc":[[1,3],[3,1]]}')
    code, out = run(["approx", path], capsys)
    assert code == 0 and json.loads(out)["ratio"] == 1


def test_dynamics_from_nash(tmp_path, capsys):
    inst = tmp_path / "x.json"
    inst.write_text('{"weights":[1,1],"proc":[[1,3],[3,1]]}')
    x = tmp_path / "a.json"
    x.write_text('{"machine_of":[0,1]}')
    code, out = run(["dynamics", inst, "--assignment", x], capsys)
    data = json.loads(out)
    assert code == 0 and data["num_steps"] == 0 and data["is_nash"]


def test_approx_suite_csv(capsys):
    code, out = run(["approx", "--suite", "tiny20"], capsys)
    lines = out.strip().splitlines()
    assert code == 0 and lines[0].startswith("instance_id,policy,opt,cost,ratio,steps")
    assert len(lines) == 21


def test_poa_csv(capsys):
    code, out = run(["poa", "--policy", "sr", "--suite", "tiny20"], capsys)
    assert code == 0 and out.splitlines()[0] == "instance_id,policy,opt,cost,ratio,steps"


@pytest.mark.parametrize("flags", [["--lemma-ineq", 500], ["--pd", 25], ["--chung", 200],
                                   ["--identities", 10], ["--potential", 100], ["--reduction", 5]])
def test_check_passes(flags, capsys):
    code, out = run(["check", *flags], capsys)
    assert code == 0 and out.startswith("PASS")


def test_check_without_flags(capsys):
    assert main(["check"]) == 2


def test_deterministic_output(tmp_path):
    cmd = [sys.executable, "-m", "coordmech", "poa", "--policy", "rand", "--suite", "tiny20"]
    first = subprocess.run(cmd, capture_output=True, check=True).stdout
    second = subprocess.run(cmd, capture_output=True, check=True).stdout
    assert first == second and first


def test_seed_from_environment(tmp_path):
    cmd = [sys.executable, "-m", "coordmech", "gen", "random", "--n", "3", "--m", "2"]
    a = subprocess.run(cmd, capture_output=True, env={"COORDMECH_SEED": "4"}, check=True).stdout
    b = subprocess.run(cmd, capture_output=True, env={"COORDMECH_SEED": "5"}, check=True).stdout
    assert a != b


def test_report_writes_figures(tmp_path, capsys):
    pytest.importorskip("matplotlib")
    out = tmp_path / "rep"
    code, _ = run(["report", "--out", out, "--limit", 5, "--smith-k", 2, "--tree-depth", 2,
                   "--chung", 20], capsys)
    assert code == 0
    for name in ("poa_sr.csv", "approx.csv", "chung.csv", "lower_bounds.csv",
                 "poa_ratios.png", "approx_ratios.png", "chung.png", "lower_bounds.png"):
        assert (out / name).stat().st_size > 0
