import json
import subprocess
import sys

from noisy_submod import generators as gen
from noisy_submod.cli import main


def write(path, doc):
    path.write_text(json.dumps(doc))
    return str(path)


def test_generate_then_check(tmp_path, capsys):
    inst = str(tmp_path / "a.json")
    assert main(["generate", "additive", "--n", "8", "--out", inst]) == 0
    assert json.loads(open(inst).read())["n"] == 8
    assert main(["check", inst]) == 0
    out = capsys.readouterr().out
    assert "monotone: yes" in out and "submodular: yes" in out


def test_generate_to_stdout_with_params(capsys):
    assert main(["generate", "coverage", "--n", "5", "--seed", "2", "--param", "density=0.5"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["kind"] == "coverage" and doc["n"] == 5


def test_check_reports_violation(tmp_path, capsys, monkeypatch):
    from noisy_submod import cli
    from noisy_submod.setfn import FunctionOf

    # |S|^2 is monotone but supermodular
    monkeypatch.setattr(cli, "load", lambda path: FunctionOf(4, lambda S: len(S) ** 2))
    assert main(["check", "ignored.json"]) == 1
    out = capsys.readouterr().out
    assert "monotone: yes" in out and "submodular: no (witness" in out


def test_check_budget_exit(tmp_path):
    inst = write(tmp_path / "big.json", gen.random_additive(12, seed=0).to_json())
    assert main(["check", inst, "--budget", "100"]) == 3


def test_run_unknown_algorithm_exit_2(tmp_path):
    conf = write(tmp_path / "c.json", {"instance": gen.random_additive(5).to_json(),
                                       "algorithm": "nope", "params": {"k": 2}})
    assert main(["run", conf]) == 2


def test_run_writes_outputs_and_is_reproducible(tmp_path):
    conf = write(tmp_path / "c.json", {
        "instance": gen.random_coverage(10, seed=4).to_json(), "algorithm": ["greedy", "sm"],
        "params": {"k": 4, "c": 2}, "seeds": [0, 1],
        "noise": {"dist": {"kind": "gaussian", "mean": 1.0, "sd": 0.1}}})
    assert main(["run", conf, "--out", str(tmp_path / "o1")]) == 0
    assert main(["run", conf, "--out", str(tmp_path / "o2")]) == 0

    def strip_ms(p):
        return [line.rsplit(",", 1)[0] for line in p.read_text().splitlines()]

    a, b = tmp_path / "o1" / "results.csv", tmp_path / "o2" / "results.csv"
    assert strip_ms(a) == strip_ms(b)
    assert a.read_text().splitlines()[0] == "algo,seed,n,k,value,baseline,ratio,queries,ms"
    summary = json.loads((tmp_path / "o1" / "summary.json").read_text())
    assert set(summary["aggregate"]) == {"greedy", "sm"}


def test_run_seed_override(tmp_path, capsys):
    conf = write(tmp_path / "c.json", {"instance": gen.random_additive(6).to_json(),
                                       "algorithm": "greedy", "params": {"k": 2},
                                       "seeds": [0, 1]})
    assert main(["run", conf, "--seed", "10"]) == 0
    rows = capsys.readouterr().out.splitlines()[1:]
    assert [r.split(",")[1] for r in rows] == ["10", "11"]


def test_run_budget_exit_and_env(tmp_path, monkeypatch):
    conf = write(tmp_path / "c.json", {"instance": gen.random_coverage(12).to_json(),
                                       "algorithm": "greedy", "params": {"k": 4}})
    assert main(["run", conf, "--budget", "10"]) == 3
    monkeypatch.setenv("NOISY_SUBMOD_BUDGET", "10")
    assert main(["run", conf]) == 3
    assert main(["run", conf, "--budget", "100000"]) == 0


def test_bad_inputs_exit_2(tmp_path):
    assert main(["run", str(tmp_path / "missing.json")]) == 2
    assert main(["generate", "nope", "--n", "3"]) == 2
    assert main(["frobnicate"]) == 2
    assert main(["generate", "adversarial", "--n", "16", "--param", "delta=0.9"]) == 2


def test_compare_greedy_ratio(tmp_path, capsys):
    inst = str(tmp_path / "c.json")
    assert main(["generate", "coverage", "--n", "12", "--seed", "3", "--out", inst]) == 0
    capsys.readouterr()
    assert main(["compare", inst, "--k", "3", "--algos", "greedy,whp_small"]) == 0
    out = capsys.readouterr().out
    row = next(line for line in out.splitlines() if line.startswith("greedy"))
    assert float(row.split()[1]) >= 1 - 1 / 2.718281828459045
    assert "baseline=brute_force" in out


def test_compare_with_noise_and_out(tmp_path):
    inst = write(tmp_path / "c.json", gen.random_coverage(10, seed=1).to_json())
    noise = '{"dist": {"kind": "uniform", "lo": 0.9, "hi": 1.1}}'
    assert main(["compare", inst, "--k", "4", "--algos", "greedy,sm", "--param", "c=2",
                 "--noise", noise, "--seeds", "2", "--out", str(tmp_path / "cmp")]) == 0
    assert (tmp_path / "cmp" / "results.csv").exists()


def test_scenario_adversarial(tmp_path, capsys):
    assert main(["scenario", "adversarial", "--n", "256", "--seeds", "10",
                 "--strategy", "always_f2", "--out", str(tmp_path / "s")]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["success_rate"] == 0.5 and doc["trials"] == 10


def test_scenario_greedy_failure_small(capsys):
    assert main(["scenario", "greedy_failure", "--n", "256", "--seeds", "2", "--eps", "0"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 1 + 4


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "noisy_submod", "generate", "additive", "--n", "3"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and json.loads(res.stdout)["n"] == 3
