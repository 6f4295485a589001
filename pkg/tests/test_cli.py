import json
import os

import pandas as pd
import pytest

from stochqaoa import cli


@pytest.fixture()
def reference(instances_dir):
    return os.path.join(instances_dir, "reference-instance.yaml")


def test_solve_exact(setup_test, reference, instances_dir, capsys):
    assert cli.main(["solve-exact", "--instance", reference]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["hn_j"] == [2]
    assert report["hn_value"] == pytest.approx(-0.45)
    assert report["evpi"] == pytest.approx(0.075)

    point_mass = os.path.join(instances_dir, "point-mass.yaml")
    assert cli.main(["solve-exact", "--instance", point_mass]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["evpi"] == pytest.approx(0., abs=1e-12)
    assert report["hn_j"] == [2]

    assert cli.main(["solve-exact", "--instance", reference, "--format", "csv"]) == 0
    out = capsys.readouterr().out
    assert out.splitlines()[0].startswith("hn_j,hn_value")


def test_inspect(setup_test, reference, capsys):
    assert cli.main(["inspect", "--instance", reference, "--what", "layout"]) == 0
    assert capsys.readouterr().out == \
        "8 qubits: j[0..1] buy[2..3] sell[4..5] p[6..7]\n"

    assert cli.main(["inspect", "--instance", reference, "--what", "ising"]) == 0
    model = json.loads(capsys.readouterr().out)
    assert model["scenario_dependent_couplings"] == []
    assert model["num_spins"] == 6

    assert cli.main(["inspect", "--instance", reference, "--what", "qubo"]) == 0
    assert "p0*x0" in capsys.readouterr().out


def test_solve_qaoa_is_reproducible(setup_test, reference, tmp_path):
    outputs = []
    for k in range(2):
        path = tmp_path / f"run{k}.json"
        assert cli.main(["solve-qaoa", "--instance", reference, "--layers", "2",
                         "--max-evaluations", "30", "--seed", "3",
                         "--output", str(path)]) == 0
        outputs.append(path.read_bytes())
    assert outputs[0] == outputs[1]
    d = json.loads(outputs[0])
    assert d["layers"] == 2
    assert d["config"]["seed"] == 3
    assert d["oracle_hn_j"] == [2]
    assert "wall_time" not in d


def test_sweep_outputs(setup_test, reference, tmp_path):
    out = tmp_path / "sweep.csv"
    summary = tmp_path / "summary.csv"
    assert cli.main(["sweep", "--instance", reference, "--layers", "1,2", "--runs", "2",
                     "--max-evaluations", "10", "--output", str(out),
                     "--summary", str(summary)]) == 0
    table = pd.read_csv(out)
    assert len(table) == 4
    assert table["seed"].tolist() == [0, 1, 2, 3]
    assert len(pd.read_csv(summary)) == 2

    rerun = tmp_path / "rerun.csv"
    assert cli.main(["sweep", "--instance", reference, "--layers", "1,2", "--runs", "2",
                     "--max-evaluations", "10", "--output", str(rerun)]) == 0
    assert rerun.read_bytes() == out.read_bytes()


def test_sampled_run(setup_test, reference, tmp_path):
    path = tmp_path / "sampled.json"
    assert cli.main(["solve-qaoa", "--instance", reference, "--eval-mode", "sampled",
                     "--shots", "4096", "--max-evaluations", "5",
                     "--output", str(path)]) == 0
    d = json.loads(path.read_text())
    assert sum(d["shot_histogram"].values()) == 4096


def test_config_file(setup_test, reference, instances_dir, tmp_path):
    path = tmp_path / "run.json"
    config = os.path.join(instances_dir, "qaoa-config.yaml")
    assert cli.main(["solve-qaoa", "--instance", reference, "--config", config,
                     "--layers", "1", "--max-evaluations", "5",
                     "--output", str(path)]) == 0
    d = json.loads(path.read_text())
    assert d["config"]["layers"] == 1
    assert d["config"]["init_strategy"] == "annealing_ramp"
    assert d["evaluations"] <= 5


def test_errors(setup_test, reference, tmp_path):
    with pytest.raises(SystemExit) as e:
        cli.main(["solve-qaoa", "--instance", reference, "--layers", "0"])
    assert e.value.code == 2
    with pytest.raises(SystemExit) as e:
        cli.main(["inspect", "--instance", reference, "--what", "circuit"])
    assert e.value.code == 2

    bad = tmp_path / "bad.yaml"
    bad.write_text("horizon: 1\nprices: {ev: 0.25, buy: 0.4, sell: 0.1}\n"
                   "timesteps:\n  - j_bits: 2\n    recourse_bits: 2\n"
                   "    dist: [\"1:0.2\", \"2-0.8\"]\n")
    assert cli.main(["solve-exact", "--instance", str(bad)]) == 2
    assert cli.main(["solve-exact", "--instance", str(tmp_path / "none.yaml")]) == 2

    # probabilities do not sum to 1
    invalid = tmp_path / "invalid.yaml"
    invalid.write_text("horizon: 1\nprices: {ev: 0.25, buy: 0.4, sell: 0.1}\n"
                       "timesteps:\n  - j_bits: 2\n    recourse_bits: 2\n"
                       "    dist: {1: 0.2, 2: 0.5}\n")
    assert cli.main(["solve-exact", "--instance", str(invalid)]) == 2

    # negative penalty reaches the library
    assert cli.main(["inspect", "--instance", reference, "--what", "qubo",
                     "--penalty", "-1"]) == 2


def test_runtime_errors(setup_test, tmp_path):
    # 2^25 first-stage plans exceed the exhaustive search cap
    wide = tmp_path / "wide.yaml"
    wide.write_text("horizon: 1\nprices: {ev: 0.25, buy: 0.4, sell: 0.1}\n"
                    "timesteps:\n  - j_bits: 25\n    recourse_bits: 26\n"
                    "    dist: {1: 1.0}\n")
    assert cli.main(["solve-exact", "--instance", str(wide)]) == 1

    # 33 qubits exceed the statevector cap
    tall = tmp_path / "tall.yaml"
    tall.write_text("horizon: 1\nprices: {ev: 0.25, buy: 0.4, sell: 0.1}\n"
                    "timesteps:\n  - j_bits: 10\n    recourse_bits: 11\n"
                    "    dist: {1: 1.0}\n")
    assert cli.main(["solve-qaoa", "--instance", str(tall)]) == 1
    assert cli.main(["sweep", "--instance", str(tall), "--layers", "1",
                     "--runs", "1", "--output", str(tmp_path / "sweep.csv")]) == 1
    assert cli.main(["inspect", "--instance", str(tall), "--what", "layout"]) == 0
