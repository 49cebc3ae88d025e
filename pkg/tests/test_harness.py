import json
import subprocess
import sys

import jsonschema
import numpy as np
import pytest

from dpcut.cli import main
from dpcut.graph import gnp, load_edge_list, save_edge_list
from dpcut.harness import (
    CSV_COLUMNS,
    SEED_ENV,
    ConfigError,
    ExperimentConfig,
    compare_baselines,
    cut_errors,
    evaluation_cuts,
    fit_exponent,
    report_schema,
    run,
)

GNP12 = {"kind": "gnp", "n": 12, "p": 0.5}


def cfg(**kw):
    base = {"input": GNP12, "mechanism": "pipeline", "seeds": [0, 1]}
    base.update(kw)
    return ExperimentConfig.from_dict(base, env={})


# -- config ------------------------------------------------------------------


@pytest.mark.parametrize("bad", [
    {"mechanism": "nope"},
    {"seeds": []},
    {"seeds": [-1]},
    {"epsilon": 0},
    {"delta": 1.0},
    {"input": {"path": "a", "kind": "gnp"}},
    {"bogus_key": 1},
    {"constants": {"not_a_constant": 1}},
    {"workers": 0},
])
def test_config_rejections(bad):
    with pytest.raises(ConfigError):
        cfg(**bad)


def test_seed_from_environment_only_when_config_has_none():
    d = {"input": GNP12, "mechanism": "dense"}
    assert ExperimentConfig.from_dict(d, env={SEED_ENV: "7"}).seeds == [7]
    assert ExperimentConfig.from_dict({**d, "seeds": [3]}, env={SEED_ENV: "7"}).seeds == [3]
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict(d, env={SEED_ENV: "x"})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict(d, env={})


def test_load_reports_bad_json(tmp_path):
    p = tmp_path / "c.json"
    p.write_text("{not json")
    with pytest.raises(ConfigError):
        ExperimentConfig.load(p)


# -- evaluation --------------------------------------------------------------


def test_small_n_enumerates_every_cut_once():
    cuts = evaluation_cuts(5, 0, 0)
    assert cuts.shape == (16, 5)
    assert not cuts[:, 4].any()  # the complement of each row is implied
    assert len({tuple(r) for r in cuts}) == 16


def test_large_n_family_contents():
    deg = np.arange(20.0)
    cuts = evaluation_cuts(20, 100, 0, deg)
    assert cuts.shape == (100 + 20 + 19, 20)
    assert cuts[100:120].sum(axis=1).tolist() == [1] * 20
    assert cuts[120].tolist() == [i == 19 for i in range(20)]


def test_cut_errors_identity_and_balance():
    a = gnp(12, 0.5, seed=0).adjacency()
    cuts = evaluation_cuts(12, 0, 0)
    e = cut_errors(a, a, cuts, 0.25)
    assert e["max_additive_error"] == 0 and e["max_slack"] <= 0
    b = a.copy()
    b[0, 1] = b[1, 0] = a[0, 1] + 5
    assert cut_errors(a, b, cuts, 0.0)["max_additive_error"] == 5


def test_fit_exponent():
    assert fit_exponent([10, 100, 1000], [3, 300, 30000]) == pytest.approx(2.0)
    assert fit_exponent([10, 100], [1, -1]) is None


# -- runs --------------------------------------------------------------------


def test_laplace_baseline_flags_negatives():
    rep = run(cfg(mechanism="laplace_baseline"))
    assert all(r["negative_weights"] for r in rep.rows)
    assert all(r["ledger_delta"] == 0 for r in rep.rows)


def test_noiseless_pipeline_has_zero_error():
    rep = run(cfg(noiseless=True))
    for r in rep.rows:
        assert r["max_additive_error"] == pytest.approx(0, abs=1e-9)
        assert r["num_cuts"] == 2**11


def test_pipeline_rows_record_budget():
    rep = run(cfg())
    for r in rep.rows:
        assert r["ledger_epsilon"] == pytest.approx(2.0) and r["ledger_delta"] == pytest.approx(1e-6)
        assert r["max_slack"] <= r["delta_budgeted"]
    assert set(rep.rows[0]) == set(CSV_COLUMNS)


def test_runs_are_bit_identical_across_workers(tmp_path):
    a = run(cfg(output_dir=str(tmp_path / "a")))
    b = run(cfg(output_dir=str(tmp_path / "b"), workers=2))
    a.write(tmp_path / "a")
    b.write(tmp_path / "b")
    for name in ("report.csv", "report.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    assert (tmp_path / "a" / "timing.json").exists()


def test_report_follows_schema():
    for mech in ("pipeline", "sparse_pipeline", "dense", "sparse", "decompose", "app:max_cut", "app:max_k_cut"):
        c = cfg(mechanism=mech, seeds=[0], psi=1e5 if mech == "decompose" else None)
        jsonschema.validate(json.loads(run(c).json_text()), report_schema())


def test_sweep_summary():
    rep = run(cfg(mechanism="dense", sweep_n=[8, 12], seeds=[0, 1]))
    sw = rep.summary["dense"]["sweep"]
    assert sw["n"] == [8, 12] and sw["additive_exponent"] is not None


def test_compare_reports_three_mechanisms():
    rep = compare_baselines(cfg(seeds=[0]))
    assert [r["mechanism"] for r in rep.rows] == ["laplace_baseline", "dense", "pipeline"]
    assert 0 <= rep.summary["pipeline_beats_dense_on_balanced_cuts"] <= 1
    assert set(rep.summary["side_by_side"][0]) == {"n", "seed", "laplace_baseline", "dense", "pipeline"}
    jsonschema.validate(json.loads(rep.json_text()), report_schema())


# -- command line ------------------------------------------------------------


def test_cli_gen_and_run(tmp_path, capsys):
    g = tmp_path / "g.txt"
    assert main(["gen", "gnp", "--param", "n=10", "--param", "p=0.5", "--seed", "2", "--out", str(g)]) == 0
    assert load_edge_list(g) == gnp(10, 0.5, seed=2)
    out = tmp_path / "out"
    assert main(["run", "--input", str(g), "--mechanism", "dense", "--seeds", "0", "--out", str(out)]) == 0
    assert (out / "report.csv").read_text().splitlines()[0] == ",".join(CSV_COLUMNS)
    assert main(["run", "--input", str(g), "--mechanism", "pipeline", "--seeds", "0", "--check-delta"]) == 0
    assert capsys.readouterr().out.startswith("mechanism,")


def test_cli_config_errors_exit_one(tmp_path):
    assert main(["run", "--generator", "gnp", "--param", "n=8", "--mechanism", "nope", "--seeds", "0"]) == 1
    assert main(["run", "--mechanism", "dense", "--seeds", "0"]) == 1
    bad = tmp_path / "bad.txt"
    bad.write_text("3\n0 0 1\n")
    assert main(["decompose", "--input", str(bad), "--psi", "1", "--epsilon", "1", "--delta", "1e-6",
                 "--out", str(tmp_path / "d.json")]) == 1
    g = tmp_path / "g.txt"
    save_edge_list(gnp(8, 0.5, seed=0), g)
    assert main(["decompose", "--input", str(g), "--psi", "0.001", "--epsilon", "1", "--delta", "1e-6",
                 "--out", str(tmp_path / "d.json")]) == 1


def test_cli_runtime_error_exit_two(tmp_path):
    assert main(["run", "--input", str(tmp_path / "missing.txt"), "--seeds", "0"]) == 2


def test_cli_failed_checks_exit_three(tmp_path):
    # a vanishing constant in the additive target makes any noisy release miss it
    c = tmp_path / "c.json"
    c.write_text(json.dumps({"input": GNP12, "mechanism": "pipeline", "seeds": [0],
                             "constants": {"delta_c": 1e-12}}))
    assert main(["run", "--config", str(c), "--check-delta"]) == 3
    assert main(["run", "--config", str(c)]) == 0
    assert main(["audit", "--scale", "1", "--trials", "200000", "--expect-epsilon", "5", "--tolerance", "0.1"]) == 3
    assert main(["audit", "--scale", "1", "--trials", "1000000", "--expect-epsilon", "1", "--tolerance", "0.1"]) == 0


def test_cli_decompose_dump(tmp_path):
    g = tmp_path / "g.txt"
    main(["gen", "planted_two_expanders", "--param", "n=16", "--param", "inner_w=50", "--param", "bridge_w=1",
          "--out", str(g)])
    out = tmp_path / "d.json"
    assert main(["decompose", "--input", str(g), "--psi", "10", "--epsilon", "100000", "--delta", "1e-6",
                 "--seed", "1", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["parts"] == [list(range(8)), list(range(8, 16))]


def test_console_script_runs():
    res = subprocess.run([sys.executable, "-m", "dpcut.cli", "audit", "--scale", "2", "--trials", "100000"],
                         capture_output=True, text=True, check=True)
    assert "epsilon_hat" in json.loads(res.stdout)
