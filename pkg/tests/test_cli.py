import json
import math

import pytest
import yaml

from ghzmc.cli import (
    CSV_COLUMNS,
    ConfigError,
    ExperimentKind,
    load_config,
    main,
    parse_config,
    run_experiment,
    validate_config,
)

GOLDEN_HEADERS = {
    "negativity_sweep": "kind,d,L,beta,T,partition,value,stderr,tau_int,n_eff,seed,warn",
    "fidelity_sweep": "kind,d,L,beta,T,partition,value,stderr,tau_int,n_eff,seed,warn",
    "dndt_scan": "kind,d,L,T,h,value,stderr,below_resolution,seed",
    "locc_trials": "beta,L,partition,n_trials,success_rate,stderr,fidelity_formula_value",
    "repetition_threshold": "n_bits,p,n_trials,success_rate,stderr,lower_bound",
    "cmi_check": "kind,d,L,beta,r,cmi,cmi_classical",
}


def write_config(tmp_path, name, payload):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(payload))
    return str(path)


def small_sweep_config(tmp_path, **overrides):
    payload = {
        "kind": "negativity_sweep",
        "seed": 77,
        "output": str(tmp_path / "out.csv"),
        "lattice": {"dimension": 2, "L": 4, "boundary": "periodic", "coupling": 1.0},
        "partition": {"preset": "half-cylinder"},
        "temperatures": [2.0, 4.0],
        "chain": {"update_rule": "metropolis", "n_thermalization_sweeps": 200,
                  "n_measurement_sweeps": 3000},
    }
    payload.update(overrides)
    return write_config(tmp_path, "cfg.yaml", payload)


def test_golden_headers_frozen():
    for kind, header in GOLDEN_HEADERS.items():
        assert ",".join(CSV_COLUMNS[ExperimentKind(kind)]) == header


def test_parse_config_errors(tmp_path):
    with pytest.raises(ConfigError, match="kind"):
        parse_config({"kind": "bogus"})
    with pytest.raises(ConfigError, match="missing"):
        parse_config({"kind": "negativity_sweep"})
    with pytest.raises(ConfigError, match="exactly one"):
        parse_config({
            "kind": "negativity_sweep", "output": "x.csv",
            "lattice": {"dimension": 1, "L": 4},
            "temperatures": [1.0], "betas": [1.0],
        })


def test_validate_rejects_periodic_l2(tmp_path):
    path = small_sweep_config(tmp_path, lattice={"dimension": 2, "L": 2,
                                                 "boundary": "periodic"})
    report = validate_config(path)
    assert not report["valid"]
    assert any("linear size >= 3" in e["message"] for e in report["errors"])


def test_validate_rejects_ac_adjacency(tmp_path):
    path = write_config(tmp_path, "cmi.yaml", {
        "kind": "cmi_check",
        "output": str(tmp_path / "cmi.csv"),
        "lattice": {"dimension": 1, "L": 6},
        "partition": {"a_sites": [0], "r": 0},
        "betas": [1.0],
    })
    report = validate_config(path)
    assert not report["valid"]
    assert any("r must be >= 1" in e["message"] for e in report["errors"])


def test_validate_reports_boundary_size(tmp_path):
    path = small_sweep_config(tmp_path, lattice={"dimension": 2, "L": 8})
    report = validate_config(path)
    assert report["valid"]
    assert report["derived"]["L=8"]["boundary_bonds"] == 16  # two cuts of length L
    assert report["derived"]["L=8"]["n_bonds"] == 128


def test_run_reproducible_and_worker_independent(tmp_path):
    path = small_sweep_config(tmp_path)
    cfg = load_config(path)
    run_experiment(cfg, workers=1)
    first = open(cfg.output, "rb").read()
    run_experiment(cfg, workers=1)
    assert open(cfg.output, "rb").read() == first
    run_experiment(cfg, workers=2)
    assert open(cfg.output, "rb").read() == first
    assert first.decode().splitlines()[0] == GOLDEN_HEADERS["negativity_sweep"]


def test_run_manifest_contents(tmp_path):
    path = small_sweep_config(tmp_path)
    cfg = load_config(path)
    manifest = run_experiment(cfg, workers=1)
    on_disk = json.load(open(cfg.output + ".manifest.json"))
    for key in ("version", "kernel_backend", "config_hash", "seed",
                "output_sha256", "n_tasks", "wall_time_s"):
        assert key in on_disk
    assert on_disk["config_hash"] == manifest["config_hash"]
    assert on_disk["n_tasks"] == 2


def test_failed_point_recorded_per_row(tmp_path):
    path = small_sweep_config(tmp_path, partition={"sites": [9999]})
    cfg = load_config(path)
    run_experiment(cfg, workers=1)
    lines = open(cfg.output).read().splitlines()
    assert len(lines) == 3  # header + both rows, run continued
    assert all("failed:IndexError" in line for line in lines[1:])


def test_oracle_fixture_two_site_chain(tmp_path):
    out = tmp_path / "fix.json"
    path = write_config(tmp_path, "fix.yaml", {
        "kind": "oracle_fixtures",
        "output": str(out),
        "lattice": {"dimension": 1, "L": 2, "boundary": "open"},
        "partition": {"sites": [0]},
        "betas": [0.1, 1.0, 3.0],
    })
    assert main(["oracle", path]) == 0
    payload = json.loads(out.read_text())
    values = payload["fixtures"][0]["values"]
    for row in values:
        assert row["negativity"] == pytest.approx(0.5 * math.tanh(row["beta"]),
                                                  abs=1e-12)
        assert row["fidelity"] == pytest.approx(
            0.5 * (1 + math.tanh(row["beta"]) ** 2), abs=1e-12
        )


def test_cmi_check_kind(tmp_path):
    out = tmp_path / "cmi.csv"
    path = write_config(tmp_path, "cmi.yaml", {
        "kind": "cmi_check",
        "output": str(out),
        "lattice": {"dimension": 1, "L": 6},
        "partition": {"a_sites": [0], "r": 1},
        "betas": [0.5, 1.0],
    })
    assert main(["run", path]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == GOLDEN_HEADERS["cmi_check"]
    for line in lines[1:]:
        assert float(line.split(",")[5]) == pytest.approx(math.log(2), abs=1e-10)


def test_main_validate_exit_codes(tmp_path, capsys):
    good = small_sweep_config(tmp_path)
    assert main(["validate", good]) == 0
    bad = small_sweep_config(tmp_path, lattice={"dimension": 2, "L": 2})
    assert main(["validate", bad]) == 1


def test_oracle_subcommand_rejects_sweep_config(tmp_path):
    path = small_sweep_config(tmp_path)
    assert main(["oracle", path]) == 1


def test_cli_flag_overrides(tmp_path):
    path = small_sweep_config(tmp_path)
    out2 = str(tmp_path / "other.csv")
    assert main(["run", path, "--out", out2, "--seed", "123", "--workers", "1"]) == 0
    rows = open(out2).read().splitlines()
    assert len(rows) == 3
    manifest = json.load(open(out2 + ".manifest.json"))
    assert manifest["seed"] == 123


def test_repetition_threshold_kind(tmp_path):
    out = tmp_path / "rep.csv"
    path = write_config(tmp_path, "rep.yaml", {
        "kind": "repetition_threshold",
        "seed": 5,
        "output": str(out),
        "lattice": {"dimension": 1, "L": 3},
        "betas": [1.0],
        "repetition": {"n_bits": [3, 9], "p_grid": [0.0, 0.1], "n_trials": 20000},
    })
    assert main(["run", path]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == GOLDEN_HEADERS["repetition_threshold"]
    assert len(lines) == 5
