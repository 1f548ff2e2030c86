"""Experiment runner: config parsing, sweep scheduling, CSV/JSON output.

A run is described by one YAML file (CLI flags override seed, output path,
and worker count).  The task list is generated up front, each task's RNG
stream is keyed by its index in that list, and rows are written in task
order — so output bytes depend only on (config, seed), never on the worker
count or scheduling.
"""

import argparse
import csv
import hashlib
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import yaml

from . import __version__, kernel_backend
from .estimators import (
    SamplingMode,
    dN_dT_single_site,
    estimate_fidelity,
    estimate_negativity,
)
from .gibbs import ChainConfig, UpdateRule, make_chain_config
from .lattice import (
    Boundary,
    LatticeSpec,
    enumerate_bonds,
    make_bipartition,
    make_tripartition,
    preset_mask,
)
from .locc import repetition_iid, run_protocol_trials
from .rng import stream_seed
from . import oracle

WORKERS_ENV = "GHZMC_WORKERS"


class ExperimentKind(str, Enum):
    NEGATIVITY_SWEEP = "negativity_sweep"
    FIDELITY_SWEEP = "fidelity_sweep"
    DNDT_SCAN = "dndt_scan"
    LOCC_TRIALS = "locc_trials"
    REPETITION_THRESHOLD = "repetition_threshold"
    ORACLE_FIXTURES = "oracle_fixtures"
    CMI_CHECK = "cmi_check"


CSV_COLUMNS = {
    ExperimentKind.NEGATIVITY_SWEEP: [
        "kind", "d", "L", "beta", "T", "partition", "value", "stderr",
        "tau_int", "n_eff", "seed", "warn",
    ],
    ExperimentKind.FIDELITY_SWEEP: [
        "kind", "d", "L", "beta", "T", "partition", "value", "stderr",
        "tau_int", "n_eff", "seed", "warn",
    ],
    ExperimentKind.DNDT_SCAN: [
        "kind", "d", "L", "T", "h", "value", "stderr", "below_resolution", "seed",
    ],
    ExperimentKind.LOCC_TRIALS: [
        "beta", "L", "partition", "n_trials", "success_rate", "stderr",
        "fidelity_formula_value",
    ],
    ExperimentKind.REPETITION_THRESHOLD: [
        "n_bits", "p", "n_trials", "success_rate", "stderr", "lower_bound",
    ],
    ExperimentKind.CMI_CHECK: [
        "kind", "d", "L", "beta", "r", "cmi", "cmi_classical",
    ],
}


class ConfigError(ValueError):
    """Invalid experiment config; carries the offending field path."""

    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}")


@dataclass
class ExperimentConfig:
    kind: ExperimentKind
    seed: int
    output: str
    dimension: int
    sizes: list
    boundary: Boundary
    coupling: float
    betas: list
    partition: dict
    chain: ChainConfig
    workers: int = 0  # 0 = resolve from env at run time
    mode: SamplingMode = SamplingMode.DIRECT_P
    replicas: int = 1
    h: float = 0.02
    repetition: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict)

    @property
    def temperatures(self):
        return [1.0 / b for b in self.betas]


def _need(raw, key, path):
    if key not in raw:
        raise ConfigError(f"{path}.{key}" if path else key, "missing required field")
    return raw[key]


def parse_config(raw: dict) -> ExperimentConfig:
    if not isinstance(raw, dict):
        raise ConfigError("", "config must be a mapping")
    try:
        kind = ExperimentKind(str(_need(raw, "kind", "")))
    except ValueError:
        raise ConfigError("kind", f"unknown experiment kind {raw.get('kind')!r}") from None

    lat = _need(raw, "lattice", "")
    dimension = int(_need(lat, "dimension", "lattice"))
    if "L" in lat:
        sizes = lat["L"] if isinstance(lat["L"], list) else [lat["L"]]
        sizes = [int(s) for s in sizes]
    else:
        raise ConfigError("lattice.L", "missing required field")
    boundary = Boundary(lat.get("boundary", "periodic"))
    coupling = float(lat.get("coupling", 1.0))

    if ("temperatures" in raw) == ("betas" in raw):
        raise ConfigError("temperatures", "give exactly one of temperatures/betas")
    if "temperatures" in raw:
        grid = raw["temperatures"]
        if isinstance(grid, dict):
            temps = list(np.linspace(float(grid["start"]), float(grid["stop"]),
                                     int(grid["num"])))
        else:
            temps = [float(t) for t in grid]
        if any(t <= 0 for t in temps):
            raise ConfigError("temperatures", "temperatures must be > 0")
        betas = [1.0 / t for t in temps]
    else:
        betas = [float(b) for b in raw["betas"]]
        if any(b < 0 for b in betas):
            raise ConfigError("betas", "betas must be >= 0")

    chain_raw = dict(raw.get("chain", {}))
    rule = UpdateRule(chain_raw.pop("update_rule", "metropolis"))
    try:
        chain = make_chain_config(rule, seed=0, **chain_raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError("chain", str(exc)) from None

    rep = dict(raw.get("repetition", {}))
    if kind is ExperimentKind.REPETITION_THRESHOLD:
        for key in ("n_bits", "p_grid", "n_trials"):
            _need(rep, key, "repetition")

    cfg = ExperimentConfig(
        kind=kind,
        seed=int(raw.get("seed", 0)),
        output=str(_need(raw, "output", "")),
        dimension=dimension,
        sizes=sizes,
        boundary=boundary,
        coupling=coupling,
        betas=betas,
        partition=dict(raw.get("partition", {})),
        chain=chain,
        workers=int(raw.get("workers", 0)),
        mode=SamplingMode(raw.get("mode", "direct_p")),
        replicas=int(raw.get("replicas", 1)),
        h=float(raw.get("dndt", {}).get("h", 0.02)),
        repetition=rep,
        raw=raw,
    )
    if cfg.replicas < 1:
        raise ConfigError("replicas", "must be >= 1")
    return cfg


def load_config(path: str) -> ExperimentConfig:
    with open(path) as f:
        raw = yaml.safe_load(f)
    return parse_config(raw)


def _spec_for(cfg: ExperimentConfig, size: int, beta: float) -> LatticeSpec:
    return LatticeSpec(cfg.dimension, (size,) * cfg.dimension, cfg.boundary,
                       cfg.coupling, beta)


def _partition_for(cfg: ExperimentConfig, spec: LatticeSpec):
    part = cfg.partition
    if "preset" in part:
        name = str(part["preset"])
        return make_bipartition(spec, preset_mask(spec, name), name=name)
    if "sites" in part:
        mask = np.zeros(spec.n_sites, dtype=bool)
        mask[[int(s) for s in part["sites"]]] = True
        return make_bipartition(spec, mask, name="sites")
    raise ConfigError("partition", "need partition.preset or partition.sites")


def validate_config(path: str) -> dict:
    """Schema and invariant checks without running; reports derived geometry."""
    errors = []
    derived = {}
    try:
        cfg = load_config(path)
    except ConfigError as exc:
        return {"valid": False, "errors": [{"field": exc.path, "message": str(exc)}],
                "derived": {}}
    except (ValueError, TypeError, KeyError, OSError, yaml.YAMLError) as exc:
        return {"valid": False, "errors": [{"field": "", "message": str(exc)}],
                "derived": {}}

    for size in cfg.sizes:
        label = f"L={size}"
        try:
            spec = _spec_for(cfg, size, max(cfg.betas))
            entry = {"n_sites": spec.n_sites, "n_bonds": int(len(enumerate_bonds(spec)))}
            if cfg.kind is ExperimentKind.CMI_CHECK:
                tri = make_tripartition(spec, cfg.partition.get("a_sites", [0]),
                                        r=int(cfg.partition.get("r", 1)))
                entry["n_a"] = int(tri.a_mask.sum())
                entry["n_b"] = int(tri.b_mask.sum())
            elif cfg.kind not in (ExperimentKind.REPETITION_THRESHOLD,
                                  ExperimentKind.ORACLE_FIXTURES):
                part = _partition_for(cfg, spec)
                entry["boundary_bonds"] = part.boundary_size
            derived[label] = entry
        except (ConfigError, ValueError) as exc:
            errors.append({"field": f"lattice({label})", "message": str(exc)})
    return {"valid": not errors, "errors": errors, "derived": derived}


# ---------------------------------------------------------------------------
# Task execution
# ---------------------------------------------------------------------------

def _build_tasks(cfg: ExperimentConfig):
    """Fixed task list; a task's position is its RNG key."""
    kind = cfg.kind
    tasks = []
    if kind in (ExperimentKind.NEGATIVITY_SWEEP, ExperimentKind.FIDELITY_SWEEP,
                ExperimentKind.LOCC_TRIALS):
        for size in cfg.sizes:
            for beta in cfg.betas:
                for rep in range(cfg.replicas):
                    tasks.append({"size": size, "beta": beta, "replica": rep})
    elif kind is ExperimentKind.DNDT_SCAN:
        for size in cfg.sizes:
            for t in cfg.temperatures:
                tasks.append({"size": size, "T": t})
    elif kind is ExperimentKind.REPETITION_THRESHOLD:
        for n_bits in cfg.repetition["n_bits"]:
            for p in cfg.repetition["p_grid"]:
                tasks.append({"n_bits": int(n_bits), "p": float(p)})
    elif kind is ExperimentKind.CMI_CHECK:
        for size in cfg.sizes:
            for beta in cfg.betas:
                tasks.append({"size": size, "beta": beta})
    elif kind is ExperimentKind.ORACLE_FIXTURES:
        for size in cfg.sizes:
            tasks.append({"size": size})
    return tasks


def _execute_task(raw_cfg: dict, index: int, task: dict) -> dict:
    cfg = parse_config(raw_cfg)
    kind = cfg.kind
    try:
        return _execute_task_inner(cfg, index, task)
    except Exception as exc:  # record per-row, keep the run going
        row = {c: math.nan for c in CSV_COLUMNS.get(kind, [])}
        row.update({k: task[k] for k in task if k in row})
        if "L" in row and "size" in task:
            row["L"] = task["size"]
        if "kind" in row:
            row["kind"] = kind.value
        if "warn" in row:
            row["warn"] = f"failed:{type(exc).__name__}"
        return row


def _execute_task_inner(cfg: ExperimentConfig, index: int, task: dict) -> dict:
    kind = cfg.kind
    if kind in (ExperimentKind.NEGATIVITY_SWEEP, ExperimentKind.FIDELITY_SWEEP):
        beta = task["beta"]
        spec = _spec_for(cfg, task["size"], beta)
        part = _partition_for(cfg, spec)
        chain_seed = stream_seed(cfg.seed, index)
        chain = ChainConfig(cfg.chain.n_thermalization_sweeps,
                            cfg.chain.n_measurement_sweeps,
                            cfg.chain.measure_every, chain_seed,
                            cfg.chain.update_rule)
        if kind is ExperimentKind.NEGATIVITY_SWEEP:
            est = estimate_negativity(spec, part, chain, mode=cfg.mode)
        else:
            est = estimate_fidelity(spec, part, chain)
        return {
            "kind": kind.value, "d": cfg.dimension, "L": task["size"],
            "beta": beta, "T": 1.0 / beta if beta > 0 else math.inf,
            "partition": part.name, "value": est.value, "stderr": est.std_error,
            "tau_int": est.tau_int, "n_eff": est.n_effective, "seed": chain_seed,
            "warn": "no_plateau" if est.warn else "",
        }

    if kind is ExperimentKind.DNDT_SCAN:
        spec = _spec_for(cfg, task["size"], 1.0)
        chain = ChainConfig(cfg.chain.n_thermalization_sweeps,
                            cfg.chain.n_measurement_sweeps,
                            cfg.chain.measure_every, stream_seed(cfg.seed, index),
                            cfg.chain.update_rule)
        point = dN_dT_single_site(spec, [task["T"]], chain, h=cfg.h)[0]
        return {
            "kind": kind.value, "d": cfg.dimension, "L": task["size"],
            "T": task["T"], "h": cfg.h, "value": point.value,
            "stderr": point.std_error,
            "below_resolution": int(point.below_resolution),
            "seed": stream_seed(cfg.seed, index),
        }

    if kind is ExperimentKind.LOCC_TRIALS:
        beta = task["beta"]
        spec = _spec_for(cfg, task["size"], beta)
        part = _partition_for(cfg, spec)
        chain = ChainConfig(cfg.chain.n_thermalization_sweeps,
                            cfg.chain.n_measurement_sweeps,
                            cfg.chain.measure_every, stream_seed(cfg.seed, index),
                            cfg.chain.update_rule)
        res = run_protocol_trials(spec, part, chain)
        return {
            "beta": beta, "L": task["size"], "partition": part.name,
            "n_trials": res.n_trials, "success_rate": res.success_rate,
            "stderr": res.std_error,
            "fidelity_formula_value": res.fidelity_formula_value,
        }

    if kind is ExperimentKind.REPETITION_THRESHOLD:
        res = repetition_iid(task["n_bits"], task["p"],
                             int(cfg.repetition["n_trials"]),
                             decoder=cfg.repetition.get("decoder", "majority"),
                             seed=stream_seed(cfg.seed, index) % (1 << 63))
        return {
            "n_bits": res.n_bits, "p": res.p_flip, "n_trials": res.n_trials,
            "success_rate": res.success_rate, "stderr": res.std_error,
            "lower_bound": res.lower_bound,
        }

    if kind is ExperimentKind.CMI_CHECK:
        spec = _spec_for(cfg, task["size"], task["beta"])
        tri = make_tripartition(spec, cfg.partition.get("a_sites", [0]),
                                r=int(cfg.partition.get("r", 1)))
        return {
            "kind": kind.value, "d": cfg.dimension, "L": task["size"],
            "beta": task["beta"], "r": tri.r,
            "cmi": oracle.cmi_exact(spec, tri),
            "cmi_classical": oracle.cmi_classical(spec, tri),
        }

    if kind is ExperimentKind.ORACLE_FIXTURES:
        spec0 = _spec_for(cfg, task["size"], max(cfg.betas))
        part = _partition_for(cfg, spec0)
        values = []
        for beta in cfg.betas:
            spec = _spec_for(cfg, task["size"], beta)
            part_b = _partition_for(cfg, spec)
            values.append({
                "beta": beta,
                "negativity": oracle.exact_negativity(spec, part_b),
                "fidelity": oracle.exact_fidelity(spec, part_b),
                "log_z": oracle.partition_function(spec),
            })
        return {"size": task["size"], "boundary_bonds": part.boundary_size,
                "values": values}

    raise ConfigError("kind", f"unhandled kind {kind}")


def _format_cell(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def run_experiment(cfg: ExperimentConfig, workers: int | None = None) -> dict:
    """Execute all tasks and write output plus a JSON run manifest.

    Returns the manifest dict.  CSV bytes are a pure function of
    (config, seed): rows land in task order whatever the worker count.
    """
    t_start = time.time()
    tasks = _build_tasks(cfg)
    if workers is None:
        workers = cfg.workers or int(os.environ.get(WORKERS_ENV, "1"))
    workers = max(1, min(int(workers), len(tasks) or 1))

    if workers == 1:
        rows = [_execute_task(cfg.raw, i, t) for i, t in enumerate(tasks)]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_execute_task, cfg.raw, i, t)
                       for i, t in enumerate(tasks)]
            rows = [f.result() for f in futures]

    out_path = cfg.output
    os.makedirs(os.path.dirname(out_path) or ".", exist_ok=True)
    if cfg.kind is ExperimentKind.ORACLE_FIXTURES:
        payload = {"kind": cfg.kind.value, "lattice": cfg.raw.get("lattice"),
                   "partition": cfg.raw.get("partition"), "fixtures": rows}
        with open(out_path, "w") as f:
            json.dump(payload, f, indent=2, sort_keys=True)
    else:
        columns = CSV_COLUMNS[cfg.kind]
        with open(out_path, "w", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(columns)
            for row in rows:
                writer.writerow([_format_cell(row.get(c, "")) for c in columns])

    with open(out_path, "rb") as f:
        digest = hashlib.sha256(f.read()).hexdigest()
    manifest = {
        "version": __version__,
        "kernel_backend": kernel_backend,
        "kind": cfg.kind.value,
        "seed": cfg.seed,
        "config_hash": hashlib.sha256(
            json.dumps(cfg.raw, sort_keys=True, default=str).encode()
        ).hexdigest(),
        "output": out_path,
        "output_sha256": digest,
        "n_tasks": len(tasks),
        "workers": workers,
        "wall_time_s": round(time.time() - t_start, 3),
    }
    with open(out_path + ".manifest.json", "w") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
    return manifest


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def _apply_overrides(cfg: ExperimentConfig, args) -> ExperimentConfig:
    if args.seed is not None:
        cfg.seed = int(args.seed)
        cfg.raw["seed"] = int(args.seed)
    if args.out is not None:
        cfg.output = args.out
        cfg.raw["output"] = args.out
    return cfg


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="ghzmc",
        description="Negativity / LOCC-recovery Monte Carlo experiment runner",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment config")
    p_run.add_argument("config")
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--out", default=None)
    p_run.add_argument("--workers", type=int, default=None)

    p_val = sub.add_parser("validate", help="check a config without running")
    p_val.add_argument("config")

    p_orc = sub.add_parser("oracle", help="generate exact fixtures (JSON)")
    p_orc.add_argument("config")
    p_orc.add_argument("--seed", type=int, default=None)
    p_orc.add_argument("--out", default=None)
    p_orc.add_argument("--workers", type=int, default=None)

    args = parser.parse_args(argv)

    if args.command == "validate":
        report = validate_config(args.config)
        print(json.dumps(report, indent=2, sort_keys=True))
        return 0 if report["valid"] else 1

    try:
        cfg = _apply_overrides(load_config(args.config), args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1

    if args.command == "oracle" and cfg.kind not in (
        ExperimentKind.ORACLE_FIXTURES, ExperimentKind.CMI_CHECK
    ):
        print("oracle subcommand expects an oracle_fixtures or cmi_check config",
              file=sys.stderr)
        return 1

    manifest = run_experiment(cfg, workers=args.workers)
    print(json.dumps(manifest, indent=2, sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
