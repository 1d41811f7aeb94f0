"""Config-driven experiment harness.

A JSON config describes one experiment: a workload (builtin circuit, QASM
file or QAOA instance), a set of backend models, sweeps over the tampering
coefficient and the shot budget, a defense mode and a list of seeds. Every
(t, shots, seed) cell runs independently on a bounded worker pool and
produces one JSONL record; a CSV summary with per-group mean/std over
seeds is derived from the records, never the other way around.

Determinism: the cell seed is a hash of (master seed, workload, t, shots,
seed index), and every stochastic stage below derives its own sub-stream,
so records are byte-identical across re-runs and worker counts
(wall_time_s excepted).
"""
from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
import math
import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import jsonschema

from .adversary import TamperMode, TamperSpec
from .backend import BackendModel, NoiseModel
from .benchmarks import builtin
from .circuit import Circuit
from .defense import (
    SELECTION_ORDER,
    adaptive_split,
    equal_split,
    qaoa_adaptive,
    qaoa_iteration_split,
)
from .metrics import pm, top_outcome, tvd
from .qaoa import Graph, QaoaConfig, optimize, random_regular_graph
from .qasm import parse_qasm
from .rng import derive_seed
from .simulator import clean_distribution, execute, resolve_tamper, run_statevector

SCHEMA_VERSION = 1

# artifact defaults, not measured hardware values
DEFAULT_READOUT = 0.02
DEFAULT_DRIFT = 0.01


class ConfigError(ValueError):
    """Config rejected; the message carries a JSON pointer to the field."""


class IoError(OSError):
    pass


_TAMPER_SCHEMA = {
    "type": "object",
    "properties": {
        "mode": {"enum": ["random_all", "random_subset", "targeted"]},
        "t": {"type": "number", "minimum": 0.0, "maximum": 1.0},
        "k": {"type": "integer", "minimum": 1},
    },
    "required": ["mode", "t"],
    "additionalProperties": False,
}

_READOUT_SCHEMA = {
    "oneOf": [
        {"type": "number", "minimum": 0.0, "maximum": 0.5},
        {
            "type": "array",
            "items": {"type": "number", "minimum": 0.0, "maximum": 0.5},
            "minItems": 2,
            "maxItems": 2,
        },
        {
            "type": "array",
            "items": {
                "type": "array",
                "items": {"type": "number", "minimum": 0.0, "maximum": 0.5},
                "minItems": 2,
                "maxItems": 2,
            },
            "minItems": 1,
        },
    ]
}

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "workload": {
            "type": "object",
            "properties": {
                "builtin": {"type": "string"},
                "qasm": {"type": "string"},
                "qaoa": {
                    "type": "object",
                    "properties": {
                        "nodes": {"type": "integer", "minimum": 2},
                        "degree": {"type": "integer", "minimum": 1},
                        "edges": {
                            "type": "array",
                            "items": {
                                "type": "array",
                                "items": {"type": "integer", "minimum": 0},
                                "minItems": 2,
                                "maxItems": 2,
                            },
                        },
                        "graph_seed": {"type": "integer"},
                        "p": {"type": "integer", "minimum": 1},
                        "iterations": {"type": "integer", "minimum": 1},
                        "shots_per_iter": {"type": "integer", "minimum": 1},
                    },
                    "required": ["nodes"],
                    "additionalProperties": False,
                },
            },
            "minProperties": 1,
            "maxProperties": 1,
            "additionalProperties": False,
        },
        "backends": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "properties": {
                    "name": {"type": "string", "minLength": 1},
                    "readout": _READOUT_SCHEMA,
                    "gate_depolarizing": {
                        "type": "number",
                        "minimum": 0.0,
                        "maximum": 1.0,
                    },
                    "drift": {"type": "number", "minimum": 0.0},
                    "tamper": _TAMPER_SCHEMA,
                },
                "required": ["name"],
                "additionalProperties": False,
            },
        },
        "shots": {"type": "integer", "minimum": 1},
        "shots_sweep": {
            "type": "array",
            "items": {"type": "integer", "minimum": 1},
            "minItems": 1,
        },
        "t_sweep": {
            "type": "array",
            "items": {"type": "number", "minimum": 0.0, "maximum": 1.0},
            "minItems": 1,
        },
        "defense": {
            "type": "object",
            "properties": {
                "mode": {
                    "enum": ["none", "equal", "adaptive", "qaoa_split", "qaoa_adaptive"]
                },
                "k": {"type": "integer", "minimum": 10},
                "r": {"type": "integer", "minimum": 2},
                "order": {
                    "type": "array",
                    "items": {"enum": list(SELECTION_ORDER)},
                    "minItems": 4,
                    "maxItems": 4,
                    "uniqueItems": True,
                },
                "probe_iterations": {"type": "integer", "minimum": 1},
                "probe_runs": {"type": "integer", "minimum": 1},
            },
            "required": ["mode"],
            "additionalProperties": False,
        },
        "seeds": {
            "type": "array",
            "items": {"type": "integer", "minimum": 0},
            "minItems": 1,
        },
        "master_seed": {"type": "integer", "minimum": 0},
        "out": {"type": "string"},
    },
    "required": ["workload", "backends", "shots", "seeds"],
    "additionalProperties": False,
}


@dataclass(frozen=True)
class Workload:
    kind: str  # "sample" or "qaoa"
    name: str
    circuit: Circuit | None = None
    correct: str | None = None
    graph: Graph | None = None
    qaoa: QaoaConfig | None = None


@dataclass(frozen=True)
class DefenseSpec:
    mode: str = "none"
    k: int = 50
    r: int = 2
    order: tuple[str, ...] | None = None
    probe_iterations: int = 5
    probe_runs: int = 2


@dataclass(frozen=True)
class ExperimentConfig:
    workload: Workload
    backends: tuple[BackendModel, ...]
    shots: int
    t_sweep: tuple[float | None, ...]
    shots_sweep: tuple[int, ...]
    defense: DefenseSpec
    seeds: tuple[int, ...]
    master_seed: int
    out: str | None
    experiment_id: str


def _pointer(error: jsonschema.ValidationError) -> str:
    return "/" + "/".join(str(p) for p in error.absolute_path)


def _build_workload(raw: dict, base_dir: Path) -> Workload:
    if "builtin" in raw:
        try:
            bench = builtin(raw["builtin"])
        except KeyError:
            raise ConfigError(f"/workload/builtin: unknown builtin {raw['builtin']!r}")
        return Workload("sample", bench.name, bench.circuit, bench.expected_output)
    if "qasm" in raw:
        path = base_dir / raw["qasm"]
        try:
            source = path.read_text()
        except OSError as exc:
            raise ConfigError(f"/workload/qasm: cannot read {path}: {exc}")
        circuit = parse_qasm(source, name=path.stem)
        correct, _ = top_outcome(run_statevector(circuit))
        return Workload("sample", circuit.name, circuit, correct)
    spec = raw["qaoa"]
    if "edges" in spec:
        graph = Graph.from_edges(spec["nodes"], [tuple(e) for e in spec["edges"]])
    elif "degree" in spec:
        graph = random_regular_graph(
            spec["nodes"], spec["degree"], spec.get("graph_seed", 0)
        )
    else:
        raise ConfigError("/workload/qaoa: needs either edges or degree")
    config = QaoaConfig(
        p=spec.get("p", 1),
        iterations=spec.get("iterations", 50),
        shots_per_iter=spec.get("shots_per_iter", 50),
    )
    name = f"qaoa_n{graph.n}"
    return Workload("qaoa", name, graph=graph, qaoa=config)


def _build_backend(raw: dict) -> BackendModel:
    readout = raw.get("readout", DEFAULT_READOUT)
    if isinstance(readout, (int, float)):
        pairs = (float(readout), float(readout))
    elif readout and isinstance(readout[0], list):
        pairs = tuple((float(a), float(b)) for a, b in readout)
    else:
        pairs = (float(readout[0]), float(readout[1]))
    noise = NoiseModel(
        readout=pairs, gate_depolarizing=raw.get("gate_depolarizing", 0.0)
    )
    tamper = None
    if "tamper" in raw:
        spec = raw["tamper"]
        tamper = TamperSpec(TamperMode(spec["mode"]), spec["t"], spec.get("k"))
    return BackendModel(
        name=raw["name"],
        noise=noise,
        tamper=tamper,
        drift=raw.get("drift", DEFAULT_DRIFT),
    )


def load_config(source: dict | str | Path, base_dir: Path | None = None) -> ExperimentConfig:
    """Parse and validate an experiment config (dict or JSON file path)."""
    if isinstance(source, (str, Path)):
        path = Path(source)
        base_dir = base_dir or path.parent
        try:
            raw = json.loads(path.read_text())
        except OSError as exc:
            raise IoError(str(exc))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"/: invalid JSON: {exc}")
    else:
        raw = source
        base_dir = base_dir or Path.cwd()
    validator = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
    errors = sorted(validator.iter_errors(raw), key=lambda e: list(e.absolute_path))
    if errors:
        err = jsonschema.exceptions.best_match(errors)
        raise ConfigError(f"{_pointer(err)}: {err.message}")

    seeds = raw["seeds"]
    if len(set(seeds)) != len(seeds):
        raise ConfigError("/seeds: seeds must be distinct")
    backends = tuple(_build_backend(b) for b in raw["backends"])
    names = [b.name for b in backends]
    if len(set(names)) != len(names):
        raise ConfigError("/backends: backend names must be unique")
    workload = _build_workload(raw["workload"], base_dir)

    defense_raw = raw.get("defense", {"mode": "none"})
    defense = DefenseSpec(
        mode=defense_raw["mode"],
        k=defense_raw.get("k", 50),
        r=defense_raw.get("r", 2),
        order=tuple(defense_raw["order"]) if "order" in defense_raw else None,
        probe_iterations=defense_raw.get("probe_iterations", 5),
        probe_runs=defense_raw.get("probe_runs", 2),
    )
    if defense.mode in ("equal", "adaptive", "qaoa_split", "qaoa_adaptive"):
        if len(backends) < 2:
            raise ConfigError(f"/defense/mode: {defense.mode} needs >= 2 backends")
    if defense.mode == "qaoa_split" and len(backends) != 2:
        raise ConfigError("/defense/mode: qaoa_split needs exactly 2 backends")
    if workload.kind == "qaoa" and defense.mode in ("equal", "adaptive"):
        raise ConfigError(f"/defense/mode: {defense.mode} needs a sampling workload")
    if workload.kind == "sample" and defense.mode.startswith("qaoa"):
        raise ConfigError(f"/defense/mode: {defense.mode} needs a qaoa workload")

    t_sweep = tuple(raw["t_sweep"]) if "t_sweep" in raw else (None,)
    shots_sweep = tuple(raw.get("shots_sweep", [raw["shots"]]))
    canonical = json.dumps(raw, sort_keys=True, separators=(",", ":"))
    experiment_id = hashlib.sha256(canonical.encode()).hexdigest()[:12]
    return ExperimentConfig(
        workload=workload,
        backends=backends,
        shots=raw["shots"],
        t_sweep=t_sweep,
        shots_sweep=shots_sweep,
        defense=defense,
        seeds=tuple(seeds),
        master_seed=raw.get("master_seed", 0),
        out=raw.get("out"),
        experiment_id=experiment_id,
    )


def _with_t(backends: tuple[BackendModel, ...], t: float | None):
    """Override the tampering coefficient of every tampered backend."""
    if t is None:
        return list(backends)
    out = []
    for b in backends:
        if b.tamper is not None:
            out.append(b.with_tamper(replace(b.tamper, t=float(t))))
        else:
            out.append(b)
    return out


def _top_counts(counts: dict[str, int], k: int = 5) -> dict[str, int]:
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return dict(ranked[:k])


def _probe_summary(report) -> dict:
    return {
        "voted_answer": report.voted_answer,
        "backends": [
            {
                "name": bp.name,
                "repeatable": bp.repeatable,
                "mean_inter_run_tvd": bp.mean_inter_run_tvd,
                "mean_pm": bp.mean_pm,
                "mean_confidence": bp.mean_confidence,
                "run_tops": [run.top for run in bp.runs],
            }
            for bp in report.backends
        ],
    }


def _finite(x: float) -> float | str:
    # JSON has no inf; PM's sentinel round-trips as a string
    return x if math.isfinite(x) else "inf"


def _sample_metrics(
    counts, correct: str, ideal, clean_mix, record: dict
) -> None:
    top, confidence = top_outcome(counts)
    record.update(
        pm=_finite(pm(counts, correct)),
        tvd_vs_ideal=tvd(counts, ideal),
        tvd_vs_clean=tvd(counts, clean_mix),
        top_outcome=top,
        confidence=confidence,
        correct=correct,
        top_counts=_top_counts(counts),
        shots_in_answer=sum(counts.values()),
    )


def _clean_mixture(backends, allocations, circuit) -> dict[str, float]:
    total = sum(s for _, s in allocations if s > 0)
    mix: dict[str, float] = {}
    by_name = {b.name: b for b in backends}
    for name, share in allocations:
        if share <= 0:
            continue
        dist = clean_distribution(by_name[name], circuit)
        for key, p in dist.items():
            mix[key] = mix.get(key, 0.0) + p * share / total
    return mix


def _run_sample_cell(config: ExperimentConfig, t, shots, seed, cell_seed) -> list[dict]:
    wl = config.workload
    backends = _with_t(config.backends, t)
    ideal = run_statevector(wl.circuit)
    defense = config.defense
    records = []
    if defense.mode == "none":
        for backend in backends:
            start = time.perf_counter()
            resolved = resolve_tamper(backend, wl.circuit, cell_seed)
            counts = execute(resolved, wl.circuit, shots, cell_seed)
            record = _base_record(config, t, shots, seed, backend.name)
            _sample_metrics(
                counts,
                wl.correct,
                ideal,
                clean_distribution(backend, wl.circuit),
                record,
            )
            record["wall_time_s"] = time.perf_counter() - start
            records.append(record)
        return records

    start = time.perf_counter()
    record = _base_record(config, t, shots, seed, "+".join(b.name for b in backends))
    if defense.mode == "equal":
        counts, plan = equal_split(backends, wl.circuit, shots, cell_seed)
        record["allocations"] = list(plan.allocations)
    else:  # adaptive
        counts, plan, report = adaptive_split(
            backends,
            wl.circuit,
            shots,
            k=defense.k,
            r=defense.r,
            seed=cell_seed,
            order=defense.order,
        )
        record["allocations"] = list(plan.allocations)
        record["probe"] = _probe_summary(report)
        record["selected"] = max(plan.allocations, key=lambda kv: kv[1])[0]
    clean_mix = _clean_mixture(backends, record["allocations"], wl.circuit)
    _sample_metrics(counts, wl.correct, ideal, clean_mix, record)
    record["wall_time_s"] = time.perf_counter() - start
    return [record]


def _qaoa_record_fields(record: dict, run) -> None:
    record.update(
        ar=run.ar,
        cmax=run.cmax,
        best_expectation=run.best_expectation,
        gamma=list(run.best_params.gamma),
        beta=list(run.best_params.beta),
    )


def _run_qaoa_cell(config: ExperimentConfig, t, shots, seed, cell_seed) -> list[dict]:
    wl = config.workload
    backends = _with_t(config.backends, t)
    defense = config.defense
    qcfg = wl.qaoa
    records = []
    if defense.mode == "none":
        for backend in backends:
            start = time.perf_counter()
            run = optimize(
                backend, wl.graph, qcfg.p, qcfg.iterations, qcfg.shots_per_iter,
                cell_seed,
            )
            record = _base_record(config, t, shots, seed, backend.name)
            _qaoa_record_fields(record, run)
            record["wall_time_s"] = time.perf_counter() - start
            records.append(record)
        return records

    start = time.perf_counter()
    record = _base_record(config, t, shots, seed, "+".join(b.name for b in backends))
    if defense.mode == "qaoa_split":
        split = qaoa_iteration_split(
            backends[0], backends[1], wl.graph, qcfg, cell_seed
        )
        record.update(
            ar=split.ar,
            cmax=split.cmax,
            phase_a_ar=split.phase_a.ar,
            phase_b_ar=split.phase_b.ar,
        )
    else:  # qaoa_adaptive
        result = qaoa_adaptive(
            backends,
            wl.graph,
            qcfg,
            probe_iterations=defense.probe_iterations,
            probe_runs=defense.probe_runs,
            seed=cell_seed,
        )
        record["selected"] = result.selected
        record["probe_ars"] = {k: list(v) for k, v in result.probe_ars.items()}
        _qaoa_record_fields(record, result.final)
        record["ar"] = result.ar
    record["wall_time_s"] = time.perf_counter() - start
    return [record]


def _base_record(config: ExperimentConfig, t, shots, seed, backend: str) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "experiment_id": config.experiment_id,
        "workload": config.workload.name,
        "backend": backend,
        "defense": config.defense.mode,
        "t": t,
        "shots": shots,
        "seed": seed,
    }


def _cell_seed(config: ExperimentConfig, t, shots, seed) -> int:
    t_token = "none" if t is None else float(t)
    return derive_seed(
        config.master_seed, config.workload.name, t_token, shots, seed
    )


def _sort_key(record: dict):
    t = record["t"]
    return (
        record["workload"],
        record["defense"],
        -1.0 if t is None else float(t),
        record["shots"],
        record["seed"],
        record["backend"],
    )


def run_experiment(
    config: ExperimentConfig, jobs: int = 1
) -> tuple[list[dict], list[str]]:
    """Run every (t, shots, seed) cell; returns (records, cell errors).

    Records come back sorted by cell key, independent of scheduling.
    """
    runner = _run_sample_cell if config.workload.kind == "sample" else _run_qaoa_cell
    cells = [
        (t, shots, seed)
        for t in config.t_sweep
        for shots in config.shots_sweep
        for seed in config.seeds
    ]

    def one(cell):
        t, shots, seed = cell
        return runner(config, t, shots, seed, _cell_seed(config, t, shots, seed))

    records: list[dict] = []
    errors: list[str] = []
    if jobs <= 1:
        outcomes = []
        for cell in cells:
            try:
                outcomes.append((cell, one(cell), None))
            except Exception as exc:  # noqa: BLE001 - cell isolation
                outcomes.append((cell, None, exc))
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            futures = [(cell, pool.submit(one, cell)) for cell in cells]
            outcomes = []
            for cell, future in futures:
                try:
                    outcomes.append((cell, future.result(), None))
                except Exception as exc:  # noqa: BLE001
                    outcomes.append((cell, None, exc))
    for cell, result, exc in outcomes:
        if exc is not None:
            errors.append(f"cell t={cell[0]} shots={cell[1]} seed={cell[2]}: {exc}")
        else:
            records.extend(result)
    records.sort(key=_sort_key)
    return records, errors


def write_jsonl(records: list[dict], path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w") as fh:
        for record in records:
            fh.write(json.dumps(record, sort_keys=True) + "\n")


def read_jsonl(path: str | Path) -> list[dict]:
    path = Path(path)
    if not path.exists():
        raise IoError(f"no such results file: {path}")
    with path.open() as fh:
        return [json.loads(line) for line in fh if line.strip()]


_SUMMARY_METRICS = ("pm", "tvd_vs_ideal", "tvd_vs_clean", "confidence", "ar")


def _group_stats(group: list[dict]) -> dict:
    out: dict = {"n_seeds": len(group)}
    for metric in _SUMMARY_METRICS:
        values = [
            r[metric]
            for r in group
            if isinstance(r.get(metric), (int, float))
        ]
        if not values:
            continue
        out[f"{metric}_mean"] = statistics.fmean(values)
        out[f"{metric}_std"] = statistics.pstdev(values) if len(values) > 1 else 0.0
    return out


def summarize(records: list[dict]) -> list[dict]:
    """Mean/std over seeds per (workload, defense, backend, t, shots)."""
    groups: dict[tuple, list[dict]] = {}
    for record in records:
        key = (
            record["workload"],
            record["defense"],
            record["backend"],
            record["t"],
            record["shots"],
        )
        groups.setdefault(key, []).append(record)
    rows = []
    for key in sorted(groups, key=lambda k: tuple(str(x) for x in k)):
        workload, defense, backend, t, shots = key
        row = {
            "workload": workload,
            "defense": defense,
            "backend": backend,
            "t": t,
            "shots": shots,
        }
        row.update(_group_stats(groups[key]))
        rows.append(row)
    return rows


def write_csv(rows: list[dict], path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fields: list[str] = []
    for row in rows:
        for key in row:
            if key not in fields:
                fields.append(key)
    with path.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        writer.writerows(rows)
