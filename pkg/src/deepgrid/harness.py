"""Experiment orchestration: seeded replications, checkpointed metrics,
CSV/snapshot output.

Stream layout: each (master_seed, replication) pair owns disjoint rng
streams for variation, evaluation noise, selection, and measurement (the
measurement stream is split into selector and noise halves, plus a
separate stream for the optional noise-free measurement pass).  Metric
evaluations are made through an uncapped evaluator and never touch the
run budget.

Per-replication metric rows are appended to ``metrics_r<k>.csv`` as they
are produced, so interrupted runs stay analyzable; completed runs merge
them into one ``metrics.csv``.  Final files are written to a temp path
and atomically renamed.
"""

from __future__ import annotations

import csv
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .algorithms import build_loop
from .config import (
    ConfigError,
    build_algorithm_spec,
    build_geometry,
    build_noise,
    default_workers,
    sweep_members,
)
from .core import Grid, Individual
from .grids import Geometry
from .metrics import MetricsRecord, measure_grid
from .selection import SelectorSpec
from .tasks import ZERO_NOISE, NoisyEvaluator, make_task

METRICS_COLUMNS = (
    "task",
    "variant",
    "replication",
    "evaluations",
    "correct_bd",
    "corrected_collection_size",
    "total_corrected_quality",
    "wallclock_seconds",
)

STREAM_IDS = {"variation": 0, "noise": 1, "selection": 2, "metrics": 3, "metrics_exact": 4}


def stream_rng(master_seed: int, replication: int, stream: str) -> np.random.Generator:
    """Deterministic, disjoint stream per (seed, replication, purpose)."""
    ss = np.random.SeedSequence(entropy=(master_seed, replication, STREAM_IDS[stream]))
    return np.random.Generator(np.random.PCG64(ss))


def metric_rngs(
    master_seed: int, replication: int, exact: bool = False
) -> tuple[np.random.Generator, np.random.Generator]:
    """(selector draws, evaluation noise) pair for measurement passes."""
    stream = "metrics_exact" if exact else "metrics"
    ss = np.random.SeedSequence(entropy=(master_seed, replication, STREAM_IDS[stream]))
    sel_ss, noise_ss = ss.spawn(2)
    return (
        np.random.Generator(np.random.PCG64(sel_ss)),
        np.random.Generator(np.random.PCG64(noise_ss)),
    )


@dataclass
class RunResult:
    """Everything one replication leaves behind, beyond its CSV rows."""

    replication: int
    records: list[MetricsRecord]
    wallclocks: list[float]
    snapshot: str
    evaluations_used: int
    metric_evaluations: int
    generations: int
    final_coverage: int
    total_occupants: int
    exact_records: list[MetricsRecord] = field(default_factory=list)


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


# -- grid snapshots -------------------------------------------------------

def snapshot_header(genotype_dim: int) -> list[str]:
    return (
        ["cell_index", "slot"]
        + [f"g{i}" for i in range(genotype_dim)]
        + ["fitness", "bd0", "bd1", "sample_count"]
    )


def write_grid_snapshot(grid: Grid, path: str | Path, genotype_dim: int) -> None:
    """One row per occupant, cells in index order, slots in storage order."""
    lines = [",".join(snapshot_header(genotype_dim))]
    for ci in sorted(grid.occupied_cells()):
        for slot, ind in enumerate(grid.occupants(ci)):
            fields = [str(ci), str(slot)]
            fields += [repr(float(g)) for g in ind.genotype]
            fields.append(repr(float(ind.fitness)))
            fields += [repr(float(b)) for b in ind.descriptor]
            fields.append(str(ind.sample_count))
            lines.append(",".join(fields))
    _atomic_write(Path(path), "\n".join(lines) + "\n")


def read_grid_snapshot(path: str | Path, geometry: Geometry, depth: int) -> Grid:
    """Rebuild a grid from a snapshot file (inverse of write_grid_snapshot)."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or header[:2] != ["cell_index", "slot"]:
            raise ValueError(f"{path} is not a grid snapshot")
        d = len(header) - 6
        if d < 1 or header != snapshot_header(d):
            raise ValueError(f"{path} has an unexpected column layout")
        grid = Grid(geometry, depth)
        for row in reader:
            ci = int(row[0])
            genotype = np.array([float(v) for v in row[2 : 2 + d]])
            fitness = float(row[2 + d])
            bd = np.array([float(row[3 + d]), float(row[4 + d])])
            grid.add_occupant(ci, Individual(genotype, fitness, bd, int(row[5 + d])))
    return grid


def snapshot_genotype_dim(path: str | Path) -> int:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        header = next(csv.reader(fh), None)
    if header is None or len(header) < 7:
        raise ValueError(f"{path} is not a grid snapshot")
    return len(header) - 6


# -- one replication ------------------------------------------------------

def metric_selector(cfg: dict) -> SelectorSpec:
    return build_algorithm_spec(cfg).selector


def run_replication(cfg: dict, rep: int, out_dir: str | Path) -> RunResult:
    """Run one seeded replication to budget exhaustion, appending metric
    rows as checkpoints pass and writing the final grid snapshot."""
    out = Path(out_dir)
    task = make_task(cfg["task"])
    geometry = build_geometry(cfg)
    spec = build_algorithm_spec(cfg)
    noise = build_noise(cfg)
    seed = cfg["master_seed"]
    budget = cfg["budget"]
    mcfg = cfg["metrics"]
    after_collision = mcfg["correct_bd_after_collision"]

    evaluator = NoisyEvaluator(task, noise, stream_rng(seed, rep, "noise"), budget)
    loop = build_loop(
        task,
        geometry,
        spec,
        evaluator,
        stream_rng(seed, rep, "variation"),
        stream_rng(seed, rep, "selection"),
    )
    msel_rng, mnoise_rng = metric_rngs(seed, rep)
    mevaluator = NoisyEvaluator(task, noise, mnoise_rng)
    if mcfg["exact"]:
        esel_rng, enoise_rng = metric_rngs(seed, rep, exact=True)
        eevaluator = NoisyEvaluator(task, ZERO_NOISE, enoise_rng)

    interval = mcfg["checkpoint_evals"]
    records: list[MetricsRecord] = []
    wallclocks: list[float] = []
    exact_records: list[MetricsRecord] = []
    next_cp = interval
    snapshot_path = out / f"snapshot_r{rep}.csv"

    part = open(out / f"metrics_r{rep}.csv", "w", encoding="utf-8", newline="")
    if mcfg["exact"]:
        epart = open(out / f"metrics_exact_r{rep}.csv", "w", encoding="utf-8", newline="")
    try:
        writer = csv.writer(part)
        writer.writerow(METRICS_COLUMNS)
        part.flush()
        if mcfg["exact"]:
            ewriter = csv.writer(epart)
            ewriter.writerow(METRICS_COLUMNS)
            epart.flush()

        start = time.perf_counter()

        def emit(force: bool = False) -> None:
            nonlocal next_cp
            used = loop.evaluations_used
            if used < next_cp and not (force and (not records or records[-1].evaluations_used < used)):
                return
            wall = time.perf_counter() - start
            record, _ = measure_grid(
                loop.grid, loop.selector, mevaluator, mcfg["n_repeat"], msel_rng,
                task.fitness_bounds, used, after_collision,
            )
            records.append(record)
            wallclocks.append(wall)
            writer.writerow(_metric_row(cfg, rep, record, wall))
            part.flush()
            if mcfg["exact"]:
                erecord, _ = measure_grid(
                    loop.grid, loop.selector, eevaluator, mcfg["n_repeat"], esel_rng,
                    task.fitness_bounds, used, after_collision,
                )
                exact_records.append(erecord)
                ewriter.writerow(_metric_row(cfg, rep, erecord, wall))
                epart.flush()
            next_cp = (used // interval + 1) * interval

        loop.initialize(cfg["init_size"])
        emit()
        while evaluator.can_afford(loop.generation_cost()):
            loop.run_generation()
            emit()
        emit(force=True)
    finally:
        part.close()
        if mcfg["exact"]:
            epart.close()

    write_grid_snapshot(loop.grid, snapshot_path, task.genotype_dim)
    return RunResult(
        replication=rep,
        records=records,
        wallclocks=wallclocks,
        snapshot=str(snapshot_path),
        evaluations_used=loop.evaluations_used,
        metric_evaluations=mevaluator.count,
        generations=loop.generations,
        final_coverage=loop.grid.coverage(),
        total_occupants=loop.grid.total_occupants(),
        exact_records=exact_records,
    )


def _metric_row(cfg: dict, rep: int, record: MetricsRecord, wall: float) -> list[str]:
    return [
        cfg["task"],
        cfg["label"],
        str(rep),
        str(record.evaluations_used),
        str(record.correct_bd),
        str(record.corrected_collection_size),
        repr(float(record.total_corrected_quality)),
        f"{wall:.3f}",
    ]


# -- whole experiments ----------------------------------------------------

def _replication_job(args: tuple) -> RunResult:
    cfg, rep, out_dir = args
    return run_replication(cfg, rep, out_dir)


def run_experiment(
    cfg: dict, out: str | Path | None = None, workers: int | None = None
) -> list[RunResult]:
    """All replications of one resolved config; merges per-replication CSV
    parts and writes the resolved config and a run summary next to them."""
    out_dir = Path(out if out is not None else cfg["out"])
    out_dir.mkdir(parents=True, exist_ok=True)
    _atomic_write(out_dir / "config_resolved.json", json.dumps(cfg, indent=2) + "\n")

    reps = cfg["replications"]
    n_workers = min(workers if workers is not None else default_workers(cfg), reps)
    if n_workers <= 1:
        results = [run_replication(cfg, rep, out_dir) for rep in range(reps)]
    else:
        jobs = [(cfg, rep, str(out_dir)) for rep in range(reps)]
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            results = list(pool.map(_replication_job, jobs))
    results.sort(key=lambda r: r.replication)

    _merge_parts(out_dir, "metrics", reps)
    if cfg["metrics"]["exact"]:
        _merge_parts(out_dir, "metrics_exact", reps)
    _write_summary(out_dir, cfg, results)
    return results


def _merge_parts(out_dir: Path, stem: str, reps: int) -> None:
    lines = [",".join(METRICS_COLUMNS)]
    for rep in range(reps):
        with open(out_dir / f"{stem}_r{rep}.csv", "r", encoding="utf-8", newline="") as fh:
            body = fh.read().splitlines()
        if body[:1] != [",".join(METRICS_COLUMNS)]:
            raise RuntimeError(f"{stem}_r{rep}.csv does not carry the expected header")
        lines += body[1:]
    _atomic_write(out_dir / f"{stem}.csv", "\n".join(lines) + "\n")


def _write_summary(out_dir: Path, cfg: dict, results: list[RunResult]) -> None:
    # wallclock stays out of the summary so the file is seed-deterministic
    payload = {
        "task": cfg["task"],
        "variant": cfg["variant"],
        "label": cfg["label"],
        "budget": cfg["budget"],
        "replications": [
            {
                "replication": r.replication,
                "evaluations_used": r.evaluations_used,
                "metric_evaluations": r.metric_evaluations,
                "generations": r.generations,
                "final_coverage": r.final_coverage,
                "total_occupants": r.total_occupants,
                "snapshot": Path(r.snapshot).name,
                "checkpoints": [rec.evaluations_used for rec in r.records],
            }
            for r in results
        ],
    }
    _atomic_write(out_dir / "summary.json", json.dumps(payload, indent=2) + "\n")


def run_sweep(
    cfg: dict, out: str | Path | None = None, workers: int | None = None
) -> dict[str, list[RunResult]]:
    """Run every task x variant member of a sweep config under its own
    subdirectory named <task>__<label>."""
    members = sweep_members(cfg)
    names = [f"{m['task']}__{m['label']}" for m in members]
    for name in names:
        if names.count(name) > 1:
            raise ConfigError(f"sweep contains duplicate member {name!r}; set distinct labels")
    root = Path(out if out is not None else cfg["out"])
    root.mkdir(parents=True, exist_ok=True)
    outcome: dict[str, list[RunResult]] = {}
    for name, member in zip(names, members):
        outcome[name] = run_experiment(member, root / name, workers)
    return outcome
