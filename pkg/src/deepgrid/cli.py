"""Command line front end.

Subcommands: run (one experiment config), sweep (task x variant grid),
metrics (recompute corrected-container metrics from a saved snapshot),
validate (check a config without running).

Exit statuses: 0 success, 2 configuration error (including usage errors),
3 runtime/I-O error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import ConfigError, build_geometry, build_noise, load_config, resolve
from .harness import (
    METRICS_COLUMNS,
    metric_rngs,
    metric_selector,
    read_grid_snapshot,
    run_experiment,
    run_sweep,
    snapshot_genotype_dim,
)
from .metrics import measure_grid
from .selection import SelectorSpec
from .tasks import ZERO_NOISE, NoisyEvaluator, make_task


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="deepgrid",
        description="Noisy quality-diversity experiments over depth-D grids.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run all replications of one config")
    run_p.add_argument("--config", required=True, help="path to a JSON config")
    run_p.add_argument("--workers", type=int, help="parallel replication workers")
    run_p.add_argument("--out", help="output directory (overrides the config)")

    sweep_p = sub.add_parser("sweep", help="run every task x variant of a sweep config")
    sweep_p.add_argument("--config", required=True)
    sweep_p.add_argument("--workers", type=int)
    sweep_p.add_argument("--out", help="root output directory (overrides the config)")

    met_p = sub.add_parser("metrics", help="recompute corrected metrics from a snapshot")
    met_p.add_argument("--snapshot", required=True, help="grid snapshot CSV")
    met_p.add_argument("--config", required=True, help="config the snapshot came from")
    met_p.add_argument("--replication", type=int, default=0,
                       help="replication whose measurement stream to use (default 0)")
    met_p.add_argument("--selector", default="auto",
                       choices=("auto", "single", "best", "proportional"),
                       help="in-cell draw rule (default: the variant's own)")
    met_p.add_argument("--exact", action="store_true",
                       help="measure noise-free instead of under the config's noise")
    met_p.add_argument("--export-corrected",
                       help="also write the corrected container to this CSV path")
    met_p.add_argument("--out", help="write the metrics row here instead of stdout")

    val_p = sub.add_parser("validate", help="check a config file without running")
    val_p.add_argument("--config", required=True)
    return parser


def _cmd_run(args) -> int:
    cfg = resolve(load_config(args.config))
    if "sweep" in cfg:
        raise ConfigError("config contains a sweep section; use the sweep subcommand")
    run_experiment(cfg, args.out, args.workers)
    return 0


def _cmd_sweep(args) -> int:
    cfg = resolve(load_config(args.config))
    if "sweep" not in cfg:
        raise ConfigError("config has no sweep section; use the run subcommand")
    run_sweep(cfg, args.out, args.workers)
    return 0


def _cmd_metrics(args) -> int:
    cfg = resolve(load_config(args.config))
    task = make_task(cfg["task"])
    geometry = build_geometry(cfg)
    if snapshot_genotype_dim(args.snapshot) != task.genotype_dim:
        raise ConfigError(
            f"snapshot genotype dimension does not match task {cfg['task']!r}"
        )
    grid = read_grid_snapshot(args.snapshot, geometry, cfg["depth"])

    if args.selector == "auto":
        selector = metric_selector(cfg)
    else:
        selector = SelectorSpec(args.selector, cfg["selector"]["epsilon_fraction"])
    if args.replication < 0:
        raise ConfigError("replication must be >= 0")
    sel_rng, noise_rng = metric_rngs(cfg["master_seed"], args.replication, args.exact)
    noise = ZERO_NOISE if args.exact else build_noise(cfg)
    evaluator = NoisyEvaluator(task, noise, noise_rng)
    record, corrected = measure_grid(
        grid, selector, evaluator, cfg["metrics"]["n_repeat"], sel_rng,
        task.fitness_bounds,
        correct_after_collision=cfg["metrics"]["correct_bd_after_collision"],
    )

    header = ",".join(METRICS_COLUMNS[:3] + METRICS_COLUMNS[4:7])
    row = ",".join([
        cfg["task"], cfg["label"], str(args.replication),
        str(record.correct_bd), str(record.corrected_collection_size),
        repr(float(record.total_corrected_quality)),
    ])
    text = header + "\n" + row + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)

    if args.export_corrected:
        lines = ["cell_index,source_cell,fitness,bd0,bd1"]
        for ci in sorted(corrected):
            e = corrected[ci]
            lines.append(",".join([
                str(ci), str(e.source_cell), repr(float(e.fitness)),
                repr(float(e.descriptor[0])), repr(float(e.descriptor[1])),
            ]))
        Path(args.export_corrected).write_text("\n".join(lines) + "\n", encoding="utf-8")
    return 0


def _cmd_validate(args) -> int:
    resolve(load_config(args.config))
    print("configuration OK")
    return 0


_COMMANDS = {
    "run": _cmd_run,
    "sweep": _cmd_sweep,
    "metrics": _cmd_metrics,
    "validate": _cmd_validate,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 on --help; keep its code
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
