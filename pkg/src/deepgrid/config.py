"""Experiment configuration: a JSON tree with full defaulting.

Every tunable of the library is overridable here; ``resolve`` fills in the
defaults and validates, returning a plain nested dict that serializes back
to JSON (the resolved form is written next to results and re-resolves to
itself).
"""

from __future__ import annotations

import json
import math
import os
from typing import Any

from .algorithms import AlgorithmSpec, VARIANTS
from .grids import CartesianGrid, Geometry, PolarGrid
from .selection import MutationSpec
from .tasks import NoiseSpec, Task, make_task


class ConfigError(Exception):
    """Invalid or inconsistent configuration."""


DEFAULT_DEPTH = {"deep_grid": 50, "naive": 1, "adaptive": 1, "adaptive_drift": 10}
# mutation rate is the one hyperparameter tuned per variant
DEFAULT_RATE = {"deep_grid": 0.05, "naive": 0.10, "adaptive": 0.10, "adaptive_drift": 0.10}

_TOP_KEYS = {
    "task", "variant", "label", "depth", "n_samples", "batch_size", "init_size",
    "budget", "replications", "master_seed", "noise", "grid", "mutation",
    "selector", "metrics", "out", "workers", "sweep",
}
_NOISE_KEYS = {"fitness", "bd", "interpretation"}
_MUTATION_KEYS = {"per_gene_rate", "sigma_fraction"}
_SELECTOR_KEYS = {"epsilon_fraction"}
_METRICS_KEYS = {"n_repeat", "checkpoint_evals", "exact", "correct_bd_after_collision"}
_SWEEP_KEYS = {"tasks", "variants"}


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ConfigError(msg)


def _as_int(tree: dict, key: str, lo: int | None = None) -> int:
    v = tree[key]
    _require(isinstance(v, int) and not isinstance(v, bool), f"{key} must be an integer")
    if lo is not None:
        _require(v >= lo, f"{key} must be >= {lo}")
    return v


def _as_num(tree: dict, key: str) -> float:
    v = tree[key]
    _require(isinstance(v, (int, float)) and not isinstance(v, bool),
             f"{key} must be a number")
    _require(math.isfinite(v), f"{key} must be finite")
    return float(v)


def _check_keys(tree: dict, allowed: set, where: str) -> None:
    unknown = set(tree) - allowed
    _require(not unknown, f"unknown {where} key(s): {', '.join(sorted(unknown))}")


def load_config(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from None
    _require(isinstance(raw, dict), "config root must be a JSON object")
    return raw


def default_label(variant: str, depth: int, n_samples: int) -> str:
    if variant == "deep_grid":
        return f"deep_grid_{depth}"
    if variant == "naive":
        return f"naive_{n_samples}"
    if variant == "adaptive_drift":
        return f"adaptive_drift_{depth}"
    return "adaptive"


def resolve(raw: dict) -> dict:
    """Fill defaults and validate; returns the fully explicit config tree."""
    _require(isinstance(raw, dict), "config root must be a JSON object")
    _check_keys(raw, _TOP_KEYS, "config")

    cfg: dict[str, Any] = {}
    cfg["task"] = raw.get("task", "rastrigin")
    _require(cfg["task"] in ("rastrigin", "arm"),
             f"task must be 'rastrigin' or 'arm', got {cfg['task']!r}")

    cfg["variant"] = raw.get("variant", "deep_grid")
    _require(cfg["variant"] in VARIANTS, f"variant must be one of {VARIANTS}")

    cfg["depth"] = raw.get("depth", DEFAULT_DEPTH[cfg["variant"]])
    cfg["n_samples"] = raw.get("n_samples", 1)
    cfg["batch_size"] = raw.get("batch_size", 100)
    cfg["init_size"] = raw.get("init_size", 100)
    cfg["budget"] = raw.get("budget", 100_000)
    cfg["replications"] = raw.get("replications", 1)
    cfg["master_seed"] = raw.get("master_seed", 0)
    for key, lo in (("depth", 1), ("n_samples", 1), ("batch_size", 1),
                    ("init_size", 1), ("budget", 1), ("replications", 1),
                    ("master_seed", 0)):
        _as_int(cfg, key, lo)

    noise = dict(raw.get("noise", {}))
    _require(isinstance(noise, dict), "noise must be an object")
    _check_keys(noise, _NOISE_KEYS, "noise")
    noise.setdefault("fitness", 0.05)
    noise.setdefault("bd", 0.01)
    noise.setdefault("interpretation", "std")
    _require(_as_num(noise, "fitness") >= 0, "noise.fitness must be >= 0")
    _require(_as_num(noise, "bd") >= 0, "noise.bd must be >= 0")
    _require(noise["interpretation"] in ("std", "variance"),
             "noise.interpretation must be 'std' or 'variance'")
    cfg["noise"] = noise

    mutation = dict(raw.get("mutation", {}))
    _require(isinstance(mutation, dict), "mutation must be an object")
    _check_keys(mutation, _MUTATION_KEYS, "mutation")
    mutation.setdefault("per_gene_rate", DEFAULT_RATE[cfg["variant"]])
    mutation.setdefault("sigma_fraction", 0.1)
    _require(0.0 < _as_num(mutation, "per_gene_rate") <= 1.0,
             "mutation.per_gene_rate must lie in (0, 1]")
    _require(_as_num(mutation, "sigma_fraction") > 0,
             "mutation.sigma_fraction must be positive")
    cfg["mutation"] = mutation

    selector = dict(raw.get("selector", {}))
    _require(isinstance(selector, dict), "selector must be an object")
    _check_keys(selector, _SELECTOR_KEYS, "selector")
    selector.setdefault("epsilon_fraction", 0.1)
    _require(_as_num(selector, "epsilon_fraction") > 0,
             "selector.epsilon_fraction must be positive")
    cfg["selector"] = selector

    metrics = dict(raw.get("metrics", {}))
    _require(isinstance(metrics, dict), "metrics must be an object")
    _check_keys(metrics, _METRICS_KEYS, "metrics")
    metrics.setdefault("n_repeat", 50)
    if metrics.get("checkpoint_evals") is None:
        metrics["checkpoint_evals"] = max(1, round(0.05 * cfg["budget"]))
    metrics.setdefault("exact", False)
    metrics.setdefault("correct_bd_after_collision", False)
    _as_int(metrics, "n_repeat", 1)
    _as_int(metrics, "checkpoint_evals", 1)
    _require(isinstance(metrics["exact"], bool), "metrics.exact must be a boolean")
    _require(isinstance(metrics["correct_bd_after_collision"], bool),
             "metrics.correct_bd_after_collision must be a boolean")
    cfg["metrics"] = metrics

    task = make_task(cfg["task"])
    cfg["grid"] = _resolve_grid(raw.get("grid"), task)

    label = raw.get("label")
    if label is None:
        label = default_label(cfg["variant"], cfg["depth"], cfg["n_samples"])
    _require(isinstance(label, str) and label != "", "label must be a non-empty string")
    cfg["label"] = label

    cfg["out"] = raw.get("out", "results")
    _require(isinstance(cfg["out"], str) and cfg["out"] != "",
             "out must be a non-empty path string")
    workers = raw.get("workers")
    if workers is not None:
        _require(isinstance(workers, int) and not isinstance(workers, bool)
                 and workers >= 1, "workers must be an integer >= 1")
    cfg["workers"] = workers

    # cross-field rules mirrored from the algorithm layer, caught early
    try:
        build_algorithm_spec(cfg)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    init_cost = cfg["init_size"] * (cfg["n_samples"] if cfg["variant"] == "naive" else 1)
    _require(cfg["budget"] >= init_cost,
             f"budget ({cfg['budget']}) is below the initialization cost ({init_cost})")

    if "sweep" in raw:
        cfg["sweep"] = _resolve_sweep(raw["sweep"])
    return cfg


def _resolve_grid(tree: dict | None, task: Task) -> dict:
    if tree is None:
        geom = task.default_geometry()
        if isinstance(geom, CartesianGrid):
            return {"kind": "cartesian", "lower": list(geom.lower),
                    "upper": list(geom.upper), "shape": list(geom.shape)}
        return {"kind": "polar", "center": list(geom.center),
                "radius": geom.radius, "rings": geom.rings}
    _require(isinstance(tree, dict), "grid must be an object")
    kind = tree.get("kind")
    if kind == "cartesian":
        _check_keys(tree, {"kind", "lower", "upper", "shape"}, "grid")
        for key in ("lower", "upper", "shape"):
            _require(isinstance(tree.get(key), list) and len(tree[key]) == task.bd_dim,
                     f"grid.{key} must be a list of {task.bd_dim} values")
        out = {"kind": "cartesian", "lower": [float(v) for v in tree["lower"]],
               "upper": [float(v) for v in tree["upper"]],
               "shape": [int(v) for v in tree["shape"]]}
        _require(all(n >= 1 for n in out["shape"]), "grid.shape entries must be >= 1")
        _require(all(lo < hi for lo, hi in zip(out["lower"], out["upper"])),
                 "grid.lower must be below grid.upper on every axis")
        return out
    if kind == "polar":
        _check_keys(tree, {"kind", "center", "radius", "rings"}, "grid")
        center = tree.get("center", [0.0, 0.0])
        _require(isinstance(center, list) and len(center) == 2,
                 "grid.center must be a list of 2 values")
        out = {"kind": "polar", "center": [float(v) for v in center],
               "radius": float(tree.get("radius", 1.0)),
               "rings": int(tree.get("rings", 71))}
        _require(out["radius"] > 0, "grid.radius must be positive")
        _require(out["rings"] >= 1, "grid.rings must be >= 1")
        return out
    raise ConfigError("grid.kind must be 'cartesian' or 'polar'")


def _resolve_sweep(tree) -> dict:
    _require(isinstance(tree, dict), "sweep must be an object")
    _check_keys(tree, _SWEEP_KEYS, "sweep")
    out: dict[str, Any] = {}
    tasks = tree.get("tasks")
    if tasks is not None:
        _require(isinstance(tasks, list) and tasks, "sweep.tasks must be a non-empty list")
        for t in tasks:
            _require(t in ("rastrigin", "arm"), f"sweep.tasks entry {t!r} unknown")
        out["tasks"] = list(tasks)
    variants = tree.get("variants")
    _require(isinstance(variants, list) and variants,
             "sweep.variants must be a non-empty list of override objects")
    for v in variants:
        _require(isinstance(v, dict), "sweep.variants entries must be objects")
        _check_keys(v, _TOP_KEYS - {"sweep", "out", "workers", "task"},
                    "sweep.variants entry")
    out["variants"] = [dict(v) for v in variants]
    return out


def sweep_members(cfg: dict) -> list[dict]:
    """Expand a resolved sweep config into resolved member configs.

    Each member re-resolves the base tree with the entry's overrides, so
    per-variant defaults (depth, mutation rate, label) fall out correctly.
    """
    _require("sweep" in cfg, "config has no sweep section")
    base = {k: v for k, v in cfg.items() if k not in ("sweep", "grid", "label",
                                                      "depth", "mutation")}
    # grid/label/depth/mutation resolve per member: they depend on task/variant
    members = []
    for task in cfg["sweep"].get("tasks", [cfg["task"]]):
        for entry in cfg["sweep"]["variants"]:
            member = dict(base)
            member["task"] = task
            member.update(entry)
            members.append(resolve(member))
    return members


# -- constructors bridging config trees to runtime objects ----------------

def build_noise(cfg: dict) -> NoiseSpec:
    n = cfg["noise"]
    return NoiseSpec(n["fitness"], n["bd"], n["interpretation"])


def build_geometry(cfg: dict) -> Geometry:
    g = cfg["grid"]
    if g["kind"] == "cartesian":
        return CartesianGrid(tuple(g["lower"]), tuple(g["upper"]), tuple(g["shape"]))
    return PolarGrid(tuple(g["center"]), g["radius"], g["rings"])


def build_algorithm_spec(cfg: dict) -> AlgorithmSpec:
    return AlgorithmSpec(
        variant=cfg["variant"],
        depth=cfg["depth"],
        mutation=MutationSpec(cfg["mutation"]["per_gene_rate"],
                              cfg["mutation"]["sigma_fraction"]),
        batch_size=cfg["batch_size"],
        n_samples=cfg["n_samples"],
        epsilon_fraction=cfg["selector"]["epsilon_fraction"],
    )


def default_workers(cfg: dict) -> int:
    if cfg.get("workers"):
        return cfg["workers"]
    return max(1, os.cpu_count() or 1)
