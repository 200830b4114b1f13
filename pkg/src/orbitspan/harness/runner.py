"""Run a configured experiment and persist CSV, JSON and SVG outputs."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
import csv
import io
import json
import math
import os
import time
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from ..covering import (ComplexityProfile, InsufficientRows, MemoryBudgetExceeded, ProfileRow, SampleSet,
                        SampleTooSmall, boundedness_verdict, grid_for_radius, low_discrepancy,
                        measure_sample, orbit_empirical, span_profile, uniform_grid)
from ..oracle import tent_probe_sample
from ..schedule import DepthInfeasible, build_schedule
from ..systems import (Doubling, DynamicalSystem, HorizonOverflow, ProductBernoulliRotations, Rotation,
                       SkewProduct, appendix_system, perturbed_system)
from .chart import emit_chart
from .config import ConfigError, ExperimentConfig

CSV_COLUMNS = ("name", "metric", "n", "eps", "greedy_count", "packing_lb", "covered_fraction", "wall_ms")


class BudgetExceeded(RuntimeError):
    pass


class CheckFailed(AssertionError):
    pass


class OutputError(OSError):
    pass


@lru_cache(maxsize=8)
def cached_schedule(alpha: str, depth: int, budget: str):
    return build_schedule(alpha, depth=depth, budget=Fraction(budget))


def schedule_for(params: dict):
    try:
        return cached_schedule(str(params.get("alpha", "golden")), int(params.get("depth", 2)),
                               str(params.get("budget", "1/100")))
    except DepthInfeasible as exc:
        raise BudgetExceeded(f"schedule infeasible: {exc}") from exc


def build_system(params: dict) -> DynamicalSystem:
    kind = params["kind"]
    if kind == "rotation":
        return Rotation(params.get("alpha", "golden"))
    if kind == "doubling":
        return Doubling()
    if kind == "product":
        return ProductBernoulliRotations(params.get("N", 8), params.get("omega"), params.get("taus"),
                                         params.get("seed", 0))
    if kind == "skew":
        return SkewProduct(params.get("alpha", "golden"), params.get("h"), params.get("s", 1),
                           params.get("beta", 0.0))
    if kind == "appendix":
        return appendix_system(schedule_for(params))
    if kind == "tbeta":
        return perturbed_system(schedule_for(params), s=params.get("s", 1), beta=params.get("beta", "sqrt2"))
    raise ConfigError(f"unknown system kind {kind!r}")


def build_sample(cfg: ExperimentConfig, system: DynamicalSystem) -> SampleSet:
    sp = cfg.sampling
    kind = sp["kind"]
    dim = system.dim
    if kind == "uniform-grid":
        return uniform_grid(dim, int(sp.get("per_axis", 16)))
    if kind == "grid-for-radius":
        return grid_for_radius(dim, float(sp.get("eps", min(cfg.eps_grid))))
    if kind == "low-discrepancy":
        return low_discrepancy(dim, int(sp.get("count", 256)), cfg.seed)
    if kind == "measure-sample":
        return measure_sample(dim, int(sp.get("count", 256)), cfg.seed)
    if kind == "orbit-empirical":
        start = sp.get("start")
        if start is None:
            start = np.random.default_rng(cfg.seed).random(dim)
        return orbit_empirical(system, np.asarray(start, float), int(sp.get("count", 256)),
                               int(sp.get("burn_in", 1000)), int(sp.get("stride", 1)))
    if kind == "probe":
        sch = schedule_for(cfg.system)
        return tent_probe_sample(sch, tuple(sp.get("times", (150, 1500, 15000))),
                                 tuple(sp.get("peaks", (0.0, 0.25, 0.5))))
    raise ConfigError(f"unknown sampling kind {kind!r}")


@dataclass
class RunResult:
    config: ExperimentConfig
    profile: ComplexityProfile
    verdicts: dict
    files: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)


def _cell_tasks(cfg: ExperimentConfig):
    """Independent units of work in canonical order."""
    if cfg.mode == "topological":
        return [(m, None) for m in cfg.metrics]
    return [(m, e) for m in cfg.metrics for e in sorted(set(cfg.eps_grid))]


def _run_task(cfg, system, sample, task) -> list[ProfileRow]:
    metric, eps = task
    mem = int(cfg.budget("memory_bytes"))
    if eps is None:
        prof = span_profile(system, sample, metric, cfg.n_grid, cfg.eps_grid, memory_budget=mem,
                            name=cfg.name)
    else:
        if len(sample) < 10 / eps:
            raise SampleTooSmall(f"{len(sample)} points; measure mode needs {math.ceil(10 / eps)} at eps={eps}")
        prof = span_profile(system, sample, metric, cfg.n_grid, [eps], memory_budget=mem,
                            mass=1.0 - eps, name=cfg.name)
    return prof.rows


def run_experiment(cfg: ExperimentConfig, out_dir: str | None = None, workers: int = 1,
                   svg: bool | None = None, write: bool = True) -> RunResult:
    """Compute the span profile of the configured cells and write the outputs.

    Rows are ordered by (metric, n, eps) whatever the completion order.
    ``wall_ms`` is written as 0 unless ``output.timing`` is set, so the CSV
    and JSON are a pure function of the config; real timings always go to a
    ``<name>.timings.json`` sidecar.
    """
    system = build_system(cfg.system)
    system.max_horizon = int(cfg.budget("max_horizon"))
    t_start = time.perf_counter()
    try:
        sample = build_sample(cfg, system)
        tasks = _cell_tasks(cfg)
        if workers > 1 and len(tasks) > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                parts = list(pool.map(lambda t: _run_task(cfg, system, sample, t), tasks))
        else:
            parts = [_run_task(cfg, system, sample, t) for t in tasks]
    except (MemoryBudgetExceeded, HorizonOverflow) as exc:
        raise BudgetExceeded(str(exc)) from exc
    except SampleTooSmall as exc:
        raise ConfigError(str(exc)) from exc
    elapsed = time.perf_counter() - t_start
    if elapsed > cfg.budget("time_s"):
        raise BudgetExceeded(f"run took {elapsed:.1f} s, budget {cfg.budget('time_s')} s")
    rows = sorted((r for part in parts for r in part), key=lambda r: (cfg.metrics.index(r.metric), r.n, r.eps))
    profile = ComplexityProfile(name=cfg.name)
    for r in rows:
        profile.add(r)
    verdicts = {}
    for m in cfg.metrics:
        try:
            verdicts[m] = boundedness_verdict(profile, m)
        except InsufficientRows:
            verdicts[m] = None
    failures = [f"{m}: expected {v}, got {verdicts.get(m)}" for m, v in sorted(cfg.expect.items())
                if verdicts.get(m) != v]
    res = RunResult(cfg, profile, verdicts, failures=failures,
                    timings={"total_ms": elapsed * 1e3,
                             "cells": [[r.metric, r.n, r.eps, r.wall_ms] for r in rows]})
    if write:
        _persist(res, sample, system, cfg.out_dir(out_dir), cfg.option("svg") if svg is None else svg)
    return res


def profile_csv(profile: ComplexityProfile, name: str, timing: bool = False) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in profile.rows:
        e = r.estimate
        w.writerow([name, r.metric, r.n, repr(float(r.eps)), e.greedy_count, e.packing_lb,
                    repr(float(e.covered_fraction)), repr(float(r.wall_ms)) if timing else "0"])
    return buf.getvalue()


def read_profile_csv(text: str) -> list[dict]:
    rows = list(csv.DictReader(io.StringIO(text)))
    for r in rows:
        for k in ("n", "greedy_count", "packing_lb"):
            r[k] = int(r[k])
        for k in ("eps", "covered_fraction", "wall_ms"):
            r[k] = float(r[k])
    return rows


def report_dict(res: RunResult, sample: SampleSet, system: DynamicalSystem) -> dict:
    return {
        "config": res.config.to_dict(),
        "system": getattr(system, "description", type(system).__name__),
        "sample": {"provenance": sample.provenance, "size": len(sample), "seed": sample.seed,
                   "params": sample.params},
        "rows": [{"metric": r.metric, "n": r.n, "eps": r.eps,
                  "greedy_count": r.estimate.greedy_count, "packing_lb": r.estimate.packing_lb,
                  "covered_fraction": r.estimate.covered_fraction,
                  "centers": list(r.estimate.centers)} for r in res.profile.rows],
        "verdicts": res.verdicts,
        "failures": res.failures,
    }


def write_text(path: str, text: str) -> None:
    try:
        os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc}") from exc


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _persist(res: RunResult, sample, system, out_dir: str, svg: bool) -> None:
    name = res.config.name
    timing = bool(res.config.option("timing"))
    files = {
        "csv": os.path.join(out_dir, f"{name}.csv"),
        "json": os.path.join(out_dir, f"{name}.json"),
        "timings": os.path.join(out_dir, f"{name}.timings.json"),
    }
    write_text(files["csv"], profile_csv(res.profile, name, timing))
    write_text(files["json"], dumps(report_dict(res, sample, system)))
    write_text(files["timings"], dumps(res.timings))
    if svg:
        files["svg"] = os.path.join(out_dir, f"{name}.svg")
        try:
            emit_chart(res.profile, files["svg"], title=name)
        except OSError as exc:
            raise OutputError(str(exc)) from exc
    res.files = files


__all__ = ["CSV_COLUMNS", "BudgetExceeded", "CheckFailed", "OutputError", "RunResult",
           "build_system", "build_sample", "run_experiment", "profile_csv", "read_profile_csv",
           "schedule_for", "write_text", "dumps"]
