"""Declarative experiment configuration (JSON)."""
from __future__ import annotations

import copy
from dataclasses import dataclass, field
import json
import math
import os
from typing import Any

from ..metrics import METRIC_KINDS

OUT_ENV = "ORBITSPAN_OUT"

SYSTEM_KINDS = {
    "rotation": {"alpha"},
    "doubling": set(),
    "product": {"N", "omega", "taus", "seed"},
    "skew": {"alpha", "h", "s", "beta"},
    "appendix": {"alpha", "depth", "budget"},
    "tbeta": {"alpha", "depth", "budget", "s", "beta"},
}
SAMPLE_KINDS = {
    "uniform-grid": {"per_axis"},
    "grid-for-radius": {"eps"},
    "low-discrepancy": {"count"},
    "measure-sample": {"count"},
    "orbit-empirical": {"count", "burn_in", "stride", "start"},
    "probe": {"times", "peaks"},
}
MODES = ("topological", "measure")
VERDICTS = ("bounded", "growing", "inconclusive")
DEFAULT_BUDGETS = {"memory_bytes": 2 * 1024 ** 3, "max_horizon": 10 ** 9, "time_s": 3600.0}
DEFAULT_OUTPUT = {"dir": None, "svg": False, "timing": False}


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    name: str
    system: dict[str, Any]
    metrics: list[str]
    n_grid: list[int]
    eps_grid: list[float]
    sampling: dict[str, Any]
    seed: int = 0
    mode: str = "topological"
    output: dict[str, Any] = field(default_factory=lambda: dict(DEFAULT_OUTPUT))
    budgets: dict[str, Any] = field(default_factory=lambda: dict(DEFAULT_BUDGETS))
    expect: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        self.validate()

    # ---- validation --------------------------------------------------------

    def validate(self) -> None:
        if not isinstance(self.name, str) or not self.name or not all(
                c.isalnum() or c in "-_." for c in self.name):
            raise ConfigError("name must be a nonempty string of letters, digits, '-', '_' or '.'")
        kind = self.system.get("kind")
        if kind not in SYSTEM_KINDS:
            raise ConfigError(f"system.kind must be one of {sorted(SYSTEM_KINDS)}")
        extra = set(self.system) - SYSTEM_KINDS[kind] - {"kind"}
        if extra:
            raise ConfigError(f"unknown system parameters {sorted(extra)}")
        if kind == "tbeta" and self.system.get("s", 1) == 0:
            raise ConfigError("tbeta needs a nonzero integer s")
        if not self.metrics or any(m not in METRIC_KINDS for m in self.metrics):
            raise ConfigError(f"metrics must be a nonempty subset of {list(METRIC_KINDS)}")
        if len(set(self.metrics)) != len(self.metrics):
            raise ConfigError("metrics repeat")
        if not self.n_grid or any(not isinstance(n, int) or isinstance(n, bool) or n < 1
                                  for n in self.n_grid):
            raise ConfigError("grids.n must be a nonempty list of integers >= 1")
        if not self.eps_grid or any(not isinstance(e, (int, float)) or isinstance(e, bool)
                                    or not math.isfinite(e) or e <= 0 for e in self.eps_grid):
            raise ConfigError("grids.eps must be a nonempty list of positive numbers")
        s_kind = self.sampling.get("kind")
        if s_kind not in SAMPLE_KINDS:
            raise ConfigError(f"sampling.kind must be one of {sorted(SAMPLE_KINDS)}")
        extra = set(self.sampling) - SAMPLE_KINDS[s_kind] - {"kind"}
        if extra:
            raise ConfigError(f"unknown sampling parameters {sorted(extra)}")
        if s_kind == "probe" and kind not in ("appendix", "tbeta"):
            raise ConfigError("probe samples need an appendix or tbeta system")
        if not isinstance(self.seed, int) or isinstance(self.seed, bool) or self.seed < 0:
            raise ConfigError("seed must be a nonnegative integer")
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}")
        for key, v in self.budgets.items():
            if key not in DEFAULT_BUDGETS:
                raise ConfigError(f"unknown budget {key!r}")
            if not isinstance(v, (int, float)) or isinstance(v, bool) or not v > 0:
                raise ConfigError(f"budget {key} must be positive")
        for key in self.output:
            if key not in DEFAULT_OUTPUT:
                raise ConfigError(f"unknown output option {key!r}")
        for m, v in self.expect.items():
            if m not in self.metrics or v not in VERDICTS:
                raise ConfigError(f"expect: {m!r} -> {v!r} is not a verdict for a configured metric")
        if self.expect and len(set(self.n_grid)) < 4:
            raise ConfigError("expected verdicts need at least 4 horizons")

    # ---- budgets and output ------------------------------------------------------

    def budget(self, key: str):
        return self.budgets.get(key, DEFAULT_BUDGETS[key])

    def option(self, key: str):
        return self.output.get(key, DEFAULT_OUTPUT[key])

    def out_dir(self, override: str | None = None) -> str:
        return override or self.option("dir") or os.environ.get(OUT_ENV) or "orbitspan-out"

    # ---- serialization ------------------------------------------------------------

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "seed": self.seed,
            "mode": self.mode,
            "system": copy.deepcopy(self.system),
            "metrics": list(self.metrics),
            "grids": {"n": list(self.n_grid), "eps": list(self.eps_grid)},
            "sampling": copy.deepcopy(self.sampling),
            "budgets": dict(self.budgets),
            "output": dict(self.output),
            "expect": dict(self.expect),
        }

    def to_text(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "ExperimentConfig":
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        known = {"name", "seed", "mode", "system", "metrics", "grids", "sampling", "budgets",
                 "output", "expect"}
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown sections {sorted(extra)}")
        try:
            grids = d["grids"]
            return cls(name=d["name"], system=dict(d["system"]), metrics=list(d["metrics"]),
                       n_grid=list(grids["n"]), eps_grid=list(grids["eps"]),
                       sampling=dict(d["sampling"]), seed=d.get("seed", 0),
                       mode=d.get("mode", "topological"),
                       output={**DEFAULT_OUTPUT, **d.get("output", {})},
                       budgets={**DEFAULT_BUDGETS, **d.get("budgets", {})},
                       expect=dict(d.get("expect", {})))
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"missing or malformed field: {exc}") from exc

    @classmethod
    def from_text(cls, text: str) -> "ExperimentConfig":
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"not valid JSON: {exc}") from exc
        return cls.from_dict(d)

    @classmethod
    def load(cls, path: str) -> "ExperimentConfig":
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_text(text)

    def dump(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_text())
