"""Scenario configuration: schema, loading, validation.

Configs are YAML (JSON accepted, being a YAML subset).  Physical inputs
carry explicit units in their key names (``*_per_s`` for rates and angular
frequencies) to keep rad/s bookkeeping honest.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from ..errors import ConfigError

SCENARIO_KINDS = (
    "vardiff4",
    "photon-mott",
    "jc-fluctuations",
    "meanfield-lobes",
    "density-plateaus",
    "spin-run2",
    "cluster-zz",
    "glass-stats",
    "migration",
    "custom",
)


@dataclass
class Budgets:
    max_dimension: int = 5000
    max_steps: int = 60_000_000
    max_trajectories: int = 2000

    @staticmethod
    def from_dict(d: dict) -> "Budgets":
        b = Budgets()
        for k, v in (d or {}).items():
            if not hasattr(b, k):
                raise ConfigError(f"unknown budget key {k!r}")
            if int(v) <= 0:
                raise ConfigError(f"budget {k} must be positive")
            setattr(b, k, int(v))
        return b


@dataclass
class ScenarioConfig:
    kind: str
    seed: int = 0
    out_dir: str = "out"
    rescale: float = 1.0
    formats: tuple[str, ...] = ("csv", "json")
    render_figures: bool = True
    budgets: Budgets = field(default_factory=Budgets)
    params: dict = field(default_factory=dict)

    def validate(self) -> None:
        if self.kind not in SCENARIO_KINDS:
            raise ConfigError(f"unknown scenario kind {self.kind!r}; known: "
                              + ", ".join(SCENARIO_KINDS))
        if not (0.0 < self.rescale <= 1.0):
            raise ConfigError("rescale must lie in (0, 1]")
        for f in self.formats:
            if f not in ("csv", "json"):
                raise ConfigError(f"unknown output format {f!r}")
        if int(self.seed) < 0:
            raise ConfigError("seed must be non-negative")


def load_config(path: str | Path) -> ScenarioConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        raw = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    return config_from_dict(raw)


def config_from_dict(raw: dict) -> ScenarioConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a mapping")
    if "scenario" not in raw:
        raise ConfigError("config must set 'scenario'")
    known = {"scenario", "seed", "output_dir", "rescale", "formats",
             "render_figures", "budgets", "params"}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown top-level keys: {sorted(unknown)}")
    fmts = raw.get("formats", ["csv", "json"])
    if isinstance(fmts, str):
        fmts = [f.strip() for f in fmts.split(",") if f.strip()]
    cfg = ScenarioConfig(
        kind=str(raw["scenario"]),
        seed=int(raw.get("seed", 0)),
        out_dir=str(raw.get("output_dir", "out")),
        rescale=float(raw.get("rescale", 1.0)),
        formats=tuple(fmts),
        render_figures=bool(raw.get("render_figures", True)),
        budgets=Budgets.from_dict(raw.get("budgets", {})),
        params=dict(raw.get("params", {})),
    )
    cfg.validate()
    return cfg


def config_to_dict(cfg: ScenarioConfig) -> dict:
    return {
        "scenario": cfg.kind,
        "seed": cfg.seed,
        "output_dir": cfg.out_dir,
        "rescale": cfg.rescale,
        "formats": list(cfg.formats),
        "render_figures": cfg.render_figures,
        "budgets": {"max_dimension": cfg.budgets.max_dimension,
                    "max_steps": cfg.budgets.max_steps,
                    "max_trajectories": cfg.budgets.max_trajectories},
        "params": cfg.params,
    }


def require(params: dict, key: str, cast=float, default=None):
    """Fetch a scenario parameter with casting; missing keys are ConfigError."""
    if key not in params:
        if default is not None:
            return default
        raise ConfigError(f"missing required parameter {key!r}")
    try:
        return cast(params[key])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"parameter {key!r}: {exc}") from exc
