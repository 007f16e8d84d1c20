"""Scenario execution: result containers, deterministic emission, manifest.

CSV files are RFC-4180 with a fixed column order and 17-significant-digit
floats, so re-running with the same seed reproduces byte-identical outputs.
The manifest (config echo, library version, wall clock, per-output
checksums) is written last via an atomic rename.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .. import __version__
from ..errors import BudgetExceededError, ConfigError
from .config import ScenarioConfig, config_to_dict


@dataclass
class Table:
    name: str
    columns: tuple[str, ...]
    rows: np.ndarray              # (n_rows, n_cols) floats

    def __post_init__(self):
        self.rows = np.atleast_2d(np.asarray(self.rows, dtype=float))
        if self.rows.size == 0:
            self.rows = self.rows.reshape(0, len(self.columns))
        if self.rows.shape[1] != len(self.columns):
            raise ValueError(f"table {self.name}: {self.rows.shape[1]} "
                             f"columns vs {len(self.columns)} headers")


@dataclass
class ScenarioResult:
    kind: str
    tables: list[Table]
    summary: dict
    warnings: list[str] = field(default_factory=list)
    extra_json: dict = field(default_factory=dict)   # name -> json-able object

    def table(self, name: str) -> Table:
        for t in self.tables:
            if t.name == name:
                return t
        raise KeyError(name)


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def write_csv(path: Path, table: Table) -> None:
    lines = [",".join(table.columns)]
    for row in table.rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\r\n".join(lines) + "\r\n")


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not serializable: {type(o)}")


def write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True,
                               default=_json_default) + "\n")


def sha256_of(path: Path) -> str:
    h = hashlib.sha256()
    h.update(path.read_bytes())
    return h.hexdigest()


def emit(result: ScenarioResult, cfg: ScenarioConfig,
         out_dir: str | Path | None = None,
         wall_clock_s: float = 0.0) -> dict:
    """Write tables, summary, optional figures, and the manifest (last)."""
    out = Path(out_dir if out_dir is not None else cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    if "csv" in cfg.formats:
        for t in result.tables:
            p = out / f"{t.name}.csv"
            write_csv(p, t)
            written.append(p)
    if "json" in cfg.formats:
        p = out / "summary.json"
        write_json(p, result.summary)
        written.append(p)
        for name, obj in result.extra_json.items():
            p = out / f"{name}.json"
            write_json(p, obj)
            written.append(p)
    if cfg.render_figures:
        from . import plots
        try:
            figs = plots.render(result, out)
            written.extend(figs)
        except Exception as exc:  # figures are best-effort reporting
            result.warnings.append(f"figure rendering failed: {exc}")
    manifest = {
        "scenario": result.kind,
        "version": __version__,
        "config": config_to_dict(cfg),
        "wall_clock_s": wall_clock_s,
        "outputs": {p.name: sha256_of(p) for p in written},
        "warnings": result.warnings,
    }
    tmp = out / "manifest.json.tmp"
    write_json(tmp, manifest)
    os.replace(tmp, out / "manifest.json")
    return manifest


def run_scenario(cfg: ScenarioConfig, out_dir: str | Path | None = None,
                 write: bool = True) -> tuple[ScenarioResult, dict | None]:
    """Dispatch a validated config to its scenario implementation."""
    from . import library

    cfg.validate()
    fn = library.SCENARIOS.get(cfg.kind)
    if fn is None:
        raise ConfigError(f"unknown scenario kind {cfg.kind!r}")
    t0 = time.time()
    result = fn(cfg)
    manifest = None
    if write:
        manifest = emit(result, cfg, out_dir, wall_clock_s=time.time() - t0)
    return result, manifest


def check_dimension(dim: int, cfg: ScenarioConfig) -> None:
    if dim > cfg.budgets.max_dimension:
        raise BudgetExceededError(
            f"Hilbert dimension {dim} exceeds budget "
            f"{cfg.budgets.max_dimension}")


def check_trajectories(n: int, cfg: ScenarioConfig) -> None:
    if n > cfg.budgets.max_trajectories:
        raise BudgetExceededError(
            f"{n} trajectories exceed budget {cfg.budgets.max_trajectories}")
