"""Config-driven scenario runner for the reproduced numerical experiments."""

from .config import SCENARIO_KINDS, ScenarioConfig, config_from_dict, \
    load_config
from .runner import ScenarioResult, Table, emit, run_scenario

__all__ = [
    "SCENARIO_KINDS",
    "ScenarioConfig",
    "ScenarioResult",
    "Table",
    "config_from_dict",
    "emit",
    "load_config",
    "run_scenario",
]
