"""Scenario configs, Monte Carlo runners and the ``ris-sim`` command line."""

from activeris.experiments.config import (
    FIGURES,
    Scenario,
    ScenarioConfig,
    config_from_dict,
    default_paper_config,
    load_config,
)
from activeris.experiments.scenarios import CSV_HEADER, ResultRow, run_scenario, write_csv

__all__ = [
    "CSV_HEADER",
    "FIGURES",
    "ResultRow",
    "Scenario",
    "ScenarioConfig",
    "config_from_dict",
    "default_paper_config",
    "load_config",
    "run_scenario",
    "write_csv",
]
