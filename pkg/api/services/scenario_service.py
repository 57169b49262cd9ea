"""Scenario parsing and run service."""

import logging
import os
from pathlib import Path

from api.models import ExampleSummary, RunResult, ValidationResult
from cantibec.errors import CantibecError
from cantibec.runner import run_scenario
from cantibec.scenario import config_schema, parse_config, serialize_config
from example_scenarios import SCENARIOS

logger = logging.getLogger(__name__)

OUTPUT_DIR_ENV = "CANTIBEC_OUTPUT_DIR"


def output_root() -> Path:
    """Run directory, from CANTIBEC_OUTPUT_DIR or ~/.cantibec_runs."""
    configured = os.environ.get(OUTPUT_DIR_ENV)
    return Path(configured) if configured else Path.home() / ".cantibec_runs"


def schema() -> str:
    return config_schema()


def list_examples() -> list[ExampleSummary]:
    summaries = []
    for name, scenario_fn in SCENARIOS.items():
        scenario = scenario_fn().build()
        doc = (scenario_fn.__doc__ or "").strip().splitlines()
        summaries.append(ExampleSummary(name=name, kind=scenario.kind, description=doc[0] if doc else ""))
    return summaries


def example_config(name: str) -> str | None:
    if name not in SCENARIOS:
        return None
    return serialize_config(SCENARIOS[name]().build())


def validate(text: str) -> ValidationResult:
    try:
        scenario = parse_config(text)
    except CantibecError as e:
        return ValidationResult(valid=False, category=e.category, error=str(e))
    return ValidationResult(valid=True, name=scenario.name, kind=scenario.kind)


def run(text: str) -> RunResult:
    """Parse and run; failures come back as a result, not an exception."""
    try:
        scenario = parse_config(text)
    except CantibecError as e:
        return RunResult(success=False, category=e.category, error=str(e))

    directory = output_root() / scenario.name
    try:
        outcome = run_scenario(scenario, output_dir=directory)
    except CantibecError as e:
        logger.warning(f"run {scenario.name} failed: {e}")
        return RunResult(success=False, name=scenario.name, category=e.category, error=str(e))
    except ValueError as e:
        return RunResult(success=False, name=scenario.name, category="config", error=str(e))
    return RunResult(success=True, name=scenario.name, outputs=outcome.outputs, summary=outcome.summary)
