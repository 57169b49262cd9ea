"""Scenario validation and run endpoints."""

from fastapi import APIRouter, HTTPException
from fastapi.responses import PlainTextResponse

from api.models import ConfigRequest, ExampleSummary, RunResult, ValidationResult
from api.services import scenario_service

router = APIRouter(prefix="/api/scenarios", tags=["scenarios"])


@router.get("/schema", response_class=PlainTextResponse)
async def schema():
    """Every config key with its default and constraint."""
    return scenario_service.schema()


@router.get("/examples", response_model=list[ExampleSummary])
async def list_examples():
    """List the shipped example scenarios."""
    return scenario_service.list_examples()


@router.get("/examples/{name}", response_class=PlainTextResponse)
async def get_example(name: str):
    """Serialized config of one example."""
    config = scenario_service.example_config(name)
    if config is None:
        raise HTTPException(status_code=404, detail="Scenario not found")
    return config


@router.post("/validate", response_model=ValidationResult)
async def validate(data: ConfigRequest):
    """Parse a config without running it."""
    return scenario_service.validate(data.config)


@router.post("/run", response_model=RunResult)
def run(data: ConfigRequest):
    """Run a config; files go under CANTIBEC_OUTPUT_DIR/<name>/."""
    result = scenario_service.run(data.config)
    if not result.success and result.category == "config":
        raise HTTPException(status_code=400, detail=result.error)
    return result
