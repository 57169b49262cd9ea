"""Pydantic models for API requests and responses."""

from pydantic import BaseModel, Field


class ConfigRequest(BaseModel):
    """Request body carrying scenario config text."""
    config: str = Field(min_length=1)


class ValidationResult(BaseModel):
    """Outcome of parsing a config."""
    valid: bool
    name: str | None = None
    kind: str | None = None
    category: str | None = None
    error: str | None = None


class RunResult(BaseModel):
    """Outcome of running a scenario."""
    success: bool
    name: str | None = None
    category: str | None = None
    error: str | None = None
    outputs: list[str] = Field(default_factory=list)
    summary: dict[str, str] = Field(default_factory=dict)


class ExampleSummary(BaseModel):
    """Registry entry for list views."""
    name: str
    kind: str
    description: str
