"""FastAPI application entry point.

Run with:
    uv run uvicorn api.main:app --reload
"""

from dotenv import load_dotenv
from fastapi import FastAPI

import cantibec
from api.routes import scenarios

load_dotenv()

app = FastAPI(
    title="Cantibec",
    description="Validate and run condensate-cantilever coupling scenarios",
    version=cantibec.__version__,
)

app.include_router(scenarios.router)


@app.get("/")
async def root():
    return {"status": "ok", "message": "Cantibec API", "version": cantibec.__version__}


@app.get("/api/health")
async def health():
    """Health check endpoint."""
    return {"status": "ok"}
