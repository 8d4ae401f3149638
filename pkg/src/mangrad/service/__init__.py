"""Experiment service: pydantic request/response models, handlers, FastAPI app.

The handlers are plain functions from request models to response models;
the HTTP app and the command-line client are both thin wrappers around
them, so one code path produces the deterministic output files.
"""

from .handlers import (
    run_design_verify,
    run_ou_hitting,
    run_rgd,
    run_saddle_hitting,
    run_stats_check,
)
from .models import (
    DesignVerifyRequest,
    OuHittingRequest,
    RgdRunRequest,
    RunResponse,
    SaddleHittingRequest,
    StatsCheckRequest,
)

__all__ = [
    "run_rgd",
    "run_saddle_hitting",
    "run_ou_hitting",
    "run_design_verify",
    "run_stats_check",
    "RgdRunRequest",
    "SaddleHittingRequest",
    "OuHittingRequest",
    "DesignVerifyRequest",
    "StatsCheckRequest",
    "RunResponse",
]
