"""HTTP surface of the experiment service.

POST an experiment config to its endpoint and receive the deterministic
output files plus the pass/fail checks. Validation errors map to 422,
capability limits to 422, and numerical contract violations to 500.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..errors import NumericError, UsageError
from . import handlers, models


def create_app() -> FastAPI:
    app = FastAPI(title="mangrad", version=__version__)

    @app.exception_handler(UsageError)
    async def _usage_error(_request: Request, exc: UsageError):
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.exception_handler(NumericError)
    async def _numeric_error(_request: Request, exc: NumericError):
        return JSONResponse(status_code=500, content={"detail": str(exc)})

    @app.get("/healthz")
    def healthz():
        return {"status": "ok", "version": __version__}

    @app.post("/run/rgd", response_model=models.RunResponse)
    def rgd(req: models.RgdRunRequest):
        return handlers.run_rgd(req)

    @app.post("/run/saddle-hitting", response_model=models.RunResponse)
    def saddle_hitting(req: models.SaddleHittingRequest):
        return handlers.run_saddle_hitting(req)

    @app.post("/run/ou-hitting", response_model=models.RunResponse)
    def ou_hitting(req: models.OuHittingRequest):
        return handlers.run_ou_hitting(req)

    @app.post("/run/design-verify", response_model=models.RunResponse)
    def design_verify(req: models.DesignVerifyRequest):
        return handlers.run_design_verify(req)

    @app.post("/run/stats-check", response_model=models.RunResponse)
    def stats_check(req: models.StatsCheckRequest):
        return handlers.run_stats_check(req)

    return app


app = create_app()
