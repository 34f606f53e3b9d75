"""FastAPI application with one POST endpoint per command.

Success and math-level failure both return 200 with a record whose
``pass`` field carries the verdict; usage-level failures return 400 with
a structured failure record.  No endpoint ever leaks a traceback.
"""

from __future__ import annotations

from fastapi import FastAPI
from fastapi.responses import JSONResponse

from ..commands import run_command
from ..reports import TOOL_VERSION, FailureRecord
from .models import (
    ChEvalRequest,
    DualityRequest,
    GammaCheckRequest,
    MEvalRequest,
    ProductEvalRequest,
    QuadCompareRequest,
)


def _respond(command: str, payload: dict) -> JSONResponse:
    record = run_command(command, payload)
    body = record.to_jsonable()
    if isinstance(record, FailureRecord) and record.usage:
        return JSONResponse(status_code=400, content=body)
    return JSONResponse(status_code=200, content=body)


def create_app() -> FastAPI:
    app = FastAPI(title="residua", version=TOOL_VERSION)

    @app.get("/v1/health")
    def health():
        return {"status": "ok", "version": TOOL_VERSION}

    @app.post("/v1/gamma-check")
    def gamma_check(request: GammaCheckRequest):
        return _respond("gamma-check", request.model_dump())

    @app.post("/v1/ch-eval")
    def ch_eval(request: ChEvalRequest):
        return _respond("ch-eval", request.model_dump())

    @app.post("/v1/product-eval")
    def product_eval(request: ProductEvalRequest):
        return _respond("product-eval", request.model_dump())

    @app.post("/v1/m-eval")
    def m_eval(request: MEvalRequest):
        return _respond("m-eval", request.model_dump())

    @app.post("/v1/duality")
    def duality(request: DualityRequest):
        return _respond("duality", request.model_dump())

    @app.post("/v1/quad-compare")
    def quad_compare(request: QuadCompareRequest):
        return _respond("quad-compare", request.model_dump())

    return app
