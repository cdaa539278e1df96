"""FastAPI app for one computation node.

``POST /compute``   ComputationRequest → result or error envelope
``GET  /health``    liveness
``GET  /pubkeys``   ``{"index", "n", "public_key"}``
"""
from __future__ import annotations

from typing import Any, Dict

from fastapi import Body, FastAPI
from fastapi.responses import JSONResponse

from tollgate.http import install_error_handlers
from tollgate.node.runtime import NodeRuntime


def create_app(runtime: NodeRuntime) -> FastAPI:
    app = FastAPI(title=f"tollgate node {runtime.index}")
    install_error_handlers(app)
    app.state.runtime = runtime

    @app.post("/compute")
    def compute(body: Any = Body(...)) -> JSONResponse:
        status, envelope = runtime.handle_request(body)
        return JSONResponse(status_code=status, content=envelope)

    @app.get("/health")
    def health() -> Dict[str, Any]:
        return {"status": "ok", "index": runtime.index}

    @app.get("/pubkeys")
    def pubkeys() -> Dict[str, Any]:
        return runtime.public_info()

    return app
