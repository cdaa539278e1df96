"""JSON error envelopes shared by every service and client.

Services call :func:`install_error_handlers` on their FastAPI app; clients
call :func:`raise_for_envelope` on responses to turn an error envelope back
into the matching :class:`~tollgate.errors.TollgateError` subclass.
"""
from __future__ import annotations

import logging
from typing import Any, Dict, Mapping

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from tollgate.errors import TollgateError, error_class_for

logger = logging.getLogger(__name__)

INTERNAL_ERROR = "internal_error"


def error_envelope(exc: TollgateError) -> Dict[str, Any]:
    return {"error": exc.to_dict()}


def install_error_handlers(app: FastAPI) -> None:
    @app.exception_handler(TollgateError)
    async def _domain_error(request: Request, exc: TollgateError) -> JSONResponse:
        logger.info("%s %s → %s (%s)", request.method, request.url.path, exc.code, exc.message)
        return JSONResponse(status_code=exc.status, content=error_envelope(exc))

    @app.exception_handler(Exception)
    async def _unexpected(request: Request, exc: Exception) -> JSONResponse:
        logger.exception("unhandled error on %s %s", request.method, request.url.path)
        return JSONResponse(
            status_code=500,
            content={"error": {"code": INTERNAL_ERROR, "message": type(exc).__name__}},
        )


def error_from_envelope(body: Mapping[str, Any]) -> TollgateError:
    """Rebuild a domain error from ``{"error": {"code", "message", ...}}``."""
    raw = dict(body.get("error") or {})
    code = str(raw.pop("code", INTERNAL_ERROR))
    message = str(raw.pop("message", code))
    cls = error_class_for(code)
    exc = cls.__new__(cls)
    TollgateError.__init__(exc, message, **raw)
    for key, value in raw.items():
        setattr(exc, key, value)
    if cls is TollgateError:
        exc.code = code
    return exc


def raise_for_envelope(resp: Any) -> Any:
    """Return ``resp.json()`` or raise the error the envelope describes."""
    try:
        body = resp.json()
    except ValueError:
        body = None
    if resp.status_code >= 400:
        if isinstance(body, Mapping) and "error" in body:
            raise error_from_envelope(body)
        raise TollgateError(f"HTTP {resp.status_code}", status=resp.status_code)
    return body
