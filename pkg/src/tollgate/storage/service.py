"""Mock public cloud: blob store plus trust / revocation / DID registries.

Routes
------
``PUT  /blobs``             raw body → ``{"id", "url"}``
``GET  /blobs/{id}``        raw bytes, verified against the id
``GET  /trustlist/eidas``   qualified-issuer trust list
``GET  /revocation``        ``{"revoked": [...]}``
``POST /admin/revoke``      ``{"id": "<credential id>"}``
``POST /admin/did``         register a DID document
``POST /admin/qualify``     ``{"issuer": "<did>"}``
``GET  /did/{id}``          DID document or 404
"""
from __future__ import annotations

import logging
from typing import Any, Dict, Optional

from fastapi import Body, FastAPI, Request
from fastapi.responses import JSONResponse, Response

from tollgate.errors import UnknownIdentifier
from tollgate.http import error_envelope, install_error_handlers
from tollgate.storage.blobs import BlobStore
from tollgate.storage.registries import RegistryState

logger = logging.getLogger(__name__)


def create_app(
    store: BlobStore,
    registries: Optional[RegistryState] = None,
    base_url: str = "http://storage",
) -> FastAPI:
    registries = registries or RegistryState.from_fixtures()
    base_url = base_url.rstrip("/")
    app = FastAPI(title="tollgate storage")
    install_error_handlers(app)
    app.state.store = store
    app.state.registries = registries

    @app.put("/blobs")
    async def put_blob(request: Request) -> Dict[str, str]:
        content = await request.body()
        blob_id = store.put(content)
        logger.info("stored blob %s (%d bytes)", blob_id[:12], len(content))
        return {"id": blob_id, "url": f"{base_url}/blobs/{blob_id}"}

    @app.get("/blobs/{blob_id}")
    def get_blob(blob_id: str) -> Response:
        return Response(content=store.get(blob_id), media_type="application/octet-stream")

    @app.get("/trustlist/eidas")
    def trustlist() -> Dict[str, Any]:
        return registries.trustlist_document()

    @app.get("/revocation")
    def revocation() -> Dict[str, Any]:
        return registries.revocation_document()

    @app.post("/admin/revoke")
    def revoke(body: Dict[str, Any] = Body(...)) -> Dict[str, Any]:
        credential_id = str(body.get("id", ""))
        registries.revoke(credential_id)
        return {"revoked": credential_id}

    @app.post("/admin/did")
    def register_did(body: Dict[str, Any] = Body(...)) -> Dict[str, Any]:
        return {"id": registries.register_did(body)}

    @app.post("/admin/qualify")
    def qualify(body: Dict[str, Any] = Body(...)) -> Dict[str, Any]:
        issuer = str(body.get("issuer", ""))
        registries.qualify(issuer)
        return {"qualified": issuer}

    @app.get("/did/{did:path}")
    def resolve(did: str) -> Any:
        try:
            return registries.resolve(did)
        except UnknownIdentifier as exc:
            return JSONResponse(status_code=404, content=error_envelope(exc))

    return app
