"""FastAPI app for the marketplace broker.

``POST /accounts``        {name, role, info?} → {account_id, role, n, nodes}
``POST /products``        {seller_id, product} → {product_id}
``GET  /products``        ?query=&tag=&cursor=&limit= → {products, next_cursor}
``GET  /products/{id}``   product entry
``POST /precheck``        {product_ids, computation} → {feasible, required, products, n}
``POST /submit``          ComputationRequest → {responses: [...]}
"""
from __future__ import annotations

from typing import Any, Dict, List, Optional

from fastapi import Body, FastAPI, Query

from tollgate.http import install_error_handlers
from tollgate.marketplace.broker import DEFAULT_PAGE_SIZE, Marketplace


def create_app(marketplace: Marketplace) -> FastAPI:
    app = FastAPI(title="tollgate marketplace")
    install_error_handlers(app)
    app.state.marketplace = marketplace

    @app.post("/accounts")
    def register(body: Dict[str, Any] = Body(...)) -> Dict[str, Any]:
        return marketplace.register_account(
            str(body.get("name", "")), str(body.get("role", "")), body.get("info")
        )

    @app.post("/products")
    def publish(body: Dict[str, Any] = Body(...)) -> Dict[str, str]:
        product_id = marketplace.publish_product(str(body.get("seller_id", "")), body.get("product") or {})
        return {"product_id": product_id}

    @app.get("/products")
    def search(
        query: str = "",
        tag: List[str] = Query(default=[]),
        cursor: Optional[str] = None,
        limit: int = DEFAULT_PAGE_SIZE,
    ) -> Dict[str, Any]:
        return marketplace.search(query, tag, cursor, limit)

    @app.get("/products/{product_id}")
    def product(product_id: str) -> Dict[str, Any]:
        return marketplace.get_product(product_id)

    @app.post("/precheck")
    def precheck(body: Dict[str, Any] = Body(...)) -> Dict[str, Any]:
        return marketplace.precheck(list(body.get("product_ids", [])), body.get("computation") or {})

    @app.post("/submit")
    def submit(body: Dict[str, Any] = Body(...)) -> Dict[str, Any]:
        return {"responses": marketplace.submit(body)}

    return app
