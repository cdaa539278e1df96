"""Centralised path constants for tollgate.

Runtime state (blob store, marketplace database, key files) lives under
DATA_ROOT_DIR so that the working directory of the process does not matter.

Override at runtime via the environment variable TOLLGATE_DATA_DIR:
    export TOLLGATE_DATA_DIR=/var/lib/tollgate
"""
from __future__ import annotations

import os
from pathlib import Path

# ── Root ───────────────────────────────────────────────────────────────────
DATA_ROOT_DIR: Path = Path(os.environ.get("TOLLGATE_DATA_DIR", Path.home() / ".tollgate"))

# ── Convenience sub-paths ──────────────────────────────────────────────────
BLOB_DIR: Path = DATA_ROOT_DIR / "blobs"
KEYS_DIR: Path = DATA_ROOT_DIR / "keys"
MARKETPLACE_DB: Path = DATA_ROOT_DIR / "marketplace.db"

# ── Bundled package data ───────────────────────────────────────────────────
PACKAGE_DIR: Path = Path(__file__).resolve().parent
FORMATS_JSON: Path = PACKAGE_DIR / "tpl" / "formats.json"
POLICY_CORPUS_DIR: Path = PACKAGE_DIR / "tpl" / "corpus"
FIXTURES_DIR: Path = PACKAGE_DIR / "storage" / "fixtures"
