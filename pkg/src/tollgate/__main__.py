"""python -m tollgate  –  services, seller / buyer clients and the policy tool.

Commands
--------
serve storage|node|marketplace
    Run one service with uvicorn, using the URLs from deployment.yaml.

seller keys fetch
    Register a seller account and save the node public-key directory.

seller sell
    Share a CSV dataset, seal one package per node, upload and publish it.

buyer enroll
    Create a buyer identity with a test-issuer credential (local setups only).

buyer search
    List catalog entries.

buyer buy
    Request a computation over one or more products and reconstruct it.

tpl check | tpl eval
    Parse and lint a policy; evaluate one offline against fixture registries.

bench
    Interpreter run-time table: policy count × policy size.

demo
    Full seller/buyer round trip on an in-process deployment.

Exit codes: 0 success / granted, 2 usage error, 3 denied, 4 infrastructure error.

Examples
--------
Start node 2 of the configured deployment::

    python -m tollgate --config deployment.yaml serve node --index 2

Sell a dataset under a policy::

    python -m tollgate seller keys fetch --name clinic
    python -m tollgate seller sell --data hr.csv --policy research_seller.tpl --meta meta.json

Buy the mean over two products, bypassing the marketplace fan-out::

    python -m tollgate buyer buy --products prod-a,prod-b --op mean --type machine_learning --direct

Try a policy before publishing it::

    python -m tollgate tpl eval research_seller.tpl --presentation vp.json --num-records 150 --computation machine_learning
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
import tempfile
from pathlib import Path
from typing import Any, Dict, List, Optional
from urllib.parse import urlsplit

import requests

from tollgate.config import DeploymentConfig, load_config
from tollgate.errors import CredentialError, PolicyDenied, PurchaseDenied, TollgateError, TplError
from tollgate.paths import DATA_ROOT_DIR, FIXTURES_DIR

EXIT_USAGE = 2
EXIT_DENIED = 3
EXIT_INFRA = 4

_DEFAULT_ACCOUNT = DATA_ROOT_DIR / "seller.json"
_DEFAULT_CREDENTIALS = DATA_ROOT_DIR / "credentials.json"


# ── helpers ─────────────────────────────────────────────────────────────────

def _config(args: argparse.Namespace) -> DeploymentConfig:
    if args.config is not None:
        return load_config(args.config)
    default = Path("deployment.yaml")
    return load_config(default) if default.exists() else DeploymentConfig()


def _int_list(text: str) -> List[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _csv_list(text: str) -> List[str]:
    return [part.strip() for part in text.split(",") if part.strip()]


def _serve(app: Any, url: str, host: str, port: Optional[int]) -> None:
    import uvicorn

    port = port or urlsplit(url).port or 8000
    print(f"▶ serving {url} on {host}:{port}")
    uvicorn.run(app, host=host, port=port, log_level="info")


# ── sub-command handlers ─────────────────────────────────────────────────────

def _cmd_serve(args: argparse.Namespace) -> None:
    from tollgate.transport import http_session

    cfg = _config(args)
    if args.service == "storage":
        from tollgate.storage.blobs import BlobStore
        from tollgate.storage.registries import RegistryState
        from tollgate.storage.service import create_app

        store = BlobStore(Path(cfg.storage.root), max_bytes=cfg.storage.max_bytes)
        app = create_app(store, RegistryState.from_fixtures(Path(cfg.storage.fixtures)), base_url=cfg.storage.url)
        _serve(app, cfg.storage.url, args.host, args.port)
    elif args.service == "node":
        from tollgate.node.runtime import NodeRuntime
        from tollgate.node.service import create_app

        if args.index is None:
            sys.exit("serve node needs --index")
        node = cfg.node(args.index)
        runtime = NodeRuntime.from_config(cfg, node, session=http_session())
        _serve(create_app(runtime), node.url, args.host, args.port)
    else:
        from tollgate.marketplace.broker import Marketplace
        from tollgate.marketplace.service import create_app
        from tollgate.marketplace.store import KeyValueStore

        marketplace = Marketplace(
            KeyValueStore.at_path(Path(cfg.marketplace.database)),
            {node.index: node.url for node in cfg.nodes},
            session=http_session(),
            fanout_timeout=cfg.marketplace.fanout_timeout_sec,
        )
        _serve(create_app(marketplace), cfg.marketplace.url, args.host, args.port)


def _cmd_seller_keys(args: argparse.Namespace) -> None:
    from tollgate.client.seller import register_seller
    from tollgate.transport import http_session

    cfg = _config(args)
    account = register_seller(http_session(), cfg.marketplace.url.rstrip("/"), args.name)
    account.save(args.account)
    print(f"✓ seller {account.account_id}: {account.n} node keys saved to {args.account}")


def _cmd_seller_sell(args: argparse.Namespace) -> None:
    from tollgate.client.seller import SellerAccount, SellerBundle, read_records, sell
    from tollgate.transport import http_session

    cfg = _config(args)
    account = SellerAccount.load(args.account)
    metadata: Dict[str, Any] = {}
    if args.meta is not None:
        metadata = json.loads(args.meta.read_text(encoding="utf-8"))
    bundle = SellerBundle(
        records=read_records(args.data, scale=args.scale),
        policy_source=args.policy.read_text(encoding="utf-8"),
        metadata=metadata,
    )
    product_id = sell(
        bundle,
        account,
        http_session(),
        cfg.marketplace.url.rstrip("/"),
        cfg.storage.url.rstrip("/"),
        product_id=args.product_id,
    )
    print(f"✓ listed {product_id} ({len(bundle.records)} records)")


def _cmd_buyer_enroll(args: argparse.Namespace) -> None:
    from tollgate.credentials.issuer import BuyerIdentity, CredentialStore, TestIssuer
    from tollgate.http import raise_for_envelope
    from tollgate.transport import http_session

    cfg = _config(args)
    session = http_session()
    storage = cfg.storage.url.rstrip("/")
    issuer = TestIssuer.create(args.issuer)
    raise_for_envelope(session.post(f"{storage}/admin/did", json=issuer.did_document()))
    raise_for_envelope(session.post(f"{storage}/admin/qualify", json={"issuer": issuer.did}))

    identity = BuyerIdentity.create(args.did)
    main = issuer.issue(identity, json.loads(args.claims))
    store = CredentialStore(identity=identity, main_id=main.id, credentials=[main])
    store.save(args.credentials)
    print(f"✓ {identity.did} holds {main.id} from {issuer.did}; saved to {args.credentials}")


def _cmd_buyer_search(args: argparse.Namespace) -> None:
    from tollgate.client.buyer import search
    from tollgate.transport import http_session

    cfg = _config(args)
    products = search(http_session(), cfg.marketplace.url.rstrip("/"), args.query or "", args.tag or [])
    for p in products:
        tags = ",".join(p.get("tags", []))
        print(f"{p['product_id']:<24} {p['record_count']:>8}  {p['title']}  [{tags}]")
    print(f"{len(products)} product(s)")


def _cmd_buyer_buy(args: argparse.Namespace) -> int:
    from tollgate.client.buyer import buy
    from tollgate.credentials.issuer import CredentialStore
    from tollgate.node.models import Computation
    from tollgate.transport import http_session

    cfg = _config(args)
    store = CredentialStore.load(args.credentials)
    weights = tuple(args.weights) if args.weights is not None else None
    computation = Computation(type=args.type, op=args.op, weights=weights)
    direct = {node.index: node.url for node in cfg.nodes} if args.direct else None
    try:
        result = buy(
            http_session(),
            cfg.marketplace.url.rstrip("/"),
            args.products,
            computation,
            store,
            direct_node_urls=direct,
            scale=args.scale,
        )
    except PurchaseDenied as exc:
        print(f"✗ {exc.message}")
        for d in exc.decisions:
            mark = "✓" if d.verdict == "granted" else "✗"
            print(f"  {mark} node {d.node_index}: {d.verdict} {d.code or ''}".rstrip())
            for line in d.trace[-5:]:
                print(f"      {line}")
        return EXIT_DENIED
    print(f"✓ {computation.op} = {result.value}  (request {result.request_id})")
    return 0


def _cmd_tpl_check(args: argparse.Namespace) -> int:
    from tollgate.client.tpl_tool import check_policy

    failed = False
    for path in args.files:
        if not path.exists():
            sys.exit(f"Policy file not found: {path}")
        report = check_policy(path, pretty=args.print)
        if report.ok:
            print(f"✓ {path}  (entry point {report.entry_point})")
        else:
            failed = True
            for err in report.errors:
                print(f"✗ {path}: {err}")
        for warning in report.warnings:
            print(f"  warning: {warning}")
        if report.printed is not None:
            print(report.printed)
    return EXIT_USAGE if failed else 0


def _cmd_tpl_eval(args: argparse.Namespace) -> int:
    from tollgate.client.tpl_tool import eval_policy

    result = eval_policy(
        args.file,
        args.presentation,
        args.num_records,
        args.computation,
        fixtures_dir=args.fixtures,
        query=args.query,
    )
    if args.trace:
        for event in result.trace.events:
            print(event)
        if result.trace.truncated:
            print("… (trace truncated)")
    if result.granted:
        print(f"✓ granted ({result.trace.steps} steps)")
        return 0
    print(f"✗ denied at {result.trace.failed_goal} ({result.trace.steps} steps)")
    return EXIT_DENIED


def _cmd_bench(args: argparse.Namespace) -> None:
    from tollgate.tpl.bench import format_table, run_benchmark, scaling_ratios

    rows = run_benchmark(args.policies, args.predicates, repeats=args.repeats)
    print(format_table(rows))
    for name, ratio in scaling_ratios(rows).items():
        print(f"{name} ratio: {ratio:.1f}×")


def _cmd_demo(args: argparse.Namespace) -> int:
    from tollgate.demo import run_demo

    root = args.root or Path(tempfile.mkdtemp(prefix="tollgate-demo-"))
    outcomes = run_demo(root, n=args.nodes, records=args.records, seed=args.seed)
    ok = True
    for o in outcomes:
        if o.granted:
            mark = "✓" if o.correct else "✗"
            print(f"{mark} {o.buyer} {o.op}/{o.computation_type}: {o.value} (plaintext {o.expected})")
        else:
            print(f"✗ {o.buyer} {o.op}/{o.computation_type}: denied ({o.denial})")
        ok = ok and o.correct
    return 0 if ok else 1


# ── argument parser ──────────────────────────────────────────────────────────

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="python -m tollgate",
        description="Policy-gated private data marketplace.",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--config", type=Path, default=None, help="deployment.yaml (default: ./deployment.yaml if present)")
    parser.add_argument("--verbose", "-v", action="store_true", help="Debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    # ── serve ────────────────────────────────────────────────────────────────
    p_serve = sub.add_parser("serve", help="Run a service")
    p_serve.add_argument("service", choices=["storage", "node", "marketplace"])
    p_serve.add_argument("--index", type=int, default=None, help="Node index (serve node)")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=None, help="Default: port of the configured URL")
    p_serve.set_defaults(func=_cmd_serve)

    # ── seller ───────────────────────────────────────────────────────────────
    p_seller = sub.add_parser("seller", help="Seller client")
    seller_sub = p_seller.add_subparsers(dest="seller_command", required=True)

    p_keys = seller_sub.add_parser("keys", help="Node key directory")
    keys_sub = p_keys.add_subparsers(dest="keys_command", required=True)
    p_fetch = keys_sub.add_parser("fetch", help="Register a seller account and fetch node keys")
    p_fetch.add_argument("--name", required=True, help="Seller account name")
    p_fetch.add_argument("--account", type=Path, default=_DEFAULT_ACCOUNT)
    p_fetch.set_defaults(func=_cmd_seller_keys)

    p_sell = seller_sub.add_parser("sell", help="Share, upload and publish a dataset")
    p_sell.add_argument("--data", type=Path, required=True, help="Single-column CSV")
    p_sell.add_argument("--policy", type=Path, required=True, help="Policy .tpl file")
    p_sell.add_argument("--meta", type=Path, default=None, help="JSON with title/description/tags")
    p_sell.add_argument("--scale", type=int, default=1, help="Fixed-point scale applied before sharing")
    p_sell.add_argument("--product-id", default=None)
    p_sell.add_argument("--account", type=Path, default=_DEFAULT_ACCOUNT)
    p_sell.set_defaults(func=_cmd_seller_sell)

    # ── buyer ────────────────────────────────────────────────────────────────
    p_buyer = sub.add_parser("buyer", help="Buyer client")
    buyer_sub = p_buyer.add_subparsers(dest="buyer_command", required=True)

    p_enroll = buyer_sub.add_parser("enroll", help="Create an identity with a test-issuer credential")
    p_enroll.add_argument("--did", required=True)
    p_enroll.add_argument("--issuer", default="did:ex:uni-registry")
    p_enroll.add_argument("--claims", default='{"organization_type": "public_university"}', help="JSON object")
    p_enroll.add_argument("--credentials", type=Path, default=_DEFAULT_CREDENTIALS)
    p_enroll.set_defaults(func=_cmd_buyer_enroll)

    p_search = buyer_sub.add_parser("search", help="Search the catalog")
    p_search.add_argument("query", nargs="?", default="")
    p_search.add_argument("--tag", action="append", default=None)
    p_search.set_defaults(func=_cmd_buyer_search)

    p_buy = buyer_sub.add_parser("buy", help="Request a computation")
    p_buy.add_argument("--products", type=_csv_list, required=True, help="Comma-separated product ids")
    p_buy.add_argument("--op", choices=["sum", "count", "mean", "dot"], required=True)
    p_buy.add_argument("--type", default="simple_statistics", help="Computation type atom")
    p_buy.add_argument("--weights", type=_int_list, default=None, help="Comma-separated integers (dot)")
    p_buy.add_argument("--credentials", type=Path, default=_DEFAULT_CREDENTIALS)
    p_buy.add_argument("--direct", action="store_true", help="Post to the nodes directly")
    p_buy.add_argument("--scale", type=int, default=1, help="Fixed-point scale the seller used")
    p_buy.set_defaults(func=_cmd_buyer_buy)

    # ── tpl ──────────────────────────────────────────────────────────────────
    p_tpl = sub.add_parser("tpl", help="Policy developer tool")
    tpl_sub = p_tpl.add_subparsers(dest="tpl_command", required=True)

    p_check = tpl_sub.add_parser("check", help="Parse and lint policies")
    p_check.add_argument("files", type=Path, nargs="+")
    p_check.add_argument("--print", action="store_true", help="Pretty-print the parsed policy")
    p_check.set_defaults(func=_cmd_tpl_check)

    p_eval = tpl_sub.add_parser("eval", help="Evaluate a policy offline")
    p_eval.add_argument("file", type=Path)
    p_eval.add_argument("--presentation", type=Path, default=None, help="Presentation JSON")
    p_eval.add_argument("--num-records", type=int, default=0)
    p_eval.add_argument("--computation", default="simple_statistics")
    p_eval.add_argument("--query", default=None, help="Goal to run instead of accept/3")
    p_eval.add_argument("--fixtures", type=Path, default=FIXTURES_DIR, help="Registry fixture directory")
    p_eval.add_argument("--trace", action="store_true", help="Print the goal trace")
    p_eval.set_defaults(func=_cmd_tpl_eval)

    # ── bench ────────────────────────────────────────────────────────────────
    p_bench = sub.add_parser("bench", help="Interpreter benchmark")
    p_bench.add_argument("--policies", type=_int_list, default=[1, 100])
    p_bench.add_argument("--predicates", type=_int_list, default=[3, 20, 100])
    p_bench.add_argument("--repeats", type=int, default=20)
    p_bench.set_defaults(func=_cmd_bench)

    # ── demo ─────────────────────────────────────────────────────────────────
    p_demo = sub.add_parser("demo", help="End-to-end run on in-process services")
    p_demo.add_argument("--root", type=Path, default=None, help="State directory (default: a temp dir)")
    p_demo.add_argument("--nodes", type=int, default=3)
    p_demo.add_argument("--records", type=int, default=150)
    p_demo.add_argument("--seed", type=int, default=7)
    p_demo.set_defaults(func=_cmd_demo)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s: %(message)s",
    )

    try:
        code = args.func(args)
    except (PurchaseDenied, PolicyDenied, CredentialError) as exc:
        print(f"✗ denied: {exc.message}", file=sys.stderr)
        return EXIT_DENIED
    except TplError as exc:
        print(f"✗ {exc.code}: {exc.message}", file=sys.stderr)
        return EXIT_USAGE
    except (TollgateError, requests.RequestException) as exc:
        print(f"✗ {exc}", file=sys.stderr)
        return EXIT_INFRA
    except (FileNotFoundError, ValueError, KeyError) as exc:
        print(f"✗ {exc}", file=sys.stderr)
        return EXIT_USAGE
    return code or 0


if __name__ == "__main__":
    sys.exit(main())
