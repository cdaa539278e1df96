"""The node's request-handling steps, in the order they must run."""
from __future__ import annotations

import hashlib
import json
import logging
from typing import List

import requests

from tollgate.canonical import canonical_bytes
from tollgate.credentials.model import Presentation
from tollgate.credentials.verify import resolver_key_lookup, same_subject, verify_presentation
from tollgate.crypto.suite import SealedPackage, encrypt_result, hash_policy, open_from_seller
from tollgate.errors import (
    DecryptionFailure,
    LengthMismatch,
    PackageDecryptFailure,
    PolicyDenied,
    PolicyHashMismatch,
    PresentationInvalid,
    StorageUnreachable,
    UnsupportedComputation,
)
from tollgate.node.models import OPERATIONS, DataPackage
from tollgate.node.pipeline import BaseStep, RequestContext
from tollgate.sharing.shamir import constant_share, local_dot, local_sum
from tollgate.tpl.aggregate import aggregate_policies
from tollgate.tpl.engine import Program, solve
from tollgate.tpl.parser import parse_policy
from tollgate.tpl.terms import Atom, Compound, Integer

logger = logging.getLogger(__name__)


class FetchPackagesStep(BaseStep):
    """Download this node's sealed package for every product and open it."""

    step_name = "fetch_packages"

    def _download(self, ctx: RequestContext, url: str) -> bytes:
        runtime = ctx.runtime
        if not any(url.startswith(prefix) for prefix in runtime.storage_allow):
            raise StorageUnreachable(f"{url} is not on the storage allow-list", url=url)
        try:
            resp = runtime.session.get(url, timeout=runtime.fetch_timeout)
        except requests.RequestException as exc:
            raise StorageUnreachable(f"cannot fetch {url}: {exc}", url=url) from None
        if resp.status_code != 200:
            raise StorageUnreachable(f"{url} answered HTTP {resp.status_code}", url=url)
        content = resp.content
        blob_id = url.rstrip("/").rsplit("/", 1)[-1]
        if hashlib.sha256(content).hexdigest() != blob_id.removeprefix("sha256-"):
            raise StorageUnreachable(f"{url} returned content that does not match its id", url=url)
        return content

    def run(self, ctx: RequestContext) -> RequestContext:
        index = ctx.runtime.index
        for ref in ctx.request.products:
            url = ref.package_urls.get(index)
            if url is None:
                raise StorageUnreachable(f"product {ref.product_id} lists no package for node {index}")
            content = self._download(ctx, url)
            try:
                sealed = SealedPackage.from_dict(json.loads(content.decode("utf-8")))
                if sealed.recipient != index or sealed.associated_data != ref.product_id:
                    raise DecryptionFailure("package is addressed to another node or product")
                package = DataPackage.from_bytes(open_from_seller(sealed, ctx.runtime.keys.secret))
            except (DecryptionFailure, ValueError) as exc:
                raise PackageDecryptFailure(
                    f"cannot open package of {ref.product_id}: {exc}",
                    product_id=ref.product_id,
                ) from None
            if package.product_id != ref.product_id or any(s.x != index for s in package.records):
                raise PackageDecryptFailure(
                    f"package content does not belong to {ref.product_id} at node {index}",
                    product_id=ref.product_id,
                )
            ctx.packages.append(package)
        return ctx


class PolicyHashStep(BaseStep):
    step_name = "policy_hash"

    def run(self, ctx: RequestContext) -> RequestContext:
        for ref, package in zip(ctx.request.products, ctx.packages):
            if hash_policy(ref.policy) != package.policy_hash:
                raise PolicyHashMismatch(
                    f"policy sent for {ref.product_id} is not the policy bound to its data",
                    product_id=ref.product_id,
                )
        return ctx


class VerifyPresentationStep(BaseStep):
    step_name = "verify_presentation"

    def run(self, ctx: RequestContext) -> RequestContext:
        try:
            presentation = Presentation.from_dict(ctx.request.presentation or {})
        except ValueError as exc:
            raise PresentationInvalid(str(exc)) from None
        verify_presentation(
            presentation,
            ctx.request.digest(),
            resolver_key_lookup(ctx.runtime.trust),
        )
        ctx.presentation = presentation
        return ctx


class SameSubjectStep(BaseStep):
    step_name = "same_subject"

    def run(self, ctx: RequestContext) -> RequestContext:
        same_subject(ctx.presentation)
        return ctx


class AggregatePoliciesStep(BaseStep):
    """Conjoin every product policy, plus the node's operator policy if any."""

    step_name = "aggregate_policies"

    def run(self, ctx: RequestContext) -> RequestContext:
        members = [
            parse_policy(ref.policy, id=ref.product_id)
            for ref in sorted(ctx.request.products, key=lambda r: r.product_id)
        ]
        if ctx.runtime.operator_policy is not None:
            members.append(ctx.runtime.operator_policy)
        ctx.aggregate = aggregate_policies(members, id=f"request-{ctx.request.request_id}")
        return ctx


class EvaluatePolicyStep(BaseStep):
    step_name = "evaluate_policy"

    def run(self, ctx: RequestContext) -> RequestContext:
        handle = ctx.evaluation.handles.register(ctx.presentation.to_dict())
        query = Compound(
            "accept",
            (handle, Integer(ctx.total_records), Atom(ctx.request.computation.type)),
        )
        answer = solve(
            Program([ctx.aggregate]),
            query,
            ctx.runtime.registry,
            ctx.runtime.budget,
            context=ctx.evaluation,
            trace=ctx.policy_trace,
        )
        if answer is None:
            raise PolicyDenied(
                f"aggregated policy rejects the request (failed at {ctx.policy_trace.failed_goal})",
                trace=ctx.policy_trace.events,
                failed_goal=ctx.policy_trace.failed_goal,
            )
        return ctx


class ComputeStep(BaseStep):
    """Share-local linear computation over all records of all packages."""

    step_name = "compute"

    def run(self, ctx: RequestContext) -> RequestContext:
        computation = ctx.request.computation
        runtime = ctx.runtime
        params = runtime.params
        if computation.op not in OPERATIONS:
            raise UnsupportedComputation(f"operation {computation.op!r} is not supported", op=computation.op)
        values = [s.y for p in ctx.packages for s in p.records]
        total = len(values)

        if computation.op == "sum":
            y = local_sum(values, params, runtime.value_bound)
        elif computation.op == "mean":
            y = local_sum(values, params, runtime.value_bound)
        elif computation.op == "count":
            y = constant_share(total, params)
        else:
            if computation.weights is None:
                raise LengthMismatch("dot product needs public weights", records=total, weights=0)
            y = local_dot(values, computation.weights, params, runtime.value_bound)

        ctx.result = {"op": computation.op, "x": runtime.index, "y": str(y), "count": total}
        return ctx


class EncryptResultStep(BaseStep):
    """Encrypt the result share under the main credential's encryption key."""

    step_name = "encrypt_result"

    def run(self, ctx: RequestContext) -> RequestContext:
        key = ctx.presentation.main_credential.encryption_key
        try:
            ctx.ciphertext = encrypt_result(canonical_bytes(ctx.result), key, ctx.request.request_id)
        except ValueError as exc:
            raise PresentationInvalid(f"main credential carries an unusable encryption key: {exc}") from None
        return ctx


def default_steps() -> List[BaseStep]:
    return [
        FetchPackagesStep(),
        PolicyHashStep(),
        VerifyPresentationStep(),
        SameSubjectStep(),
        AggregatePoliciesStep(),
        EvaluatePolicyStep(),
        ComputeStep(),
        EncryptResultStep(),
    ]
