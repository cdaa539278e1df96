"""Minimal request pipeline for computation nodes.

Usage::

    from tollgate.node.pipeline import Pipeline, RequestContext
    from tollgate.node.steps import default_steps

    ctx = RequestContext(request=request, runtime=runtime)
    Pipeline(default_steps()).run(ctx)
    envelope = ctx.ciphertext
"""
from __future__ import annotations

import abc
import logging
import time
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any, Dict, List, Optional

from tollgate.node.models import ComputationRequest, DataPackage
from tollgate.tpl.engine import EvaluationContext, EvaluationTrace
from tollgate.tpl.terms import Policy

if TYPE_CHECKING:
    from tollgate.credentials.model import Presentation
    from tollgate.node.runtime import NodeRuntime

logger = logging.getLogger(__name__)


@dataclass
class StepTrace:
    name: str
    status: str  # "ran" | "failed"
    elapsed_sec: float = 0.0
    error: Optional[str] = None


@dataclass
class RequestContext:
    """State carried through one request.

    Steps fill the fields in order; a field is only valid once the step
    that produces it has run.
    """

    request: ComputationRequest
    runtime: "NodeRuntime"
    packages: List[DataPackage] = field(default_factory=list)
    presentation: Optional["Presentation"] = None
    aggregate: Optional[Policy] = None
    evaluation: EvaluationContext = field(default_factory=EvaluationContext)
    policy_trace: EvaluationTrace = field(default_factory=EvaluationTrace)
    result: Optional[Dict[str, Any]] = None
    ciphertext: Optional[Dict[str, str]] = None
    steps: List[StepTrace] = field(default_factory=list)

    @property
    def total_records(self) -> int:
        return sum(p.record_count for p in self.packages)


class BaseStep(abc.ABC):
    @property
    @abc.abstractmethod
    def step_name(self) -> str:
        ...

    @abc.abstractmethod
    def run(self, ctx: RequestContext) -> RequestContext:
        ...


class Pipeline:
    """Runs steps in order; the first exception aborts the request."""

    def __init__(self, steps: List[BaseStep]) -> None:
        self._steps = list(steps)

    @property
    def names(self) -> List[str]:
        return [s.step_name for s in self._steps]

    def run(self, ctx: RequestContext) -> RequestContext:
        for step in self._steps:
            t0 = time.perf_counter()
            try:
                ctx = step.run(ctx)
            except Exception as exc:
                ctx.steps.append(
                    StepTrace(step.step_name, "failed", time.perf_counter() - t0, type(exc).__name__)
                )
                logger.debug("step %s failed: %s", step.step_name, exc)
                raise
            ctx.steps.append(StepTrace(step.step_name, "ran", time.perf_counter() - t0))
        return ctx
