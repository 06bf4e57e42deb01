"""Plan execution: sequential stages in order, parallel stages on a
bounded worker pool, with per-action and per-stage accounting.

Timing rules under the virtual clock: a sequential stage costs the sum
of its action costs; a parallel stage costs the makespan of greedily
assigning action costs to maxWorkers slots in dispatch order.  Action
costs themselves are pure functions of configuration and seed, so
reports and metrics are reproducible byte for byte.
"""

from __future__ import annotations

import heapq
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .assembly import DeploymentPlan, PlanAction, PlanStage
from .core import ENSURE_PATHS, LifecycleState
from .errors import DeploymentError, StageFailed


@dataclass
class ExecOptions:
    max_workers: int = 8
    dry_run: bool = False
    seed: int | None = None  # shuffles parallel dispatch order when set


@dataclass
class ActionOutcome:
    target: str
    state: LifecycleState
    ok: bool
    millis: float
    error: str | None = None


@dataclass
class StageMetric:
    index: int
    label: str
    mode: str
    actions: int
    wall_ms: float


@dataclass
class ExecutionReport:
    actions: list = field(default_factory=list)  # ActionOutcome
    stages: list = field(default_factory=list)  # StageMetric
    total_ms: float = 0.0
    failure: tuple | None = None  # (component id, message)
    dry_run: bool = False

    def metrics_csv(self) -> str:
        lines = ["stage,mode,actions,wall_ms"]
        for stage in self.stages:
            lines.append(
                f"{stage.label},{stage.mode},{stage.actions},{stage.wall_ms:.3f}"
            )
        return "\n".join(lines) + "\n"


def _ensure(ctx, target: str, state: LifecycleState) -> None:
    if target in ctx.assembly.composites:
        ctx.assembly.ensure_composite(target, state, ctx)
    else:
        ctx.assembly.ensure(target, state, ctx)


def _measured(ctx, action: PlanAction) -> ActionOutcome:
    clock = ctx.clock
    clock.begin_action()
    try:
        _ensure(ctx, action.target, action.state)
    except DeploymentError as exc:
        return ActionOutcome(action.target, action.state, False, clock.end_action(), str(exc))
    return ActionOutcome(action.target, action.state, True, clock.end_action())


def _planned_actions(ctx, action: PlanAction) -> list[str]:
    assembly = ctx.assembly
    targets = (
        [assembly.components[c] for c in assembly.child_order(action.target)]
        if action.target in assembly.composites
        else [assembly.components[action.target]]
    )
    if action.state is LifecycleState.UNINSTALLED:
        targets = list(reversed(targets))
    out = []
    for comp in targets:
        for step in ENSURE_PATHS[(comp.state, action.state)]:
            out.append(f"{comp.id}:{step.name.lower()}")
    return out


class _StageRunner:
    def __init__(self, ctx, options: ExecOptions, report: ExecutionReport):
        self.ctx = ctx
        self.options = options
        self.report = report

    def run(self, index: int, stage: PlanStage) -> None:
        clock = self.ctx.clock
        start = clock.now_ms()
        count = len(stage.prelude) + len(stage.actions) + len(stage.postlude)
        if self.options.dry_run:
            self._dry(stage)
            self.report.stages.append(StageMetric(index, stage.label, stage.mode, count, 0.0))
            return
        failed: ActionOutcome | None = None
        failed = self._sequential(stage.prelude)
        if failed is None:
            if stage.mode == "parallel":
                failed = self._parallel(stage, index)
            else:
                failed = self._sequential(stage.actions)
        if failed is None:
            failed = self._sequential(stage.postlude)
        wall = clock.now_ms() - start
        self.report.stages.append(StageMetric(index, stage.label, stage.mode, count, wall))
        if failed is not None:
            self.report.failure = (failed.target, failed.error or "action failed")
            raise StageFailed(index, failed.target, failed.error, self.report)

    def _dry(self, stage: PlanStage) -> None:
        for action in stage.prelude + stage.actions + stage.postlude:
            for label in _planned_actions(self.ctx, action):
                self.report.actions.append(
                    ActionOutcome(label, action.state, True, 0.0)
                )

    def _sequential(self, actions: tuple) -> ActionOutcome | None:
        clock = self.ctx.clock
        for action in actions:
            outcome = _measured(self.ctx, action)
            clock.advance(outcome.millis)
            self.report.actions.append(outcome)
            if not outcome.ok:
                return outcome
        return None

    def _parallel(self, stage: PlanStage, stage_index: int) -> ActionOutcome | None:
        clock = self.ctx.clock
        order = list(stage.actions)
        if self.options.seed is not None:
            random.Random(f"{self.options.seed}:{stage_index}").shuffle(order)
        outcomes: list[ActionOutcome | None] = [None] * len(order)
        first_failure: ActionOutcome | None = None
        with ThreadPoolExecutor(max_workers=self.options.max_workers) as pool:
            futures = [pool.submit(_measured, self.ctx, action) for action in order]
            for i, future in enumerate(futures):
                if future.cancelled():
                    continue
                outcome = future.result()
                outcomes[i] = outcome
                if not outcome.ok and first_failure is None:
                    first_failure = outcome
                    for later in futures[i + 1 :]:
                        later.cancel()
        executed = [o for o in outcomes if o is not None]
        self.report.actions.extend(executed)
        clock.advance(_makespan((o.millis for o in executed), self.options.max_workers))
        return first_failure


def _makespan(costs, workers: int) -> float:
    """Greedy multi-slot schedule: each cost lands on the earliest-free
    slot, in dispatch order; the wall time is the latest slot."""
    slots = [0.0] * max(1, workers)
    heapq.heapify(slots)
    latest = 0.0
    for cost in costs:
        t = heapq.heappop(slots) + cost
        latest = max(latest, t)
        heapq.heappush(slots, t)
    return latest


def execute(plan: DeploymentPlan, ctx, options: ExecOptions | None = None) -> ExecutionReport:
    """Run every stage of the plan; raises StageFailed on the first broken
    stage with the partial report attached."""
    options = options or ExecOptions()
    report = ExecutionReport(dry_run=options.dry_run)
    clock = ctx.clock
    start = clock.now_ms()
    runner = _StageRunner(ctx, options, report)
    try:
        for index, stage in enumerate(plan.stages):
            runner.run(index, stage)
    finally:
        report.total_ms = clock.now_ms() - start
    return report


def status(assembly) -> dict:
    return assembly.status()
