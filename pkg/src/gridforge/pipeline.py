"""End-to-end wiring: configuration files in, executable deployment out.

Bundles the parse -> expand -> generate -> validate -> plan -> instantiate
chain and the transport/clock pairing for each backend.  The loading and
instantiation cost is measured here (overhead), separate from the
effective deployment time the executor reports.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

from . import runtime
from .assembly import (
    AssemblyDescriptor,
    DeploymentPlan,
    generate,
    instantiate,
    plan,
    plan_inverse,
    validate,
)
from .core import Assembly
from .dsl import ExpandedConfig, load_config
from .errors import ValidationFailed
from .personalities import Registry, default_registry
from .simgrid import Fleet, SimClockConfig, VirtualClock, WallClock
from .transports import LocalTransport, SimTransport, SshTransport, Transport


@dataclass
class DeployContext:
    assembly: Assembly
    transport: Transport
    clock: object
    fleet: Fleet | None = None


@dataclass
class Deployment:
    """Everything a caller needs to inspect or run one configuration."""

    config: ExpandedConfig
    descriptor: AssemblyDescriptor
    plan: DeploymentPlan
    ctx: DeployContext
    overhead_ms: float

    @property
    def assembly(self) -> Assembly:
        return self.ctx.assembly

    def execute(self, options: runtime.ExecOptions | None = None) -> runtime.ExecutionReport:
        return runtime.execute(self.plan, self.ctx, options)

    def execute_inverse(self, options: runtime.ExecOptions | None = None) -> runtime.ExecutionReport:
        return runtime.execute(plan_inverse(self.plan), self.ctx, options)


def make_context(
    assembly: Assembly,
    transport: str = "sim",
    fleet: Fleet | None = None,
    sim_config: SimClockConfig | None = None,
    strict: bool = False,
) -> DeployContext:
    if transport == "sim":
        fleet = fleet if fleet is not None else Fleet()
        clock = VirtualClock()
        return DeployContext(assembly, SimTransport(fleet, clock, sim_config, strict), clock, fleet)
    if transport == "local":
        return DeployContext(assembly, LocalTransport(), WallClock())
    if transport == "ssh":
        return DeployContext(assembly, SshTransport(), WallClock())
    raise ValueError(f"unknown transport {transport!r}")


def build(
    paths: list[str],
    transport: str = "sim",
    registry: Registry | None = None,
    fleet: Fleet | None = None,
    sim_config: SimClockConfig | None = None,
    strict: bool = False,
) -> Deployment:
    """Full pipeline; raises ConfigError subclasses on bad input and
    ValidationFailed when the generated descriptor has diagnostics."""
    t0 = time.monotonic()
    registry = registry or default_registry()
    config = load_config(paths)
    descriptor = generate(config, registry)
    diagnostics = validate(descriptor)
    if diagnostics:
        raise ValidationFailed(diagnostics)
    deployment_plan = plan(descriptor)
    live = instantiate(descriptor, registry)
    overhead_ms = (time.monotonic() - t0) * 1000.0
    ctx = make_context(live, transport, fleet, sim_config, strict)
    return Deployment(config, descriptor, deployment_plan, ctx, overhead_ms)


def build_from_text(
    text: str,
    transport: str = "sim",
    registry: Registry | None = None,
    fleet: Fleet | None = None,
    sim_config: SimClockConfig | None = None,
) -> Deployment:
    """Same pipeline for in-memory sources (benchmarks, tests)."""
    import tempfile

    with tempfile.NamedTemporaryFile("w", suffix=".gdf", delete=False) as fh:
        fh.write(text)
        path = fh.name
    try:
        return build([path], transport, registry, fleet, sim_config)
    finally:
        import os

        os.unlink(path)
