"""Component model: lifecycle state machine, ports, bindings, composites.

Every deployable thing is a component with the four generic lifecycle
actions (install, start, stop, uninstall).  Ordering between components is
never stored here; it is derived from bindings by the planner.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum

from .errors import (
    ActionFailed,
    IllegalTransition,
    InterfaceMismatch,
    PortAlreadyBound,
    UnboundPort,
    UnknownComponent,
)


class LifecycleState(Enum):
    UNINSTALLED = "Uninstalled"
    INSTALLED = "Installed"
    STARTED = "Started"


class LifecycleAction(Enum):
    INSTALL = "Install"
    START = "Start"
    STOP = "Stop"
    UNINSTALL = "Uninstall"


S = LifecycleState
A = LifecycleAction

# The four legal raw transitions of the lifecycle machine.
TRANSITIONS: dict[tuple[LifecycleState, LifecycleAction], LifecycleState] = {
    (S.UNINSTALLED, A.INSTALL): S.INSTALLED,
    (S.INSTALLED, A.START): S.STARTED,
    (S.STARTED, A.STOP): S.INSTALLED,
    (S.INSTALLED, A.UNINSTALL): S.UNINSTALLED,
}

# Shortest action path for every (state, target) pair; never longer than 2.
ENSURE_PATHS: dict[tuple[LifecycleState, LifecycleState], tuple[LifecycleAction, ...]] = {
    (S.UNINSTALLED, S.UNINSTALLED): (),
    (S.UNINSTALLED, S.INSTALLED): (A.INSTALL,),
    (S.UNINSTALLED, S.STARTED): (A.INSTALL, A.START),
    (S.INSTALLED, S.UNINSTALLED): (A.UNINSTALL,),
    (S.INSTALLED, S.INSTALLED): (),
    (S.INSTALLED, S.STARTED): (A.START,),
    (S.STARTED, S.UNINSTALLED): (A.STOP, A.UNINSTALL),
    (S.STARTED, S.INSTALLED): (A.STOP,),
    (S.STARTED, S.STARTED): (),
}


class Behavior:
    """Per-kind lifecycle implementation.  Hooks may raise to abort an action.

    Hooks receive the component and the execution context (transport, clock,
    assembly); pure-model components ignore the context.
    """

    def install(self, component: "Component", ctx=None) -> None:
        pass

    def start(self, component: "Component", ctx=None) -> None:
        pass

    def stop(self, component: "Component", ctx=None) -> None:
        pass

    def uninstall(self, component: "Component", ctx=None) -> None:
        pass

    def hook(self, action: LifecycleAction):
        return getattr(self, action.name.lower())


@dataclass
class PortSpec:
    """A client port: a named requirement on some interface."""

    name: str
    interface: str
    required: bool = True


@dataclass
class Binding:
    """Directed dependency: client's port is served by server's interface."""

    client: str
    port: str
    server: str
    interface: str

    def __str__(self) -> str:
        return f"{self.client}.{self.port} -> {self.server} [{self.interface}]"


@dataclass
class Component:
    """A named deployable unit with lifecycle state and typed ports."""

    id: str
    kind: str
    provides: frozenset[str] = frozenset()
    ports: tuple[PortSpec, ...] = ()
    behavior: Behavior = field(default_factory=Behavior)
    args: dict = field(default_factory=dict)
    owner: str | None = None  # composite this component belongs to, if any
    state: LifecycleState = LifecycleState.UNINSTALLED
    bound: dict[str, Binding] = field(default_factory=dict)

    def port_spec(self, name: str) -> PortSpec | None:
        for p in self.ports:
            if p.name == name:
                return p
        return None

    def unbound_required_ports(self) -> list[str]:
        return [p.name for p in self.ports if p.required and p.name not in self.bound]


@dataclass
class Composite:
    """Hierarchical grouping; children may be shared with other composites."""

    id: str
    kind: str
    children: dict[str, str] = field(default_factory=dict)  # role -> component id
    exports: dict[str, str] = field(default_factory=dict)  # interface -> child id
    provides: frozenset[str] = frozenset()
    ordinal: int | None = None  # position among dynamic-host nodes, if any


@dataclass
class JournalRecord:
    timestamp: str
    component_id: str
    action: LifecycleAction
    ok: bool
    millis: float

    def line(self) -> str:
        outcome = "ok" if self.ok else "fail"
        return f"{self.timestamp} {self.component_id} {self.action.value} {outcome} {self.millis:.3f}"


class Journal:
    """Append-only action log; safe to append from several workers."""

    def __init__(self) -> None:
        self._records: list[JournalRecord] = []
        self._lock = threading.Lock()

    def append(self, record: JournalRecord) -> None:
        with self._lock:
            self._records.append(record)

    def records(self) -> list[JournalRecord]:
        with self._lock:
            return list(self._records)

    def export_lines(self) -> list[str]:
        return [r.line() for r in self.records()]

    def __len__(self) -> int:
        return len(self._records)


def replay(records: list[JournalRecord]) -> dict[str, LifecycleState]:
    """Recompute final states from a journal, starting everything Uninstalled."""
    states: dict[str, LifecycleState] = {}
    for rec in records:
        if not rec.ok:
            continue
        current = states.get(rec.component_id, LifecycleState.UNINSTALLED)
        states[rec.component_id] = TRANSITIONS[(current, rec.action)]
    return states


class Assembly:
    """A set of components, composites and the bindings between them.

    Owns the execution journal.  Lifecycle actions are single-writer per
    component; the caller (normally the runtime executor) guarantees that.
    """

    def __init__(self) -> None:
        self.components: dict[str, Component] = {}
        self.composites: dict[str, Composite] = {}
        self.bindings: list[Binding] = []
        self.journal = Journal()

    # -- construction ----------------------------------------------------

    def add(self, component: Component) -> Component:
        if component.id in self.components or component.id in self.composites:
            raise PortAlreadyBound(f"duplicate id {component.id!r}")
        self.components[component.id] = component
        return component

    def add_composite(self, composite: Composite) -> Composite:
        if composite.id in self.composites or composite.id in self.components:
            raise PortAlreadyBound(f"duplicate id {composite.id!r}")
        self.composites[composite.id] = composite
        return composite

    def provides_of(self, entity_id: str) -> frozenset[str]:
        if entity_id in self.components:
            return self.components[entity_id].provides
        if entity_id in self.composites:
            return self.composites[entity_id].provides
        raise UnknownComponent(entity_id)

    def bind(self, client: tuple[str, str], server: str) -> Binding:
        """Bind a client (component id, port name) to a server entity."""
        client_id, port_name = client
        component = self.components.get(client_id)
        if component is None:
            raise UnknownComponent(client_id)
        if server not in self.components and server not in self.composites:
            raise UnknownComponent(server)
        spec = component.port_spec(port_name)
        if spec is None:
            raise UnknownComponent(f"{client_id} has no port {port_name!r}")
        if port_name in component.bound:
            raise PortAlreadyBound(f"{client_id}.{port_name} is already bound")
        if spec.interface not in self.provides_of(server):
            raise InterfaceMismatch(
                f"{server} does not provide {spec.interface!r} wanted by {client_id}.{port_name}"
            )
        binding = Binding(client_id, port_name, server, spec.interface)
        component.bound[port_name] = binding
        self.bindings.append(binding)
        return binding

    def dependency_graph(self) -> dict[str, set[str]]:
        """client id -> server ids, straight from the bindings."""
        graph: dict[str, set[str]] = {cid: set() for cid in self.components}
        for b in self.bindings:
            graph.setdefault(b.client, set()).add(b.server)
        return graph

    # -- lifecycle -------------------------------------------------------

    def transition(self, component_id: str, action: LifecycleAction, ctx=None) -> LifecycleState:
        """Run one raw lifecycle action.  State is untouched if the hook fails."""
        component = self.components.get(component_id)
        if component is None:
            raise UnknownComponent(component_id)
        key = (component.state, action)
        if key not in TRANSITIONS:
            raise IllegalTransition(component_id, component.state, action)
        missing = component.unbound_required_ports()
        if missing:
            raise UnboundPort(f"{component_id}: required ports unbound: {', '.join(missing)}")
        started = time.monotonic()
        clock = getattr(ctx, "clock", None)
        if clock is not None:
            clock.begin_action()
        try:
            component.behavior.hook(action)(component, ctx)
        except Exception as exc:
            millis = self._action_millis(clock, started)
            self._journal(component_id, action, False, millis)
            raise ActionFailed(component_id, action, exc) from exc
        millis = self._action_millis(clock, started)
        component.state = TRANSITIONS[key]
        self._journal(component_id, action, True, millis)
        return component.state

    def ensure(self, component_id: str, target: LifecycleState, ctx=None) -> list[LifecycleAction]:
        """Drive a component to `target` along the shortest legal path.

        Idempotent: returns [] when already there.  On a hook failure the
        component stays in the last state it actually reached.
        """
        component = self.components.get(component_id)
        if component is None:
            raise UnknownComponent(component_id)
        path = ENSURE_PATHS[(component.state, target)]
        performed: list[LifecycleAction] = []
        for action in path:
            self.transition(component_id, action, ctx)
            performed.append(action)
        return performed

    def ensure_composite(self, composite_id: str, target: LifecycleState, ctx=None) -> list[tuple[str, LifecycleAction]]:
        """Cascade ensure() over a composite's children in dependency order.

        Shared children already at `target` contribute nothing, so driving
        the same child through a second parent is a no-op.
        """
        composite = self.composites.get(composite_id)
        if composite is None:
            raise UnknownComponent(composite_id)
        order = self.child_order(composite_id)
        if target is LifecycleState.UNINSTALLED:
            order = list(reversed(order))
        performed: list[tuple[str, LifecycleAction]] = []
        for child_id in order:
            for action in self.ensure(child_id, target, ctx):
                performed.append((child_id, action))
        return performed

    def child_order(self, composite_id: str) -> list[str]:
        """Children of a composite, topologically sorted by their bindings.

        Declaration order breaks ties.  Only edges between two children of
        this composite count; external dependencies are the planner's job.
        """
        composite = self.composites[composite_id]
        members = [cid for cid in composite.children.values() if cid in self.components]
        member_set = set(members)
        deps: dict[str, set[str]] = {m: set() for m in members}
        for b in self.bindings:
            if b.client in member_set and b.server in member_set:
                deps[b.client].add(b.server)
        order: list[str] = []
        placed: set[str] = set()
        remaining = list(members)
        while remaining:
            ready = [m for m in remaining if deps[m] <= placed]
            if not ready:
                # cycle inside a composite; surface deterministically
                ready = [remaining[0]]
            order.extend(ready)
            placed.update(ready)
            remaining = [m for m in remaining if m not in placed]
        return order

    def composite_state(self, composite_id: str) -> LifecycleState:
        """Derived state: the least-advanced state among the children."""
        composite = self.composites[composite_id]
        rank = {S.UNINSTALLED: 0, S.INSTALLED: 1, S.STARTED: 2}
        states = [
            self.components[cid].state
            for cid in composite.children.values()
            if cid in self.components
        ]
        if not states:
            return LifecycleState.UNINSTALLED
        return min(states, key=lambda s: rank[s])

    def status(self) -> dict[str, LifecycleState]:
        return {cid: c.state for cid, c in self.components.items()}

    # -- internals --------------------------------------------------------

    def _action_millis(self, clock, wall_started: float) -> float:
        if clock is not None:
            return clock.end_action()
        return (time.monotonic() - wall_started) * 1000.0

    def _journal(self, component_id: str, action: LifecycleAction, ok: bool, millis: float) -> None:
        stamp = datetime.now(timezone.utc).isoformat(timespec="milliseconds")
        self.journal.append(JournalRecord(stamp, component_id, action, ok, millis))
