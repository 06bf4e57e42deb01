"""Descriptor generation, validation, and deployment planning.

generate() compiles an expanded configuration against the kind registry
into a flat descriptor: every component instance, every binding, every
composite.  validate() returns diagnostics instead of raising so callers
can show all problems at once.  plan() turns the binding graph into
ordered stages; bindings are the only source of ordering constraints,
declaration order is the only tie-break.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import core
from .core import LifecycleState, PortSpec
from .dsl import Block, Ctor, Entry, ExpandedConfig, Ref
from .errors import (
    ArityMismatch,
    ConfigError,
    CyclicDependency,
    DanglingNodeRef,
    UnknownKind,
)
from .personalities import Registry
from .stdlib import HOSTNAME, NODE, NODELIST, KindSpec

SERVICE_BLOCKS = frozenset({"services"})
BARRIER_ROLE = "ready"


@dataclass
class DescriptorComponent:
    id: str
    kind: str
    args: dict
    provides: frozenset
    ports: tuple
    owner: str | None = None


@dataclass(frozen=True)
class DescriptorBinding:
    client: str
    port: str
    server: str
    interface: str


@dataclass
class DescriptorComposite:
    id: str
    kind: str
    children: dict  # role -> component id (owned children only)
    exports: dict  # interface -> component id
    ordinal: int = 0


@dataclass(frozen=True)
class ServiceEntry:
    id: str
    group: str | None = None


@dataclass
class AssemblyDescriptor:
    components: dict = field(default_factory=dict)  # id -> DescriptorComponent
    bindings: list = field(default_factory=list)
    composites: dict = field(default_factory=dict)  # id -> DescriptorComposite
    services: list = field(default_factory=list)  # ServiceEntry, declaration order
    groups: dict = field(default_factory=dict)  # group id -> [member ids]
    shared: list = field(default_factory=list)  # top-level infra component ids
    node_assignment: dict = field(default_factory=dict)  # service id -> composite id

    def provider_id(self, target: str, interface: str) -> str | None:
        """Resolve a component-or-composite id to the component serving
        `interface` (composites answer through their exports)."""
        if target in self.composites:
            return self.composites[target].exports.get(interface)
        comp = self.components.get(target)
        if comp is not None and interface in comp.provides:
            return comp.id
        return None


# -- generation ---------------------------------------------------------------


class _Generator:
    def __init__(self, config: ExpandedConfig, registry: Registry):
        self.config = config
        self.registry = registry
        self.asm = AssemblyDescriptor()

    def run(self) -> AssemblyDescriptor:
        for entry in self.config.root.entries:
            if not isinstance(entry.value, Block):
                raise ConfigError(
                    f"top-level entry {entry.name} must be a block",
                    entry.span.line,
                    entry.span.column,
                )
            in_services = entry.name in SERVICE_BLOCKS
            for child in entry.value.entries:
                self._block_entry(entry.name, child, in_services)
        self._autobind()
        self._assign_ordinals()
        self._bind_nodelists()
        self._assign_nodes()
        return self.asm

    # entry dispatch

    def _block_entry(self, block: str, entry: Entry, in_services: bool) -> None:
        value = entry.value
        if isinstance(value, Ref):
            raise ConfigError(
                f"{block}/{entry.name}: references are only valid inside component bodies",
                entry.span.line,
                entry.span.column,
            )
        if isinstance(value, Block):
            raise ConfigError(
                f"{block}/{entry.name}: nested plain blocks are not supported",
                entry.span.line,
                entry.span.column,
            )
        spec = self._kind(value, entry)
        if spec.composite:
            self._composite(block, entry, spec)
        elif spec.group:
            if not in_services:
                raise ConfigError(
                    f"{block}/{entry.name}: {spec.name} groups belong in services",
                    entry.span.line,
                    entry.span.column,
                )
            self._group(block, entry)
        elif spec.root:
            raise ConfigError(
                f"{block}/{entry.name}: {spec.name} cannot be nested",
                entry.span.line,
                entry.span.column,
            )
        else:
            cid = f"{block}/{entry.name}"
            self._component(cid, entry, spec, owner=None)
            if in_services:
                self.asm.services.append(ServiceEntry(cid))
                self._service_bindings(cid, entry, spec)
            else:
                self.asm.shared.append(cid)

    def _kind(self, value: Ctor, entry: Entry) -> KindSpec:
        spec = self.registry.get(value.kind)
        if spec is None:
            raise UnknownKind(
                f"unknown kind {value.kind!r} for {entry.name}",
                value.span.line,
                value.span.column,
            )
        return spec

    def _args(self, value: Ctor, spec: KindSpec) -> dict:
        params = spec.params
        required = sum(1 for p in params if p.required)
        if not (required <= len(value.args) <= len(params)):
            raise ArityMismatch(
                f"{spec.name} takes {required}..{len(params)} arguments, got {len(value.args)}",
                value.span.line,
                value.span.column,
            )
        args: dict = {}
        for param, arg in zip(params, value.args):
            if param.kind == "int" and arg.kind != "int":
                raise ArityMismatch(
                    f"{spec.name}: parameter {param.name} wants an integer, got {arg.text!r}",
                    arg.span.line,
                    arg.span.column,
                )
            if param.kind == "resources" and arg.kind not in ("resources", "str"):
                raise ArityMismatch(
                    f"{spec.name}: parameter {param.name} wants key=count resources",
                    arg.span.line,
                    arg.span.column,
                )
            args[param.name] = arg.value if param.kind == "int" else arg.text
        for param in params[len(value.args) :]:
            if param.default is not None:
                args[param.name] = param.default
        return args

    def _component(self, cid: str, entry: Entry, spec: KindSpec, owner: str | None) -> None:
        value = entry.value
        self.asm.components[cid] = DescriptorComponent(
            id=cid,
            kind=spec.name,
            args=self._args(value, spec),
            provides=spec.provides,
            ports=spec.ports,
            owner=owner,
        )

    # composites

    def _composite(self, block: str, entry: Entry, spec: KindSpec) -> None:
        comp_id = f"{block}/{entry.name}"
        body = entry.value.body or Block()
        roles: list[tuple[str, object]] = []
        declared = set()
        for child in body.entries:
            declared.add(child.name)
            roles.append((child.name, child))
        for role, kind_name in spec.defaults:
            if role not in declared:
                roles.append((role, Entry(role, Ctor(kind_name), entry.span)))

        composite = DescriptorComposite(
            id=comp_id,
            kind=spec.name,
            children={},
            exports={},
        )
        self.asm.composites[comp_id] = composite
        role_refs: dict[str, str] = {}
        for role, child in roles:
            value = child.value
            if isinstance(value, Ref):
                role_refs[role] = "/".join(value.path)
                continue
            if isinstance(value, Block):
                raise ConfigError(
                    f"{comp_id}/{role}: plain blocks are not valid node roles",
                    child.span.line,
                    child.span.column,
                )
            child_spec = self._kind(value, child)
            if value.body is not None and value.body.entries:
                raise ConfigError(
                    f"{comp_id}/{role}: nested bodies are not supported here",
                    child.span.line,
                    child.span.column,
                )
            child_id = f"{comp_id}/{role}"
            self._component(child_id, child, child_spec, owner=comp_id)
            composite.children[role] = child_id

        barrier_id = f"{comp_id}/{BARRIER_ROLE}"
        barrier_ports = []
        barrier_binds = []
        for role, child_id in composite.children.items():
            child = self.asm.components[child_id]
            iface = min(child.provides) if child.provides else ""
            barrier_ports.append(PortSpec(role, iface, required=True))
            barrier_binds.append(DescriptorBinding(barrier_id, role, child_id, iface))
        barrier_spec = self.registry.get("NodeReady")
        self.asm.components[barrier_id] = DescriptorComponent(
            id=barrier_id,
            kind="NodeReady",
            args={},
            provides=barrier_spec.provides,
            ports=tuple(barrier_ports),
            owner=comp_id,
        )
        composite.children[BARRIER_ROLE] = barrier_id
        self.asm.bindings.extend(barrier_binds)

        for role, child_id in composite.children.items():
            for iface in sorted(self.asm.components[child_id].provides):
                composite.exports.setdefault(iface, child_id)
        composite.exports[NODE] = barrier_id
        self._pending_roles = getattr(self, "_pending_roles", {})
        self._pending_roles[comp_id] = role_refs

    def _group(self, block: str, entry: Entry) -> None:
        group_id = f"{block}/{entry.name}"
        body = entry.value.body or Block()
        members: list[str] = []
        for child in body.entries:
            if not isinstance(child.value, Ctor):
                raise ConfigError(
                    f"{group_id}: group members must be constructors",
                    child.span.line,
                    child.span.column,
                )
            spec = self._kind(child.value, child)
            cid = f"{group_id}/{child.name}"
            self._component(cid, child, spec, owner=None)
            self.asm.services.append(ServiceEntry(cid, group=group_id))
            self._service_bindings(cid, child, spec)
            members.append(cid)
        self.asm.groups[group_id] = members

    # bindings

    def _service_bindings(self, cid: str, entry: Entry, spec: KindSpec) -> None:
        body = entry.value.body or Block()
        ports = {p.name: p for p in spec.ports}
        for child in body.entries:
            if not isinstance(child.value, Ref):
                raise ConfigError(
                    f"{cid}/{child.name}: service bodies hold only references",
                    child.span.line,
                    child.span.column,
                )
            port = ports.get(child.name)
            if port is None:
                raise ConfigError(
                    f"{cid}: kind {spec.name} has no port named {child.name!r}",
                    child.span.line,
                    child.span.column,
                )
            target = "/".join(child.value.path)
            server = self.asm.provider_id(target, port.interface)
            if server is None:
                raise DanglingNodeRef(
                    f"{cid}: {child.name} = {target} provides no {port.interface}",
                    child.span.line,
                    child.span.column,
                )
            self.asm.bindings.append(
                DescriptorBinding(cid, port.name, server, port.interface)
            )

    def _autobind(self) -> None:
        """Wire unbound ports inside composites by interface matching."""
        bound = {(b.client, b.port) for b in self.asm.bindings}
        for composite in self.asm.composites.values():
            role_refs = getattr(self, "_pending_roles", {}).get(composite.id, {})
            children = [
                self.asm.components[cid]
                for role, cid in composite.children.items()
                if role != BARRIER_ROLE
            ]
            for child in children:
                for port in child.ports:
                    if (child.id, port.name) in bound:
                        continue
                    server = self._find_provider(composite, role_refs, child, port)
                    if server is None:
                        continue
                    self.asm.bindings.append(
                        DescriptorBinding(child.id, port.name, server, port.interface)
                    )
                    bound.add((child.id, port.name))

    def _find_provider(self, composite, role_refs, child, port) -> str | None:
        # Same-named role reference wins, then siblings, then any role
        # reference, then block-level shared components.
        if port.name in role_refs:
            server = self.asm.provider_id(role_refs[port.name], port.interface)
            if server is not None:
                return server
        for role, cid in composite.children.items():
            comp = self.asm.components[cid]
            if cid != child.id and port.interface in comp.provides:
                return cid
        for target in role_refs.values():
            server = self.asm.provider_id(target, port.interface)
            if server is not None:
                return server
        block = composite.id.rsplit("/", 1)[0]
        for cid in self.asm.shared:
            comp = self.asm.components[cid]
            if cid.startswith(block + "/") and port.interface in comp.provides:
                return cid
        return None

    def _assign_ordinals(self) -> None:
        """Number each composite among those resolving hostnames through
        the same provider; the index picks the provider's nodelist line.
        Nodes with their own static host are alone in their group."""
        hostname_server: dict[str, str] = {}
        for binding in self.asm.bindings:
            if binding.interface != HOSTNAME:
                continue
            client = self.asm.components.get(binding.client)
            if client is not None and client.owner:
                hostname_server.setdefault(client.owner, binding.server)
        counters: dict[str, int] = {}
        for composite in self.asm.composites.values():
            provider = hostname_server.get(composite.id, composite.id)
            composite.ordinal = counters.get(provider, 0)
            counters[provider] = composite.ordinal + 1

    def _bind_nodelists(self) -> None:
        """Dynamic hostname resolvers depend on whichever service publishes
        the nodelist file they read (path equality)."""
        providers = [
            c
            for c in self.asm.components.values()
            if NODELIST in c.provides and "nodelist" in c.args
        ]
        bound = {(b.client, b.port) for b in self.asm.bindings}
        for comp in self.asm.components.values():
            port = next((p for p in comp.ports if p.interface == NODELIST), None)
            if port is None or (comp.id, port.name) in bound:
                continue
            path = comp.args.get("path")
            for provider in providers:
                if provider.args["nodelist"] == path:
                    self.asm.bindings.append(
                        DescriptorBinding(comp.id, port.name, provider.id, NODELIST)
                    )
                    break

    def _assign_nodes(self) -> None:
        barrier_owner = {
            c.children[BARRIER_ROLE]: c.id for c in self.asm.composites.values()
        }
        for service in self.asm.services:
            comp = self.asm.components[service.id]
            for binding in self.asm.bindings:
                if binding.client == service.id and binding.interface == NODE:
                    self.asm.node_assignment[service.id] = barrier_owner.get(
                        binding.server, binding.server
                    )


def generate(config: ExpandedConfig, registry: Registry) -> AssemblyDescriptor:
    return _Generator(config, registry).run()


# -- validation ---------------------------------------------------------------


@dataclass(frozen=True)
class Diagnostic:
    code: str
    subject: str
    detail: str

    def __str__(self) -> str:
        return f"{self.code}: {self.subject}: {self.detail}"


def _strongly_connected(graph: dict) -> list[list[str]]:
    """Tarjan's algorithm, iterative; returns components of size > 1
    (plus self-loop singletons)."""
    index: dict[str, int] = {}
    lowlink: dict[str, int] = {}
    on_stack: set = set()
    stack: list[str] = []
    counter = [0]
    sccs: list[list[str]] = []

    for root in graph:
        if root in index:
            continue
        work = [(root, iter(graph[root]))]
        index[root] = lowlink[root] = counter[0]
        counter[0] += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            node, it = work[-1]
            advanced = False
            for succ in it:
                if succ not in graph:
                    continue
                if succ not in index:
                    index[succ] = lowlink[succ] = counter[0]
                    counter[0] += 1
                    stack.append(succ)
                    on_stack.add(succ)
                    work.append((succ, iter(graph[succ])))
                    advanced = True
                    break
                if succ in on_stack:
                    lowlink[node] = min(lowlink[node], index[succ])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                lowlink[parent] = min(lowlink[parent], lowlink[node])
            if lowlink[node] == index[node]:
                scc = []
                while True:
                    member = stack.pop()
                    on_stack.discard(member)
                    scc.append(member)
                    if member == node:
                        break
                if len(scc) > 1 or node in graph.get(node, ()):
                    sccs.append(sorted(scc))
    return sccs


def dependency_graph(asm: AssemblyDescriptor) -> dict:
    graph: dict[str, list[str]] = {cid: [] for cid in asm.components}
    for binding in asm.bindings:
        if binding.client in graph and binding.server in asm.components:
            graph[binding.client].append(binding.server)
    return graph


def validate(asm: AssemblyDescriptor) -> list[Diagnostic]:
    out: list[Diagnostic] = []
    for binding in asm.bindings:
        client = asm.components.get(binding.client)
        server = asm.components.get(binding.server)
        if client is None or server is None:
            missing = binding.client if client is None else binding.server
            out.append(Diagnostic("unknown-component", missing, "binding endpoint not declared"))
            continue
        if binding.interface not in server.provides:
            out.append(
                Diagnostic(
                    "interface-mismatch",
                    f"{binding.client}.{binding.port}",
                    f"{binding.server} does not provide {binding.interface}",
                )
            )
    bound = {(b.client, b.port) for b in asm.bindings}
    for comp in asm.components.values():
        for port in comp.ports:
            if port.required and (comp.id, port.name) not in bound:
                out.append(
                    Diagnostic(
                        "unbound-port", comp.id, f"required port {port.name} is unbound"
                    )
                )
    for service_id, node_id in asm.node_assignment.items():
        if node_id not in asm.composites and node_id not in asm.components:
            out.append(Diagnostic("dangling-node", service_id, f"unknown node {node_id}"))
    for group_id, members in asm.groups.items():
        for member in members:
            if member not in asm.components:
                out.append(Diagnostic("unknown-component", member, f"listed in {group_id}"))
    for scc in _strongly_connected(dependency_graph(asm)):
        out.append(
            Diagnostic("cycle", ", ".join(scc), "binding dependencies form a cycle")
        )
    return out


# -- planning -----------------------------------------------------------------


@dataclass(frozen=True)
class PlanAction:
    target: str  # component or composite id
    state: LifecycleState


@dataclass(frozen=True)
class PlanStage:
    label: str
    mode: str  # "sequential" | "parallel"
    actions: tuple
    prelude: tuple = ()  # run sequentially before parallel dispatch
    postlude: tuple = ()  # run sequentially after the actions


@dataclass(frozen=True)
class DeploymentPlan:
    stages: tuple

    def coverage(self) -> list[str]:
        seen: list[str] = []
        for stage in self.stages:
            for action in stage.prelude + stage.actions + stage.postlude:
                seen.append(action.target)
        return seen


def _unit_of(asm: AssemblyDescriptor, component_id: str) -> str:
    comp = asm.components.get(component_id)
    if comp is not None and comp.owner:
        return comp.owner
    return component_id


def _unit_graph(asm: AssemblyDescriptor) -> dict:
    units: dict[str, set] = {}
    for composite_id in asm.composites:
        units[composite_id] = set()
    for cid in asm.shared:
        units[cid] = set()
    for service in asm.services:
        units[service.id] = set()
    for binding in asm.bindings:
        client = _unit_of(asm, binding.client)
        server = _unit_of(asm, binding.server)
        if client != server and client in units and server in units:
            units[client].add(server)
    return units


def plan(asm: AssemblyDescriptor) -> DeploymentPlan:
    deps = _unit_graph(asm)
    order = {uid: i for i, uid in enumerate(deps)}
    node_units = set(asm.composites)
    shared_units = set(asm.shared)
    service_ids = [s.id for s in asm.services]
    group_of = {s.id: s.group for s in asm.services}

    done: set = set()
    pending_nodes = [u for u in deps if u in node_units]
    pending_services = list(service_ids)
    stages: list[PlanStage] = []
    started = LifecycleState.STARTED

    def unblocked(unit: str, horizon: set) -> bool:
        return all(d in horizon for d in deps[unit])

    def nonservice_closure(unit: str) -> list[str] | None:
        """Not-yet-done units this one needs, topo-ordered; None when the
        closure contains another pending service (must wait for it)."""
        seen: list[str] = []
        visiting: set = set()

        def visit(u: str) -> bool:
            if u in done or u in visiting:
                return True
            if u != unit and u in pending_services:
                return False
            visiting.add(u)
            for d in sorted(deps[u], key=order.get):
                if not visit(d):
                    return False
            if u != unit:
                seen.append(u)
            return True

        return seen if visit(unit) else None

    prep_waves = 0

    def emit_wave(ready_nodes: list[str], shared_ready: set) -> None:
        nonlocal prep_waves, pending_nodes
        prelude_units = sorted(
            {d for u in ready_nodes for d in deps[u] if d in shared_ready},
            key=order.get,
        )
        prep_waves += 1
        label = "node-prep" if prep_waves == 1 else f"node-prep-{prep_waves}"
        stages.append(
            PlanStage(
                label=label,
                mode="parallel",
                actions=tuple(PlanAction(u, started) for u in ready_nodes),
                prelude=tuple(PlanAction(u, started) for u in prelude_units),
            )
        )
        done.update(ready_nodes)
        done.update(prelude_units)
        pending_nodes = [u for u in pending_nodes if u not in done]

    while pending_nodes or pending_services:
        # Eager node preparation: when every remaining node stack is
        # unblocked, they all deploy in one parallel wave before any
        # further service stage.  While some are still blocked (waiting
        # on a reservation, say), services go first and pull the node
        # stacks they personally need into their own stage.
        shared_ready = {u for u in shared_units if u not in done and unblocked(u, done)}
        ready_nodes = [u for u in pending_nodes if unblocked(u, done | shared_ready)]
        if pending_nodes and len(ready_nodes) == len(pending_nodes):
            emit_wave(ready_nodes, shared_ready)
            continue

        emitted = False
        for sid in pending_services:
            group = group_of[sid]
            if group is not None:
                members = asm.groups[group]
                closures = [nonservice_closure(m) for m in members]
                if any(c is None for c in closures):
                    continue
                extra: list[str] = []
                for closure in closures:
                    for u in closure:
                        if u not in done and u not in extra:
                            extra.append(u)
                stages.append(
                    PlanStage(
                        label=group,
                        mode="parallel",
                        actions=tuple(PlanAction(m, started) for m in members),
                        prelude=tuple(PlanAction(u, started) for u in extra),
                    )
                )
                done.update(members)
                done.update(extra)
                pending_services = [s for s in pending_services if s not in members]
                pending_nodes = [u for u in pending_nodes if u not in done]
                emitted = True
                break
            closure = nonservice_closure(sid)
            if closure is None:
                continue
            actions = [PlanAction(u, started) for u in closure]
            actions.append(PlanAction(sid, started))
            stages.append(PlanStage(label=sid, mode="sequential", actions=tuple(actions)))
            done.update(closure)
            done.add(sid)
            pending_services.remove(sid)
            pending_nodes = [u for u in pending_nodes if u not in done]
            emitted = True
            break
        if not emitted:
            if ready_nodes:
                # No service can move yet; release what node stacks we can
                # (cross-node dependency chains resolve wave by wave).
                emit_wave(ready_nodes, shared_ready)
                continue
            raise CyclicDependency(
                "no deployable unit among: "
                + ", ".join(pending_services + pending_nodes)
            )

    leftovers = [u for u in deps if u not in done and u in shared_units]
    ordered: list[str] = []
    while leftovers:
        ready = [u for u in leftovers if all(d in done for d in deps[u])]
        if not ready:
            raise CyclicDependency("unreferenced components form a cycle: " + ", ".join(leftovers))
        ordered.extend(ready)
        done.update(ready)
        leftovers = [u for u in leftovers if u not in done]
    if ordered:
        stages.append(
            PlanStage(
                label="unreferenced",
                mode="sequential",
                actions=tuple(PlanAction(u, started) for u in ordered),
            )
        )

    return DeploymentPlan(tuple(stages))


_INVERSE_TARGET = {
    LifecycleState.STARTED: LifecycleState.UNINSTALLED,
    LifecycleState.UNINSTALLED: LifecycleState.STARTED,
    LifecycleState.INSTALLED: LifecycleState.INSTALLED,
}


def plan_inverse(p: DeploymentPlan) -> DeploymentPlan:
    """Teardown plan: stages reversed, targets flipped, shared infra
    released after its dependents (prelude and postlude swap)."""

    def flip(actions: tuple) -> tuple:
        return tuple(
            PlanAction(a.target, _INVERSE_TARGET[a.state]) for a in reversed(actions)
        )

    stages = tuple(
        PlanStage(
            label=stage.label,
            mode=stage.mode,
            actions=flip(stage.actions),
            prelude=flip(stage.postlude),
            postlude=flip(stage.prelude),
        )
        for stage in reversed(p.stages)
    )
    return DeploymentPlan(stages)


# -- instantiation and inspection ---------------------------------------------


def instantiate(asm: AssemblyDescriptor, registry: Registry) -> core.Assembly:
    """Build the live component model the runtime executes against."""
    live = core.Assembly()
    for comp in asm.components.values():
        spec = registry.get(comp.kind)
        behavior = spec.behavior(comp.args) if spec else core.Behavior()
        live.add(
            core.Component(
                id=comp.id,
                kind=comp.kind,
                provides=comp.provides,
                ports=comp.ports,
                behavior=behavior,
                args=dict(comp.args),
                owner=comp.owner,
            )
        )
    for composite in asm.composites.values():
        live.add_composite(
            core.Composite(
                id=composite.id,
                kind=composite.kind,
                children=dict(composite.children),
                exports=dict(composite.exports),
                provides=frozenset(composite.exports),
                ordinal=composite.ordinal,
            )
        )
    for binding in asm.bindings:
        live.bind((binding.client, binding.port), binding.server)
    return live


def emit_text(asm: AssemblyDescriptor, deployment_plan: DeploymentPlan | None = None) -> str:
    """Stable, line-oriented rendering for inspection and golden tests."""
    lines: list[str] = ["[components]"]
    for comp in asm.components.values():
        args = ",".join(f"{k}={comp.args[k]}" for k in sorted(comp.args))
        owner = comp.owner or "-"
        lines.append(f"{comp.id} kind={comp.kind} owner={owner} args=({args})")
    lines.append("[bindings]")
    for b in asm.bindings:
        lines.append(f"{b.client}.{b.port} -> {b.server} [{b.interface}]")
    lines.append("[composites]")
    for composite in asm.composites.values():
        roles = ",".join(f"{r}={c}" for r, c in composite.children.items())
        lines.append(f"{composite.id} kind={composite.kind} ordinal={composite.ordinal} children=({roles})")
    lines.append("[services]")
    for service in asm.services:
        group = service.group or "-"
        node = asm.node_assignment.get(service.id, "-")
        lines.append(f"{service.id} group={group} node={node}")
    if deployment_plan is not None:
        lines.append("[plan]")
        for i, stage in enumerate(deployment_plan.stages):
            lines.append(f"stage {i} label={stage.label} mode={stage.mode}")
            for action in stage.prelude:
                lines.append(f"  prelude {action.target} -> {action.state.name}")
            for action in stage.actions:
                lines.append(f"  action {action.target} -> {action.state.name}")
            for action in stage.postlude:
                lines.append(f"  postlude {action.target} -> {action.state.name}")
    return "\n".join(lines) + "\n"
