"""Reusable infrastructure components: hosts, ports, users, protocols, shells.

Each kind is an ordinary lifecycle component; what makes them useful is the
service API their behaviors expose to other behaviors (hostname.get,
protocol.send, shell.execute, transfer.fetch).  Cross-component calls
resolve through bindings, never through globals.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

from .core import Behavior, Component, PortSpec
from .errors import (
    FetchFailed,
    IndexOutOfRange,
    NodeListMissing,
    RemoteError,
    UnboundPort,
)
from .steps import Step, fetch, set_var
from .transports import NodeAccess, Payload

# Interface names (what a provided port is called on the wire).
HOSTNAME = "Hostname"
PORT = "Port"
USER = "User"
PROTOCOL = "Protocol"
SHELL = "Shell"
TRANSFER = "Transfer"
VARIABLE = "Variable"
NODELIST = "NodeList"
NODE = "Node"


@dataclass(frozen=True)
class ParamSpec:
    name: str
    kind: str = "str"  # str | int | path | resources
    required: bool = True
    default: object = None


@dataclass(frozen=True)
class KindSpec:
    """Registry entry: how to build one component kind."""

    name: str
    provides: frozenset
    ports: tuple = ()
    params: tuple = ()
    factory: object = None  # callable(args: dict) -> Behavior
    composite: bool = False  # node template: children + defaults
    group: bool = False  # members deploy as one parallel stage
    root: bool = False  # deployment container
    reserved: bool = False
    defaults: tuple = ()  # (role, kind) pairs filled into composites

    def behavior(self, args: dict) -> Behavior:
        if self.reserved:
            return ReservedBehavior(self.name)
        return self.factory(args) if self.factory else Behavior()


# -- binding resolution helpers --------------------------------------------


def bound_component(assembly, component: Component, port: str) -> Component | None:
    binding = component.bound.get(port)
    return assembly.components[binding.server] if binding else None


def node_ordinal(assembly, component: Component) -> int:
    if component.owner and component.owner in assembly.composites:
        return assembly.composites[component.owner].ordinal
    return 0


def resolve_access(assembly, protocol: Component) -> NodeAccess:
    """Compute connection parameters from a protocol component's bindings."""
    host = bound_component(assembly, protocol, "hostname")
    if host is None:
        raise UnboundPort(f"{protocol.id}: hostname port unbound")
    hostname = host.behavior.get(host, node_ordinal(assembly, protocol))
    port_comp = bound_component(assembly, protocol, "port")
    port = port_comp.behavior.get(port_comp) if port_comp else 22
    user_comp = bound_component(assembly, protocol, "user")
    login, identity = ("", "")
    if user_comp:
        login = user_comp.args.get("login", "")
        identity = user_comp.behavior.key_path(user_comp)
    return NodeAccess(hostname=hostname, port=port, user=login, identity=identity)


def protocol_send(ctx, protocol: Component, payload: Payload) -> tuple[int, str]:
    """Deliver a payload through the active transport; nonzero status raises."""
    access = resolve_access(ctx.assembly, protocol)
    status, output = ctx.transport.send(access, payload)
    if status != 0:
        raise RemoteError(status, output)
    return status, output


def shell_execute(ctx, shell: Component, steps: list[Step]) -> tuple[int, str]:
    """Render steps for the shell dialect and send them as one session."""
    if not steps:
        return 0, ""
    protocol = bound_component(ctx.assembly, shell, "protocol")
    if protocol is None:
        raise UnboundPort(f"{shell.id}: protocol port unbound")
    return protocol_send(ctx, protocol, Payload.of(steps))


def shell_access(ctx, shell: Component) -> NodeAccess:
    protocol = bound_component(ctx.assembly, shell, "protocol")
    if protocol is None:
        raise UnboundPort(f"{shell.id}: protocol port unbound")
    return resolve_access(ctx.assembly, protocol)


def node_shell(ctx, component: Component, port: str = "node") -> Component:
    """Follow a `node` binding (a node's readiness barrier) to its shell."""
    barrier = bound_component(ctx.assembly, component, port)
    if barrier is None:
        raise UnboundPort(f"{component.id}: {port} port unbound")
    composite = ctx.assembly.composites[barrier.owner]
    return ctx.assembly.components[composite.exports[SHELL]]


# -- behaviors ---------------------------------------------------------------


class ReservedBehavior(Behavior):
    """Declared-but-unimplemented kinds fail loudly at action time."""

    def __init__(self, kind: str):
        self.kind = kind

    def _refuse(self, component, ctx=None):
        raise NotImplementedError(f"kind {self.kind} is reserved, not implemented")

    install = start = stop = uninstall = _refuse


class StaticHostBehavior(Behavior):
    def __init__(self, args: dict):
        self.value = args["value"]

    def get(self, component: Component, index: int = 0) -> str:
        return self.value


class DynamicHostBehavior(Behavior):
    """Hostname provider backed by a nodelist file, read lazily, memoized."""

    def __init__(self, args: dict):
        self.path = args["path"]
        self._lines: list[str] | None = None

    def get(self, component: Component, index: int = 0) -> str:
        if self._lines is None:
            path = os.path.expanduser(self.path)
            if not os.path.exists(path):
                raise NodeListMissing(
                    f"nodelist {self.path} absent; has the reservation run?"
                )
            with open(path, encoding="utf-8") as fh:
                self._lines = [ln.strip() for ln in fh if ln.strip()]
        if index >= len(self._lines):
            raise IndexOutOfRange(
                f"node index {index} but nodelist {self.path} has {len(self._lines)} entries"
            )
        return self._lines[index]


class PortBehavior(Behavior):
    def __init__(self, args: dict):
        self.value = int(args["value"])

    def get(self, component: Component | None = None) -> int:
        return self.value


class UserBehavior(Behavior):
    def __init__(self, args: dict):
        self.login = args["login"]
        self.credential = args.get("credential", "")

    def key_path(self, component: Component | None = None) -> str:
        # Heuristic: path-shaped credentials are key files, others passwords.
        cred = self.credential
        if cred.startswith(("~", "/", ".")) or "/" in cred:
            return cred
        return ""


class ProtocolBehavior(Behavior):
    """SSH (or local/sim stand-in); delivery itself is the transport's job."""

    def __init__(self, args: dict):
        self.args = args

    def send(self, ctx, component: Component, payload: Payload) -> tuple[int, str]:
        return protocol_send(ctx, component, payload)


class ShellBehavior(Behavior):
    def __init__(self, args: dict):
        self.args = args

    def execute(self, ctx, component: Component, steps: list[Step]) -> tuple[int, str]:
        return shell_execute(ctx, component, steps)


class TransferBehavior(Behavior):
    """File transfer over the node's shell; existing destinations short-circuit."""

    def __init__(self, args: dict):
        self.args = args

    def fetch(self, ctx, component: Component, url: str, dest: str) -> list[Step]:
        shell = bound_component(ctx.assembly, component, "shell")
        if shell is None:
            raise UnboundPort(f"{component.id}: shell port unbound")
        if ctx.transport.exists(shell_access(ctx, shell), dest):
            return []
        step = fetch(url, dest)
        try:
            shell_execute(ctx, shell, [step])
        except RemoteError as exc:
            raise FetchFailed(f"{url} -> {dest}: {exc}") from exc
        return [step]


class VariableBehavior(Behavior):
    """Sets a shell variable on start, clears it on stop."""

    def __init__(self, args: dict):
        self.name = args["name"]
        self.value = args.get("value", "")

    def start(self, component: Component, ctx=None) -> None:
        shell = bound_component(ctx.assembly, component, "shell")
        shell_execute(ctx, shell, [set_var(self.name, self.value)])

    def stop(self, component: Component, ctx=None) -> None:
        shell = bound_component(ctx.assembly, component, "shell")
        shell_execute(ctx, shell, [set_var(self.name, "")])


class BarrierBehavior(Behavior):
    """Readiness marker for a node stack; all actions are pure no-ops."""


def _spec(name, provides, ports=(), params=(), factory=None, **kw) -> KindSpec:
    return KindSpec(
        name=name,
        provides=frozenset(provides),
        ports=tuple(ports),
        params=tuple(params),
        factory=factory,
        **kw,
    )


BUILTIN_KINDS: tuple[KindSpec, ...] = (
    _spec(
        "StaticHost",
        [HOSTNAME],
        params=[ParamSpec("value")],
        factory=StaticHostBehavior,
    ),
    _spec(
        "DynamicHost",
        [HOSTNAME],
        ports=[PortSpec("nodelist", NODELIST, required=False)],
        params=[ParamSpec("path", kind="path")],
        factory=DynamicHostBehavior,
    ),
    _spec("Port", [PORT], params=[ParamSpec("value", kind="int")], factory=PortBehavior),
    _spec(
        "User",
        [USER],
        params=[ParamSpec("login"), ParamSpec("credential", required=False, default="")],
        factory=UserBehavior,
    ),
    _spec(
        "SSH",
        [PROTOCOL],
        ports=[
            PortSpec("hostname", HOSTNAME),
            PortSpec("port", PORT, required=False),
            PortSpec("user", USER, required=False),
        ],
        factory=ProtocolBehavior,
    ),
    _spec(
        "SH",
        [SHELL],
        ports=[PortSpec("protocol", PROTOCOL)],
        factory=ShellBehavior,
    ),
    _spec(
        "FileTransfer",
        [TRANSFER],
        ports=[PortSpec("shell", SHELL)],
        factory=TransferBehavior,
    ),
    _spec(
        "Variable",
        [VARIABLE],
        ports=[PortSpec("shell", SHELL)],
        params=[ParamSpec("name"), ParamSpec("value", required=False, default="")],
        factory=VariableBehavior,
    ),
    _spec("NodeReady", [NODE], factory=lambda args: BarrierBehavior()),
    # Reserved: listed for completeness, refuse at action time.
    _spec("Telnet", [PROTOCOL], ports=[PortSpec("hostname", HOSTNAME)], reserved=True),
    _spec("CSH", [SHELL], ports=[PortSpec("protocol", PROTOCOL)], reserved=True),
    _spec("WindowsCmd", [SHELL], ports=[PortSpec("protocol", PROTOCOL)], reserved=True),
)
