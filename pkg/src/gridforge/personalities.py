"""Software-specific kinds loaded from data files, plus the kind registry.

A personality teaches the generic engine how to deploy one technology. It
is declared in a YAML file: kind name, provided interfaces, ports,
constructor parameters, and per-action step scripts with ${param}
placeholders.  The four bundled families (jre, openccm, oargrid,
kadeploy) plus the node template live under data/.
"""

from __future__ import annotations

import os
import re
from importlib import resources as importlib_resources

import yaml

from .core import Behavior, Component, PortSpec
from .errors import (
    ConfigError,
    InsufficientNodes,
    RemoteError,
    ReservationFailed,
    TransportError,
    UnboundPort,
)
from .steps import (
    Step,
    append_path,
    exec_cmd,
    fetch,
    remove,
    set_var,
    start_process,
    stop_process,
)
from .stdlib import (
    BUILTIN_KINDS,
    NODE,
    SHELL,
    KindSpec,
    ParamSpec,
    bound_component,
    node_shell,
    shell_access,
    shell_execute,
)

_PLACEHOLDER = re.compile(r"\$\{(\w+)\}")

_STEP_FACTORIES = {
    "SetVar": lambda a: set_var(a[0], a[1] if len(a) > 1 else ""),
    "AppendPath": lambda a: append_path(a[0]),
    "Fetch": lambda a: fetch(a[0], a[1]),
    "Exec": lambda a: exec_cmd(a[0]),
    "StartProcess": lambda a: start_process(a[0], a[1] if len(a) > 1 else a[0]),
    "StopProcess": lambda a: stop_process(a[0]),
    "Remove": lambda a: remove(a[0]),
}


def _substitute(text: str, params: dict) -> str:
    def repl(m: re.Match) -> str:
        name = m.group(1)
        if name not in params:
            raise ConfigError(f"script placeholder ${{{name}}} has no parameter")
        return str(params[name])

    return _PLACEHOLDER.sub(repl, text)


class ScriptBehavior(Behavior):
    """Runs declared step scripts through the component's shell.

    Scripts come from the personality data file; an `unless_exists` guard
    on an action skips its steps when the guard path is already present
    on the node (installation idempotency).
    """

    def __init__(self, kind: str, scripts: dict, params: dict):
        self.kind = kind
        self.scripts = scripts
        self.params = params

    def _shell(self, ctx, component: Component) -> Component:
        for port in component.ports:
            if port.interface == SHELL and component.bound.get(port.name):
                return bound_component(ctx.assembly, component, port.name)
            if port.interface == NODE and component.bound.get(port.name):
                return node_shell(ctx, component, port.name)
        raise UnboundPort(f"{component.id}: no shell reachable through bound ports")

    def _steps(self, action: str) -> tuple[list[Step], str | None]:
        script = self.scripts.get(action) or {}
        steps = [
            _STEP_FACTORIES[row[0]]([_substitute(str(cell), self.params) for cell in row[1:]])
            for row in script.get("steps", [])
        ]
        guard = script.get("unless_exists")
        return steps, _substitute(guard, self.params) if guard else None

    def _run(self, action: str, component: Component, ctx) -> None:
        steps, guard = self._steps(action)
        if not steps:
            return
        if ctx is None:
            raise UnboundPort(f"{component.id}: {action} needs an execution context")
        shell = self._shell(ctx, component)
        if guard and ctx.transport.exists(shell_access(ctx, shell), guard):
            return
        shell_execute(ctx, shell, steps)

    def install(self, component: Component, ctx=None) -> None:
        self._run("install", component, ctx)

    def start(self, component: Component, ctx=None) -> None:
        self._run("start", component, ctx)

    def stop(self, component: Component, ctx=None) -> None:
        self._run("stop", component, ctx)

    def uninstall(self, component: Component, ctx=None) -> None:
        self._run("uninstall", component, ctx)


def parse_resource_request(request: str) -> list[tuple[str, int]]:
    """`gdx=300|azur=100` -> [("gdx", 300), ("azur", 100)]."""
    sites: list[tuple[str, int]] = []
    for part in request.split("|"):
        name, _, count = part.partition("=")
        if not name or not count.isdigit():
            raise ConfigError(f"malformed resource request part {part!r}")
        sites.append((name, int(count)))
    return sites


class OarGridBehavior(ScriptBehavior):
    """Grid reservation: submit the request, publish the nodelist.

    The allocated hostnames are written controller-side so that dynamic
    hostname resolvers can read them; the simulated backend fabricates
    `simnode-0..N-1`, the local backend maps every slot to localhost.
    """

    def start(self, component: Component, ctx=None) -> None:
        sites = parse_resource_request(self.params["request"])
        total = sum(count for _, count in sites)
        if total <= 0:
            raise InsufficientNodes(f"request {self.params['request']!r} allocates no nodes")
        try:
            self._run("start", component, ctx)
        except (RemoteError, TransportError) as exc:
            raise ReservationFailed(str(exc)) from exc
        if ctx.transport.name == "sim":
            hostnames = [f"simnode-{i}" for i in range(total)]
        else:
            hostnames = ["localhost"] * total
        path = os.path.expanduser(self.params["nodelist"])
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(hostnames) + "\n")

    def stop(self, component: Component, ctx=None) -> None:
        self._run("stop", component, ctx)
        path = os.path.expanduser(self.params["nodelist"])
        if os.path.exists(path):
            with open(path, "w", encoding="utf-8"):
                pass


class StubBehavior(Behavior):
    """Registered kind with no deployable semantics; every action no-ops."""


_BEHAVIOR_CLASSES = {"script": ScriptBehavior, "oargrid": OarGridBehavior}

_PARAM_TYPES = {"str", "int", "path", "resources"}


def _load_kind(data: dict) -> KindSpec:
    name = data["kind"]
    ports = tuple(
        PortSpec(p["name"], p["interface"], p.get("required", True))
        for p in data.get("ports", [])
    )
    params = tuple(
        ParamSpec(
            p["name"],
            kind=p.get("type", "str"),
            required=p.get("required", True),
            default=p.get("default"),
        )
        for p in data.get("params", [])
    )
    for p in params:
        if p.kind not in _PARAM_TYPES:
            raise ConfigError(f"{name}: unknown parameter type {p.kind!r}")
    scripts = data.get("scripts", {})
    behavior_name = data.get("behavior", "script")
    if behavior_name == "noop":
        factory = lambda args: StubBehavior()  # noqa: E731
    else:
        cls = _BEHAVIOR_CLASSES[behavior_name]
        factory = lambda args, _c=cls, _n=name, _s=scripts: _c(_n, _s, args)  # noqa: E731
    return KindSpec(
        name=name,
        provides=frozenset(data.get("provides", [])),
        ports=ports,
        params=params,
        factory=factory,
        composite=data.get("composite", False),
        group=data.get("group", False),
        root=data.get("root", False),
        defaults=tuple((k, v) for k, v in data.get("defaults", {}).items()),
    )


def load_personality_file(path: str) -> list[KindSpec]:
    with open(path, encoding="utf-8") as fh:
        doc = yaml.safe_load(fh)
    return [_load_kind(item) for item in doc.get("kinds", [])]


class Registry:
    """All known kinds: built-in infrastructure plus personality data files."""

    def __init__(self) -> None:
        self.kinds: dict[str, KindSpec] = {}

    def add(self, spec: KindSpec) -> None:
        self.kinds[spec.name] = spec

    def get(self, name: str) -> KindSpec | None:
        return self.kinds.get(name)

    def __contains__(self, name: str) -> bool:
        return name in self.kinds


def default_registry(extra_dirs: list[str] | None = None) -> Registry:
    registry = Registry()
    for spec in BUILTIN_KINDS:
        registry.add(spec)
    data_root = importlib_resources.files("gridforge") / "data"
    for entry in sorted(data_root.iterdir(), key=lambda e: e.name):
        if entry.name.endswith(".yaml"):
            for spec in _load_kinds_from_text(entry.read_text(encoding="utf-8")):
                registry.add(spec)
    for directory in extra_dirs or []:
        for fname in sorted(os.listdir(directory)):
            if fname.endswith(".yaml"):
                for spec in load_personality_file(os.path.join(directory, fname)):
                    registry.add(spec)
    return registry


def _load_kinds_from_text(text: str) -> list[KindSpec]:
    doc = yaml.safe_load(text)
    return [_load_kind(item) for item in doc.get("kinds", [])]
