"""Deterministic simulated grid: nodes with observable state, virtual time.

SimNodes record every step applied to them; replaying the log from an
empty node reproduces (env, files, processes) exactly.  The virtual clock
is advanced by latency charges from the sim transport, never by wall time,
so identical configuration and seed give identical reported durations.
"""

from __future__ import annotations

import re
import threading
import zlib
from dataclasses import dataclass

from .steps import Step, StepKind


@dataclass
class SimClockConfig:
    """Latency model for the simulated transport.

    jitter_seed 0 disables jitter; any other value perturbs each latency
    deterministically (pure function of seed, node, payload and step index,
    so durations do not depend on worker interleaving).
    """

    connect_latency: float = 5.0
    step_latency: float = 10.0
    jitter_seed: int = 0

    def latency(self, base: float, *salt: str) -> float:
        if self.jitter_seed == 0 or base == 0.0:
            return base
        key = "|".join((str(self.jitter_seed),) + salt).encode()
        u = zlib.crc32(key) / 0xFFFFFFFF
        return base * (0.9 + 0.2 * u)


_VAR = re.compile(r"\$\{(\w+)\}|\$(\w+)")


class SimNode:
    """In-memory stand-in for one grid node."""

    def __init__(self, node_id: str):
        self.id = node_id
        self.env: dict[str, str] = {}
        self.files: set[str] = set()
        self.processes: set[str] = set()
        self.log: list[Step] = []
        self._lock = threading.Lock()

    def observable(self) -> tuple[dict[str, str], set[str], set[str]]:
        return dict(self.env), set(self.files), set(self.processes)

    def exists(self, path: str) -> bool:
        prefix = path.rstrip("/") + "/"
        return any(f == path or f.startswith(prefix) for f in self.files)

    def substitute(self, text: str) -> str:
        def repl(m: re.Match) -> str:
            return self.env.get(m.group(1) or m.group(2), "")

        return _VAR.sub(repl, text)

    def apply(self, step: Step) -> tuple[int, str]:
        """Apply one step, append it to the log, return (status, output)."""
        with self._lock:
            self.log.append(step)
            return self._apply(step)

    def _apply(self, step: Step) -> tuple[int, str]:
        k = step.kind
        if k is StepKind.SET_VAR:
            if step.b == "":
                self.env.pop(step.a, None)
            else:
                self.env[step.a] = step.b
            return 0, ""
        if k is StepKind.APPEND_PATH:
            current = self.env.get("PATH", "")
            self.env["PATH"] = step.a if not current else f"{current}:{step.a}"
            return 0, ""
        if k is StepKind.FETCH:
            self.files.add(step.b)
            return 0, ""
        if k is StepKind.START_PROCESS:
            self.processes.add(step.a)
            return 0, ""
        if k is StepKind.STOP_PROCESS:
            self.processes.discard(step.a)
            return 0, ""
        if k is StepKind.REMOVE:
            prefix = step.a.rstrip("/") + "/"
            self.files = {f for f in self.files if f != step.a and not f.startswith(prefix)}
            return 0, ""
        return self._exec(step.a)

    def _exec(self, command: str) -> tuple[int, str]:
        # Small command model: enough for env-probing and scripted failures.
        cmd = command.strip()
        if cmd == "true" or not cmd:
            return 0, ""
        if cmd == "false":
            return 1, ""
        if cmd.startswith("exit "):
            try:
                return int(cmd[5:].strip()), ""
            except ValueError:
                return 2, ""
        if cmd.startswith("echo "):
            return 0, self.substitute(cmd[5:])
        return 0, ""

    # -- persistence -------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "env": dict(self.env),
            "files": sorted(self.files),
            "processes": sorted(self.processes),
            "log": [[s.kind.value, s.a, s.b, s.node] for s in self.log],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SimNode":
        node = cls(data["id"])
        node.env = dict(data["env"])
        node.files = set(data["files"])
        node.processes = set(data["processes"])
        node.log = [Step(StepKind(k), a, b, n) for k, a, b, n in data["log"]]
        return node


def replay_log(log: list[Step]) -> SimNode:
    """Independent rebuild of node state by re-applying a recorded log."""
    node = SimNode("replay")
    for step in log:
        node.apply(step)
    return node


class Fleet:
    """A set of SimNodes, keyed by hostname."""

    def __init__(self) -> None:
        self.nodes: dict[str, SimNode] = {}
        self._lock = threading.Lock()

    @classmethod
    def create(cls, n: int, prefix: str = "simnode-") -> "Fleet":
        fleet = cls()
        for i in range(n):
            fleet.nodes[f"{prefix}{i}"] = SimNode(f"{prefix}{i}")
        return fleet

    def get(self, hostname: str) -> SimNode | None:
        return self.nodes.get(hostname)

    def get_or_create(self, hostname: str) -> SimNode:
        with self._lock:
            node = self.nodes.get(hostname)
            if node is None:
                node = self.nodes[hostname] = SimNode(hostname)
            return node

    def __len__(self) -> int:
        return len(self.nodes)

    def to_dict(self) -> dict:
        return {"nodes": [n.to_dict() for n in self.nodes.values()]}

    @classmethod
    def from_dict(cls, data: dict) -> "Fleet":
        fleet = cls()
        for nd in data["nodes"]:
            node = SimNode.from_dict(nd)
            fleet.nodes[node.id] = node
        return fleet


class VirtualClock:
    """Monotonic logical clock advanced by latency charges.

    Charges made while an action meter is open (one per worker thread)
    accumulate on that meter instead of moving global time; the executor
    folds meter totals into global time stage by stage, which is how a
    parallel stage costs its makespan rather than the sum of its actions.
    """

    virtual = True

    def __init__(self) -> None:
        self._now = 0.0
        self._lock = threading.Lock()
        self._meters = threading.local()

    def now_ms(self) -> float:
        with self._lock:
            return self._now

    def charge(self, ms: float) -> None:
        stack = getattr(self._meters, "stack", None)
        if stack:
            stack[-1] += ms
        else:
            with self._lock:
                self._now += ms

    def advance(self, ms: float) -> None:
        with self._lock:
            self._now += ms

    def begin_action(self) -> None:
        stack = getattr(self._meters, "stack", None)
        if stack is None:
            stack = self._meters.stack = []
        stack.append(0.0)

    def end_action(self) -> float:
        stack = self._meters.stack
        total = stack.pop()
        if stack:
            stack[-1] += total  # nested meters fold outward
        return total


class WallClock:
    """Real-time counterpart of VirtualClock for local/ssh transports."""

    virtual = False

    def __init__(self) -> None:
        self._meters = threading.local()

    def now_ms(self) -> float:
        import time

        return time.monotonic() * 1000.0

    def charge(self, ms: float) -> None:
        pass

    def advance(self, ms: float) -> None:
        pass

    def begin_action(self) -> None:
        stack = getattr(self._meters, "stack", None)
        if stack is None:
            stack = self._meters.stack = []
        stack.append(self.now_ms())

    def end_action(self) -> float:
        stack = self._meters.stack
        return self.now_ms() - stack.pop()
