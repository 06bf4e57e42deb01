"""Command-line front end: plan, deploy, undeploy, status, bench.

Mutating subcommands persist a state file (descriptor hash, component
states, journal, simulated fleet) so status and undeploy work across
processes; `GRIDFORGE_STATE_DIR` overrides its location.  Exit codes:
0 success, 2 configuration or validation problems, 3 execution failure.
"""

from __future__ import annotations

import argparse
import fcntl
import hashlib
import json
import os
import sys

from .assembly import emit_text
from .core import LifecycleState
from .errors import ConfigError, DeploymentError, StageFailed, ValidationFailed
from .pipeline import Deployment, build
from .runtime import ExecOptions
from .simgrid import Fleet, SimClockConfig
from . import bench as bench_mod

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def state_dir() -> str:
    return os.environ.get("GRIDFORGE_STATE_DIR") or os.path.expanduser("~/.gridforge")


def _descriptor_hash(deployment: Deployment) -> str:
    return hashlib.sha256(emit_text(deployment.descriptor).encode()).hexdigest()[:16]


def _state_path(deployment: Deployment) -> str:
    return os.path.join(state_dir(), _descriptor_hash(deployment) + ".json")


def load_state(deployment: Deployment) -> None:
    path = _state_path(deployment)
    if not os.path.exists(path):
        return
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    for cid, state_name in data.get("states", {}).items():
        comp = deployment.assembly.components.get(cid)
        if comp is not None:
            comp.state = LifecycleState[state_name]
    fleet_data = data.get("fleet")
    if fleet_data and deployment.ctx.fleet is not None:
        restored = Fleet.from_dict(fleet_data)
        deployment.ctx.fleet.nodes = restored.nodes
        deployment.ctx.transport.fleet = deployment.ctx.fleet


def save_state(deployment: Deployment) -> str:
    os.makedirs(state_dir(), exist_ok=True)
    path = _state_path(deployment)
    data = {
        "descriptor": _descriptor_hash(deployment),
        "states": {cid: c.state.name for cid, c in deployment.assembly.components.items()},
        "journal": deployment.assembly.journal.export_lines(),
        "fleet": deployment.ctx.fleet.to_dict() if deployment.ctx.fleet else None,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh, indent=1, sort_keys=True)
    return path


class _StateLock:
    def __init__(self) -> None:
        os.makedirs(state_dir(), exist_ok=True)
        self._fh = open(os.path.join(state_dir(), ".lock"), "w")

    def __enter__(self) -> "_StateLock":
        fcntl.flock(self._fh, fcntl.LOCK_EX)
        return self

    def __exit__(self, *exc) -> None:
        fcntl.flock(self._fh, fcntl.LOCK_UN)
        self._fh.close()


def _sim_config(args: argparse.Namespace) -> SimClockConfig:
    return SimClockConfig(
        connect_latency=args.connect_latency,
        step_latency=args.step_latency,
        jitter_seed=args.jitter_seed,
    )


def _build(args: argparse.Namespace) -> Deployment:
    return build(args.config, transport=args.transport, sim_config=_sim_config(args))


def _exec_options(args: argparse.Namespace) -> ExecOptions:
    return ExecOptions(
        max_workers=args.max_workers,
        dry_run=getattr(args, "dry_run", False),
        seed=args.seed,
    )


def _write_metrics(args: argparse.Namespace, report) -> None:
    if getattr(args, "metrics", None):
        with open(args.metrics, "w", encoding="utf-8") as fh:
            fh.write(report.metrics_csv())


def cmd_plan(args: argparse.Namespace) -> int:
    deployment = _build(args)
    for i, stage in enumerate(deployment.plan.stages):
        total = len(stage.prelude) + len(stage.actions) + len(stage.postlude)
        print(f"stage {i}: {stage.label} [{stage.mode}] {total} action(s)")
        for action in stage.prelude + stage.actions + stage.postlude:
            print(f"  {action.target} -> {action.state.name.lower()}")
    if args.emit:
        text = emit_text(deployment.descriptor, deployment.plan)
        if args.emit == "-":
            sys.stdout.write(text)
        else:
            with open(args.emit, "w", encoding="utf-8") as fh:
                fh.write(text)
    return EXIT_OK


def _run(args: argparse.Namespace, inverse: bool) -> int:
    deployment = _build(args)
    with _StateLock():
        load_state(deployment)
        options = _exec_options(args)
        try:
            if inverse:
                report = deployment.execute_inverse(options)
            else:
                report = deployment.execute(options)
        except StageFailed as exc:
            report = exc.report
            if report is not None:
                _write_metrics(args, report)
            if not options.dry_run:
                save_state(deployment)
            print(f"stage {exc.stage_index} failed at {exc.component_id}: {exc.cause}", file=sys.stderr)
            return EXIT_RUNTIME
        _write_metrics(args, report)
        if not options.dry_run:
            save_state(deployment)
    verb = "planned" if options.dry_run else "performed"
    transitions = sum(1 for _ in deployment.assembly.journal.export_lines())
    print(
        f"{'undeploy' if inverse else 'deploy'} complete: "
        f"{len(report.actions)} action(s), {transitions} transition(s) {verb}, "
        f"effective {report.total_ms:.1f} ms, overhead {deployment.overhead_ms:.1f} ms"
    )
    return EXIT_OK


def cmd_deploy(args: argparse.Namespace) -> int:
    return _run(args, inverse=False)


def cmd_undeploy(args: argparse.Namespace) -> int:
    return _run(args, inverse=True)


def cmd_status(args: argparse.Namespace) -> int:
    if args.config:
        deployment = _build(args)
        load_state(deployment)
        for cid, state in deployment.assembly.status().items():
            print(f"{cid} {state.name}")
        return EXIT_OK
    directory = state_dir()
    if not os.path.isdir(directory):
        print("no recorded deployments")
        return EXIT_OK
    for fname in sorted(os.listdir(directory)):
        if not fname.endswith(".json"):
            continue
        with open(os.path.join(directory, fname), encoding="utf-8") as fh:
            data = json.load(fh)
        print(f"deployment {data.get('descriptor', fname)}:")
        for cid, state in data.get("states", {}).items():
            print(f"  {cid} {state}")
    return EXIT_OK


def cmd_bench(args: argparse.Namespace) -> int:
    lo, hi, step = args.sizes
    sizes = list(range(lo, hi + 1, step))
    points = bench_mod.measure_scaling(
        sizes,
        max_workers=args.max_workers,
        sim_config=_sim_config(args),
        parallel=not args.sequential,
    )
    csv_text = bench_mod.to_csv(points)
    if args.out == "-":
        sys.stdout.write(csv_text)
    else:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(csv_text)
    fit = bench_mod.r_squared([p.n_nodes for p in points], [p.effective_ms for p in points])
    print(f"linear fit over {len(points)} sizes: r^2 = {fit:.4f}", file=sys.stderr)
    return EXIT_OK


def _sizes(text: str) -> tuple[int, int, int]:
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("sizes must be lo:hi:step")
    lo, hi, step = (int(p) for p in parts)
    if lo < 1 or hi < lo or step < 1:
        raise argparse.ArgumentTypeError("sizes must satisfy 1 <= lo <= hi, step >= 1")
    return lo, hi, step


def _add_common(parser: argparse.ArgumentParser, config_required: bool = True) -> None:
    parser.add_argument(
        "-c",
        "--config",
        action="append",
        default=None,
        required=config_required,
        help="configuration file (.gdf); repeat to merge fragments",
    )
    parser.add_argument("--transport", choices=("sim", "local", "ssh"), default="sim")
    parser.add_argument("--connect-latency", type=float, default=5.0)
    parser.add_argument("--step-latency", type=float, default=10.0)
    parser.add_argument("--jitter-seed", type=int, default=0)


def _add_exec(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--max-workers", type=int, default=8)
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--dry-run", action="store_true")
    parser.add_argument("--metrics", help="write per-stage CSV to this path")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gridforge",
        description="Deploy middleware fleets from declarative configurations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_plan = sub.add_parser("plan", help="show the staged deployment plan")
    _add_common(p_plan)
    p_plan.add_argument("--emit", help="write descriptor+plan text ('-' for stdout)")
    p_plan.set_defaults(func=cmd_plan)

    p_deploy = sub.add_parser("deploy", help="execute the forward plan")
    _add_common(p_deploy)
    _add_exec(p_deploy)
    p_deploy.set_defaults(func=cmd_deploy)

    p_undeploy = sub.add_parser("undeploy", help="execute the teardown plan")
    _add_common(p_undeploy)
    _add_exec(p_undeploy)
    p_undeploy.set_defaults(func=cmd_undeploy)

    p_status = sub.add_parser("status", help="show recorded component states")
    _add_common(p_status, config_required=False)
    p_status.set_defaults(func=cmd_status)

    p_bench = sub.add_parser("bench", help="run the sim scaling measurement")
    p_bench.add_argument("--sizes", type=_sizes, default=(10, 200, 10), help="lo:hi:step")
    p_bench.add_argument("--max-workers", type=int, default=10)
    p_bench.add_argument("--sequential", action="store_true", help="servers without ParallelRunner")
    p_bench.add_argument("--out", default="-", help="CSV output path ('-' for stdout)")
    p_bench.add_argument("--connect-latency", type=float, default=5.0)
    p_bench.add_argument("--step-latency", type=float, default=10.0)
    p_bench.add_argument("--jitter-seed", type=int, default=0)
    p_bench.set_defaults(func=cmd_bench)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValidationFailed as exc:
        for diagnostic in exc.diagnostics:
            print(str(diagnostic), file=sys.stderr)
        return EXIT_CONFIG
    except ConfigError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_CONFIG
    except StageFailed as exc:
        print(f"stage {exc.stage_index} failed at {exc.component_id}: {exc.cause}", file=sys.stderr)
        return EXIT_RUNTIME
    except DeploymentError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
