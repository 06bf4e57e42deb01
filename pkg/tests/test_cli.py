"""Command-line behavior: subcommands, exit codes, persisted state."""

import json

import pytest

from configs import MINI, reserved
from gridforge import cli


@pytest.fixture()
def workdir(tmp_path, monkeypatch):
    """Isolated HOME and state dir, plus the minimal config on disk."""
    home = tmp_path / "home"
    home.mkdir()
    monkeypatch.setenv("HOME", str(home))
    monkeypatch.setenv("GRIDFORGE_STATE_DIR", str(tmp_path / "state"))
    cfg = tmp_path / "mini.gdf"
    cfg.write_text(MINI)
    return tmp_path


def write_config(workdir, name, text):
    path = workdir / name
    path.write_text(text)
    return str(path)


def state_files(workdir):
    directory = workdir / "state"
    if not directory.is_dir():
        return []
    return sorted(p.name for p in directory.iterdir() if p.suffix == ".json")


class TestPlan:
    def test_stage_listing(self, workdir, capsys):
        assert cli.main(["plan", "-c", str(workdir / "mini.gdf")]) == 0
        out = capsys.readouterr().out.splitlines()
        assert out == [
            "stage 0: node-prep [parallel] 1 action(s)",
            "  nodes/node-0 -> started",
            "stage 1: services/ns [sequential] 1 action(s)",
            "  services/ns -> started",
        ]

    def test_emit_to_stdout(self, workdir, capsys):
        assert cli.main(["plan", "-c", str(workdir / "mini.gdf"), "--emit", "-"]) == 0
        out = capsys.readouterr().out
        for section in ("[components]", "[bindings]", "[composites]", "[plan]"):
            assert section in out
        assert "stage 0 label=node-prep mode=parallel" in out

    def test_plan_writes_no_state(self, workdir, capsys):
        cli.main(["plan", "-c", str(workdir / "mini.gdf")])
        assert state_files(workdir) == []


class TestDeployCycle:
    def test_deploy_status_undeploy(self, workdir, capsys):
        cfg = str(workdir / "mini.gdf")

        assert cli.main(["deploy", "-c", cfg]) == 0
        out = capsys.readouterr().out
        # 55 ms node stack + 15 ms naming service under default latencies
        assert out.startswith(
            "deploy complete: 2 action(s), 12 transition(s) performed, effective 70.0 ms"
        )
        assert len(state_files(workdir)) == 1

        assert cli.main(["status", "-c", cfg]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert "services/ns STARTED" in lines
        assert "nodes/node-0/jre STARTED" in lines
        assert all(line.endswith(" STARTED") for line in lines)

        # stop 25 + uninstall 15 on the jre, stop 15 on the service
        assert cli.main(["undeploy", "-c", cfg]) == 0
        out = capsys.readouterr().out
        assert out.startswith(
            "undeploy complete: 2 action(s), 12 transition(s) performed, effective 55.0 ms"
        )

        assert cli.main(["status", "-c", cfg]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert all(line.endswith(" UNINSTALLED") for line in lines)

    def test_second_deploy_is_idempotent(self, workdir, capsys):
        cfg = str(workdir / "mini.gdf")
        cli.main(["deploy", "-c", cfg])
        capsys.readouterr()
        assert cli.main(["deploy", "-c", cfg]) == 0
        out = capsys.readouterr().out
        assert out.startswith(
            "deploy complete: 2 action(s), 0 transition(s) performed, effective 0.0 ms"
        )

    def test_dry_run_touches_nothing(self, workdir, capsys):
        cfg = str(workdir / "mini.gdf")
        assert cli.main(["deploy", "-c", cfg, "--dry-run"]) == 0
        out = capsys.readouterr().out
        assert "transition(s) planned" in out
        assert state_files(workdir) == []

    def test_metrics_file(self, workdir, capsys):
        cfg = str(workdir / "mini.gdf")
        metrics = workdir / "metrics.csv"
        cli.main(["deploy", "-c", cfg, "--metrics", str(metrics)])
        lines = metrics.read_text().splitlines()
        assert lines == [
            "stage,mode,actions,wall_ms",
            "node-prep,parallel,1,55.000",
            "services/ns,sequential,1,15.000",
        ]


class TestStatusListing:
    def test_no_state_dir(self, workdir, capsys):
        assert cli.main(["status"]) == 0
        assert capsys.readouterr().out == "no recorded deployments\n"

    def test_recorded_deployments(self, workdir, capsys):
        cli.main(["deploy", "-c", str(workdir / "mini.gdf")])
        capsys.readouterr()
        assert cli.main(["status"]) == 0
        out = capsys.readouterr().out
        assert out.startswith("deployment ")
        assert "  services/ns STARTED" in out.splitlines()

    def test_state_file_contents(self, workdir, capsys):
        cli.main(["deploy", "-c", str(workdir / "mini.gdf")])
        (fname,) = state_files(workdir)
        data = json.loads((workdir / "state" / fname).read_text())
        assert data["states"]["services/ns"] == "STARTED"
        assert data["descriptor"] == fname[: -len(".json")]
        assert len(data["journal"]) == 12
        assert any(n["id"] == "simnode-0" for n in data["fleet"]["nodes"])


class TestFailures:
    def test_config_error_exits_2(self, workdir, capsys):
        cfg = write_config(
            workdir, "bad.gdf", "app = OpenCCM.Deployment {\n  nodes = {\n"
        )
        assert cli.main(["plan", "-c", cfg]) == 2
        assert capsys.readouterr().err.strip() != ""

    def test_missing_config_file_exits_2(self, workdir, capsys):
        assert cli.main(["plan", "-c", str(workdir / "nope.gdf")]) == 2
        err = capsys.readouterr().err
        assert "cannot read configuration" in err
        assert "nope.gdf" in err

    def test_unknown_kind_exits_2(self, workdir, capsys):
        cfg = write_config(
            workdir,
            "unknown.gdf",
            "app = OpenCCM.Deployment {\n  nodes = {\n    node-0 = NoSuchKind {\n    }\n  }\n}\n",
        )
        assert cli.main(["plan", "-c", cfg]) == 2
        assert "NoSuchKind" in capsys.readouterr().err

    def test_oversubscribed_reservation_exits_3(self, workdir, capsys):
        cfg = write_config(workdir, "over.gdf", reserved(3, granted=2))
        assert cli.main(["deploy", "-c", cfg]) == 3
        err = capsys.readouterr().err
        assert "failed at nodes/node-2" in err
        assert "node index 2" in err

    def test_malformed_sizes_rejected(self, workdir):
        with pytest.raises(SystemExit):
            cli.main(["bench", "--sizes", "30:10:10"])


class TestBench:
    def test_csv_and_fit(self, workdir, capsys):
        out_path = workdir / "scaling.csv"
        code = cli.main(["bench", "--sizes", "10:30:10", "--out", str(out_path)])
        assert code == 0
        err = capsys.readouterr().err
        assert "linear fit over 3 sizes: r^2 = 1.0000" in err
        rows = out_path.read_text().splitlines()
        assert rows[0] == "n_nodes,overhead_ms,effective_ms"
        # 130 ms per ten-node wave plus 30 ms fixed services, 15 per server wave
        effective = {
            int(r.split(",")[0]): r.split(",")[2] for r in rows[1:]
        }
        assert effective == {10: "175.000", 20: "320.000", 30: "465.000"}

    def test_stdout_output(self, workdir, capsys):
        assert cli.main(["bench", "--sizes", "10:10:1"]) == 0
        captured = capsys.readouterr()
        assert captured.out.startswith("n_nodes,overhead_ms,effective_ms\n10,")
