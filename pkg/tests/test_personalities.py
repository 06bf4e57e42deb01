"""Software personalities: scripted lifecycles, reservations, the registry."""

import pytest

from configs import MINI, chain, reserved
from gridforge.core import Component, LifecycleState
from gridforge.errors import ConfigError, StageFailed, UnboundPort
from gridforge.personalities import (
    Registry,
    ScriptBehavior,
    StubBehavior,
    default_registry,
    load_personality_file,
    parse_resource_request,
)
from gridforge.pipeline import build_from_text
from conftest import seed_nodelist

PAPER_KINDS = [
    "OpenCCM.Deployment",
    "DynamicHost",
    "StaticHost",
    "Grid5000_NODE",
    "SSH",
    "SH",
    "Port",
    "User",
    "Jre",
    "OpenCCM",
    "OpenCCM.NameService",
    "OpenCCM.DCIManager",
    "OpenCCM.DCI_NODE",
    "ParallelRunner",
    "OARGrid",
]


class TestRegistry:
    @pytest.mark.parametrize("kind", PAPER_KINDS)
    def test_every_deployment_kind_registered(self, registry, kind):
        assert registry.get(kind) is not None

    def test_kadeploy_is_a_stub(self, registry):
        spec = registry.get("Kadeploy")
        assert isinstance(spec.behavior({}), StubBehavior)
        spec.behavior({}).install(None)  # no-op, no context needed

    def test_extra_dir_kinds_load(self, tmp_path):
        (tmp_path / "custom.yaml").write_text(
            "kinds:\n"
            "  - kind: Banner\n"
            "    provides: [Banner]\n"
            "    ports:\n"
            "      - {name: shell, interface: Shell, required: true}\n"
            "    params:\n"
            "      - {name: text, type: str, required: true}\n"
            "    scripts:\n"
            "      start:\n"
            "        steps:\n"
            "          - [SetVar, BANNER, \"${text}\"]\n"
        )
        registry = default_registry(extra_dirs=[str(tmp_path)])
        assert registry.get("Banner") is not None
        deployment = build_from_text(
            "app = OpenCCM.Deployment {\n"
            "  nodes = {\n"
            "    node-0 = Grid5000_NODE {\n"
            "      hostname = StaticHost(simnode-0)\n"
            "      motd = Banner(welcome)\n"
            "    }\n"
            "  }\n"
            "  services = {\n"
            "  }\n"
            "}\n",
            registry=registry,
        )
        deployment.execute()
        assert deployment.ctx.fleet.get("simnode-0").env["BANNER"] == "welcome"

    def test_unknown_param_type_rejected(self, tmp_path):
        bad = tmp_path / "bad.yaml"
        bad.write_text(
            "kinds:\n"
            "  - kind: Broken\n"
            "    params:\n"
            "      - {name: x, type: float}\n"
        )
        with pytest.raises(ConfigError):
            load_personality_file(str(bad))

    def test_registry_lookup(self):
        registry = Registry()
        assert registry.get("Nope") is None
        assert "Nope" not in registry


class TestScriptBehavior:
    def test_script_without_context_refuses(self):
        behavior = ScriptBehavior("K", {"start": {"steps": [["SetVar", "A", "1"]]}}, {})
        component = Component(id="k", kind="K")
        with pytest.raises(UnboundPort):
            behavior.start(component, None)

    def test_unknown_placeholder_rejected(self):
        behavior = ScriptBehavior("K", {"start": {"steps": [["SetVar", "A", "${missing}"]]}}, {})
        with pytest.raises(ConfigError):
            behavior._steps("start")

    def test_actions_without_scripts_are_noops(self):
        behavior = ScriptBehavior("K", {}, {})
        behavior.install(None, None)  # empty script list, context unused


class TestMiddlewareStack:
    def test_deploy_publishes_env_files_processes(self):
        deployment = build_from_text(chain(1))
        deployment.execute()
        node = deployment.ctx.fleet.get("simnode-0")
        assert node.env["JAVA_HOME"] == "/opt/java/jre"
        assert node.env["OPENCCM_HOME"] == "/opt/openccm"
        assert node.env["ORB_HOME"] == "/opt/orb"
        assert node.env["PATH"] == "/opt/java/jre/bin:/opt/openccm/bin"
        assert node.exists("/opt/java/jre")
        assert node.exists("/opt/openccm")
        assert node.processes == {"NS"}

    def test_undeploy_restores_pristine_node(self):
        deployment = build_from_text(chain(1))
        before = deployment.ctx.fleet.get_or_create("simnode-0").observable()
        deployment.execute()
        deployment.execute_inverse()
        assert deployment.ctx.fleet.get("simnode-0").observable() == before

    def test_install_skipped_when_already_present(self):
        deployment = build_from_text(MINI)
        node = deployment.ctx.fleet.get_or_create("simnode-0")
        node.files.add("/opt/java/jre")  # pre-provisioned image
        deployment.execute()
        assert "/opt/java/jre/jre.tar.gz" not in node.files  # fetch skipped
        assert node.env["JAVA_HOME"] == "/opt/java/jre"  # start still ran

    def test_manager_and_servers_run_where_bound(self):
        deployment = build_from_text(chain(3))
        deployment.execute()
        fleet = deployment.ctx.fleet
        assert fleet.get("simnode-0").processes == {"NS", "BenchDCI"}
        assert fleet.get("simnode-1").processes == {"NM_1"}
        assert fleet.get("simnode-2").processes == {"NM_2"}


class TestReservation:
    def test_start_publishes_nodelist(self, sim_home):
        deployment = build_from_text(reserved(3, granted=3))
        deployment.execute()
        lines = (sim_home / "nodelist").read_text().splitlines()
        assert lines == ["simnode-0", "simnode-1", "simnode-2"]

    def test_stop_truncates_nodelist(self, sim_home):
        deployment = build_from_text(reserved(3, granted=3))
        deployment.execute()
        deployment.execute_inverse()
        assert (sim_home / "nodelist").read_text() == ""

    def test_oversubscription_fails_at_the_extra_node(self, sim_home):
        deployment = build_from_text(reserved(3, granted=2))
        with pytest.raises(StageFailed) as err:
            deployment.execute()
        assert "node index 2" in str(err.value)
        states = deployment.assembly.status()
        # the reserved nodes deployed, the extra one could not
        assert states["nodes/node-2/jre"] == LifecycleState.UNINSTALLED

    def test_empty_grant_refused(self, sim_home):
        deployment = build_from_text(reserved(2, granted=0))
        with pytest.raises(StageFailed) as err:
            deployment.execute()
        assert "allocates no nodes" in str(err.value)

    def test_resource_request_parsing(self):
        sites = parse_resource_request("gdx=300|azur=100|grillon=50|lille=50")
        assert sites == [("gdx", 300), ("azur", 100), ("grillon", 50), ("lille", 50)]
        assert sum(count for _, count in sites) == 500

    @pytest.mark.parametrize("text", ["", "gdx", "gdx=", "=3", "gdx=3|", "gdx=three"])
    def test_malformed_requests_rejected(self, text):
        with pytest.raises(ConfigError):
            parse_resource_request(text)


class TestDynamicNodes:
    def test_nodes_resolve_through_published_list(self, sim_home, paper_config, reservation_config):
        """Reservation output feeds hostname resolution: after deploy the
        fleet holds exactly the granted nodes plus the frontend."""
        deployment = build_from_text(reserved(4, granted=4))
        deployment.execute()
        fleet = deployment.ctx.fleet
        assert sorted(fleet.nodes) == [
            "frontend.example",
            "simnode-0",
            "simnode-1",
            "simnode-2",
            "simnode-3",
        ]

    def test_preseeded_nodelist_works_without_reservation(self, sim_home, paper_config):
        seed_nodelist(sim_home, 2)
        deployment = build_from_text(
            "app = OpenCCM.Deployment {\n"
            "  nodes = {\n"
            "    hostname = DynamicHost(~/nodelist)\n"
            "    apply FOR(i,0,1) {\n"
            "      node-%{i} = Grid5000_NODE {\n"
            "        hostname = nodes/hostname\n"
            "        jre = Jre(/opt/java/jre)\n"
            "      }\n"
            "    }\n"
            "  }\n"
            "  services = {\n"
            "  }\n"
            "}\n"
        )
        deployment.execute()
        assert deployment.ctx.fleet.get("simnode-1").env["JAVA_HOME"] == "/opt/java/jre"
