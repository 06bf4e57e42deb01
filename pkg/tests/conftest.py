"""Shared fixtures: kind registry, sample configurations, seeded sim homes."""

import pathlib

import pytest

from gridforge.personalities import default_registry

DATA = pathlib.Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def registry():
    return default_registry()


@pytest.fixture
def paper_config():
    """The 501-node middleware deployment description."""
    return str(DATA / "paper.gdf")


@pytest.fixture
def reservation_config():
    """The grid reservation fragment (500 nodes across four sites)."""
    return str(DATA / "reservation.gdf")


@pytest.fixture
def sim_home(tmp_path, monkeypatch):
    """Point HOME at a tmpdir so ~/nodelist lands somewhere disposable."""
    monkeypatch.setenv("HOME", str(tmp_path))
    return tmp_path


def seed_nodelist(home: pathlib.Path, count: int, prefix: str = "simnode-") -> pathlib.Path:
    path = home / "nodelist"
    path.write_text("".join(f"{prefix}{i}\n" for i in range(count)))
    return path
