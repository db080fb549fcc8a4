import pytest

from clearnoc.calibration import default_calibration
from clearnoc.routing import compute_routes
from clearnoc.techlib import default_profiles
from clearnoc.topology import add_express_links, build_mesh


@pytest.fixture(scope="session")
def profiles():
    return default_profiles()


@pytest.fixture(scope="session")
def calib():
    return default_calibration()


@pytest.fixture(scope="session")
def mesh16(profiles):
    return build_mesh(16, profiles["electronic"])


@pytest.fixture(scope="session")
def hyppi_express16(profiles, mesh16):
    return {h: add_express_links(mesh16, h, profiles["hyppi"]) for h in (3, 5, 15)}


@pytest.fixture(scope="session")
def routes16(mesh16, hyppi_express16):
    tables = {"mesh": compute_routes(mesh16)}
    for h, topo in hyppi_express16.items():
        tables[h] = compute_routes(topo)
    return tables
