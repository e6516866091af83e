from __future__ import annotations

import pytest

from quadplan.config import packaged_data_path
from quadplan.llm_provider import MockProvider
from quadplan.prompting import default_template
from quadplan.waypoint_world import load_world


@pytest.fixture(scope="session")
def world():
    return load_world(packaged_data_path("tower2_floor9.json"))


@pytest.fixture(scope="session")
def template(world):
    return default_template(world)


@pytest.fixture(scope="session")
def mock_provider(world):
    return MockProvider(world)
