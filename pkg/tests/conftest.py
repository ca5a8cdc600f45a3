from pathlib import Path

import pytest

from pipeflow.scenario import parse_scenario

SCENARIO_DIR = Path(__file__).resolve().parents[1] / "scenarios"


@pytest.fixture(scope="session")
def sod_scenario():
    return parse_scenario(SCENARIO_DIR / "sod.cfg")


@pytest.fixture(scope="session")
def pipeline_scenario():
    return parse_scenario(SCENARIO_DIR / "pipeline.cfg")
