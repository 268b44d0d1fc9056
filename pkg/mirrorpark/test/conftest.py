import os
import dataclasses
import pytest
from mirrorpark.config import Config
from mirrorpark.utils.oracles import rngreset
from mirrorpark.test.baseline import nominal


def pytest_collection_modifyitems(config, items):
    if os.environ.get("MIRRORPARK_SLOW") == "1":
        return
    skip = pytest.mark.skip(reason="set MIRRORPARK_SLOW=1 to run")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


@pytest.fixture()
def config():
    return Config()


@pytest.fixture()
def vehicle(config):
    return config.vehicle()


@pytest.fixture()
def rng():
    return rngreset(0)


@pytest.fixture(params=["parallel", "reverse", "angle"])
def scenario(request, config):
    return nominal(request.param, config)


@pytest.fixture()
def open_scenario(config):
    """ reverse scenario with no infeasible regions """
    return dataclasses.replace(nominal("reverse", config), regions=())
