import pytest

from pimsim.config import load_config


@pytest.fixture(scope="session")
def cfg():
    return load_config()


@pytest.fixture(scope="session")
def dpu(cfg):
    return cfg.dpu


@pytest.fixture(scope="session")
def table(cfg):
    return cfg.cost_table
