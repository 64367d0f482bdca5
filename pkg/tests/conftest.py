import pytest

from spdc_lab.cli import shipped_config_path
from spdc_lab.config import load_config


@pytest.fixture(scope="session")
def degenerate():
    return load_config(shipped_config_path("degenerate_810"))


@pytest.fixture(scope="session")
def nondegenerate():
    return load_config(shipped_config_path("nondegenerate_850_609"))
