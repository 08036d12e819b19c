from importlib import resources
from pathlib import Path

import pytest


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return Path(resources.files("entflow") / "data")


@pytest.fixture()
def teleport_file(data_dir) -> Path:
    return data_dir / "teleport.espec"


@pytest.fixture()
def example_network_file(data_dir) -> Path:
    return data_dir / "example-network.espec"


@pytest.fixture()
def swap_file(data_dir) -> Path:
    return data_dir / "swap.espec"
