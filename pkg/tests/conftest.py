"""
测试共用夹具
"""

import pytest

from focusopt.config import default_config
from focusopt.models import close_db
from focusopt.numerics.quadrature import sphere_grid


@pytest.fixture(scope="session")
def grid3():
    return sphere_grid(3, 24)


@pytest.fixture(scope="session")
def grid2():
    return sphere_grid(2, 24)


@pytest.fixture
def config():
    cfg = default_config()
    cfg["run"]["threads"] = 1
    return cfg


@pytest.fixture
def db_config(tmp_path, config):
    config["storage"] = {"enabled": True, "db_path": str(tmp_path / "cache.db")}
    yield config
    close_db()
