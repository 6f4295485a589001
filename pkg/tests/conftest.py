import os

import pytest
from stochqaoa import config, FloatDtype, Platform
import stochqaoa

INSTANCES_DIR = os.path.join(os.path.dirname(__file__), "..", "instances")


@pytest.fixture()
def setup_test():
    # NOTE: running multiple JAX tests with different data types DOES NOT work
    # (jax_enable_x64 must be changed AT STARTUP)
    stochqaoa.config_called = False
    config(FloatDtype.float64, Platform.cpu)


@pytest.fixture()
def instances_dir():
    return INSTANCES_DIR
