import pytest

import twindock as td


@pytest.fixture(scope="session")
def rudder_model():
    return td.fit_rudder_model(td.builtin_samples())


@pytest.fixture(scope="session")
def full_model(rudder_model):
    return td.FullForceModel(rudder=rudder_model)


@pytest.fixture(scope="session")
def allocator(full_model):
    return td.build_z(td.ActuatorLayout(), full_model)
