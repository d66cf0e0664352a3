import numpy as np
import pytest

from zndstab import acceptance
from zndstab.eos import EosModel
from zndstab.profile import integrate_profile


@pytest.fixture(scope="session")
def stable_I():
    return acceptance.stable_type_I()


@pytest.fixture(scope="session")
def unstable_I():
    return acceptance.unstable_type_I()


@pytest.fixture(scope="session")
def prof_D():
    return acceptance.type_D()


@pytest.fixture(scope="session")
def inert():
    """q = 0: a frozen post-shock state."""
    return integrate_profile(EosModel(gamma=1.4, q=0.0, E_act=5.0), 3.0)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
