import math

import pytest

from hydroblow import profile as pr

M_STD = math.sqrt(3.0) / 2.0


@pytest.fixture(scope="session")
def std_params():
    """Parameters at the reference point m = sqrt(3)/2, H = 1."""
    return pr.params_from_m(M_STD, 1.0)


@pytest.fixture(scope="session")
def cheb_profile(std_params):
    return pr.build_profile(std_params, 128)


@pytest.fixture(scope="session")
def uniform_profile(std_params):
    return pr.build_profile(std_params, 256, grid_kind="uniform")
