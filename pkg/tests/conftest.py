import warnings

import pytest
from hypothesis import settings

settings.register_profile("lab", deadline=None, derandomize=True, print_blob=True)
settings.load_profile("lab")


@pytest.fixture(autouse=True)
def _quiet_quadrature():
    with warnings.catch_warnings():
        warnings.filterwarnings("ignore", message=".*roundoff.*")
        yield
