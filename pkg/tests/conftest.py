import numpy as np
import pytest
from hypothesis import settings

from canondbar.geometry import ellipse, unit_disc
from canondbar.product import ProductDomain

settings.register_profile("ci", max_examples=25, deadline=None)
settings.load_profile("ci")


@pytest.fixture(scope="session")
def disc():
    return unit_disc()


@pytest.fixture(scope="session")
def ell():
    return ellipse(2.0, 1.0)


@pytest.fixture(scope="session")
def bidisc():
    return ProductDomain((unit_disc(), unit_disc()))


@pytest.fixture(scope="session")
def tridisc():
    return ProductDomain((unit_disc(),) * 3)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
