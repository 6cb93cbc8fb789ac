from fractions import Fraction

import pytest
from hypothesis import settings

from bifurcat.model import ModelParams

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@pytest.fixture(scope="session")
def base():
    return ModelParams.base()


@pytest.fixture(scope="session")
def base_float(base):
    return base.as_float()


@pytest.fixture(scope="session")
def q_ii(base):
    return base.with_treatment(Fraction(51, 8), Fraction(43, 8))


@pytest.fixture(scope="session")
def t1(base):
    return base.with_treatment(6, Fraction("5.00625"))
