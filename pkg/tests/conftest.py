import random

import pytest
from hypothesis import HealthCheck, settings

from lib.symcalc import Form
from lib.vertex import SignVector, VertexModel
from lib.window import Truncation

settings.register_profile("engine", max_examples=25, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("engine")


@pytest.fixture
def rng() -> random.Random:
    return random.Random(20240101)


@pytest.fixture
def volume3() -> Form:
    return Form.basis(3, (1, 2, 3))


@pytest.fixture
def vertex1() -> VertexModel:
    return VertexModel(1, SignVector())


@pytest.fixture
def vertex2() -> VertexModel:
    return VertexModel(2, SignVector())


@pytest.fixture(scope="session")
def window12() -> Truncation:
    return Truncation(1, 2)
