import pytest

from inet import parse
from inet.fixtures import fixture_text


@pytest.fixture
def omega_system():
    return parse(fixture_text("omega"))


@pytest.fixture
def add_system():
    return parse(fixture_text("add"))
