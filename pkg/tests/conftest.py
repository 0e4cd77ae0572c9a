import numpy as np
import pytest

from mupb.corpus import fixture_corpus


@pytest.fixture(scope="session")
def corpus():
    return fixture_corpus()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
