import numpy as np
import pytest

from finslerlab import metrics


@pytest.fixture(params=[2, 3], ids=["n2", "n3"])
def dim(request):
    return request.param


@pytest.fixture
def funk(dim):
    return metrics.get_metric("funk", dim)


@pytest.fixture
def sphere(dim):
    return metrics.get_metric("sphere", dim)


@pytest.fixture
def quartic(dim):
    return metrics.get_metric("quartic", dim)


@pytest.fixture
def euclidean(dim):
    return metrics.get_metric("euclidean", dim)


def states(metric, count, seed=0):
    return metrics.sample_states(metric, count, seed=seed)
