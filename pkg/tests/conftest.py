import itertools

import pytest
from hypothesis import HealthCheck, settings

from topobench.graph import Network

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def cycle(n):
    return Network.from_links(n, [(i, (i + 1) % n) for i in range(n)])


def complete(n):
    return Network.from_links(n, list(itertools.combinations(range(n), 2)))


def bridge_graph():
    """Two K4s joined by the single link 3-4."""
    left = list(itertools.combinations(range(4), 2))
    right = [(a + 4, b + 4) for a, b in left]
    return Network.from_links(8, left + right + [(3, 4)])


def star(leaves):
    return Network.from_links(leaves + 1, [(0, i) for i in range(1, leaves + 1)])


def path(n):
    return Network.from_links(n, [(i, i + 1) for i in range(n - 1)])


@pytest.fixture
def c4():
    return cycle(4)


@pytest.fixture
def k4():
    return complete(4)
