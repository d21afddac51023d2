import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from agprop import DynGraph
from agprop.graphs import (complete_graph, gnp_graph, path_graph,
                           powerlaw_graph, star_graph)


@pytest.fixture
def k3():
    return DynGraph.build(*complete_graph(3))


@pytest.fixture
def path50():
    return DynGraph.build(*path_graph(50))


@pytest.fixture
def star100():
    return DynGraph.build(*star_graph(100))


@pytest.fixture
def gnp100():
    return DynGraph.build(*gnp_graph(100, 0.1, 42))


@pytest.fixture
def pl200():
    return DynGraph.build(*powerlaw_graph(200, 3, 7))
