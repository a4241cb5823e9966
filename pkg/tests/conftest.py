# -*- coding: utf-8 -*-

"""
Shared fixtures: synthetic road maps and seeded generators.
"""

import numpy as np
import pytest

from mapfusion.config import ToolkitConfig
from mapfusion.mapgraph.graph_builder import build_graph
from mapfusion.sim.synthetic_maps import crossroads, l_shape, rectangle_loop, straight_road


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def config():
    return ToolkitConfig()


@pytest.fixture(scope='session')
def straight_map():
    """A 200 m East-bound road, one edge."""
    return build_graph(straight_road(200.0))


@pytest.fixture(scope='session')
def long_straight_map():
    """A 1 km East-bound road with a vertex every 250 m."""
    return build_graph(straight_road(1000.0, vertex_spacing=250.0))


@pytest.fixture(scope='session')
def cross_map():
    return build_graph(crossroads(50.0))


@pytest.fixture(scope='session')
def l_map():
    return build_graph(l_shape(10.0), step=1.0, smoothing_window=1)


@pytest.fixture(scope='session')
def loop_map():
    """A closed 600 m x 400 m rectangle (2 km)."""
    return build_graph(rectangle_loop(600.0, 400.0))
