"""
Map-Fusion Toolkit

Corrects visual(-inertial) odometry drift with intermittent GPS and road
maps from OpenStreetMap, using a sliding-window factor graph.
"""

__version__ = "0.1.0"
__author__ = "Map-Fusion Team"

from .config import ToolkitConfig
from .exceptions import MapFusionError
from .file_io import FileImporter
from .fusion import FusionSession
from .geom import GpsFix, LocalFrame, Pose
from .mapgraph import MapGraph, build_graph, load_map, parse_osm, serialize_map
from .matcher import MapMatcher

__all__ = [
    'ToolkitConfig',
    'MapFusionError',
    'FileImporter',
    'FusionSession',
    'GpsFix',
    'LocalFrame',
    'Pose',
    'MapGraph',
    'build_graph',
    'load_map',
    'parse_osm',
    'serialize_map',
    'MapMatcher',
]
