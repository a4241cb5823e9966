"""
Road map ingestion, graph building and storage.
"""

from .graph_builder import GraphBuilder, build_graph
from .map_graph import MapGraph, MapPose, RoadEdge, query_nearby
from .map_io import load_map, load_map_file, map_to_json, save_map, serialize_map, write_map_json
from .osm_parser import OsmWay, RawOsmExtract, parse_osm

__all__ = [
    'GraphBuilder', 'build_graph', 'MapGraph', 'MapPose', 'RoadEdge', 'query_nearby',
    'load_map', 'load_map_file', 'map_to_json', 'save_map', 'serialize_map', 'write_map_json',
    'OsmWay', 'RawOsmExtract', 'parse_osm',
]
