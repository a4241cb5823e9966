#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Readers for OSM extracts and built map files.
"""

import logging

from ..exceptions import MapLoadError, OsmParseError
from ..mapgraph.map_graph import MapGraph
from ..mapgraph.map_io import load_map
from ..mapgraph.osm_parser import RawOsmExtract, detect_format, parse_osm
from .base_reader import BaseReader

logger = logging.getLogger(__name__)

HDF5_SIGNATURE = b'\x89HDF\r\n\x1a\n'


class _BinaryReader(BaseReader):

    def __init__(self, file_path: str):
        super().__init__(file_path)
        self.raw: bytes = b''

    def open(self):
        if self.is_open:
            return
        try:
            with open(self.file_path, 'rb') as handle:
                self.raw = handle.read()
        except OSError as e:
            self.logger.error(f"Error opening {self.file_path}: {e}")
            raise
        self.is_open = True

    def close(self):
        self.raw = b''
        self.is_open = False

    @staticmethod
    def _head(file_path: str, size: int) -> bytes:
        try:
            with open(file_path, 'rb') as handle:
                return handle.read(size)
        except OSError:
            return b''


class MapFileReader(_BinaryReader):
    """Reader for maps written by :func:`mapfusion.mapgraph.save_map`."""

    EXTENSIONS = ('.map', '.h5', '.hdf5')

    @classmethod
    def can_read(cls, file_path: str) -> bool:
        return cls._head(file_path, len(HDF5_SIGNATURE)) == HDF5_SIGNATURE

    def read(self) -> bool:
        if not self.is_open:
            self.open()
        try:
            map_graph = load_map(self.raw)
        except MapLoadError as e:
            self.logger.error(f"Error loading map {self.file_path}: {e}")
            raise
        self.data['map'] = map_graph
        self.metadata['format'] = 'map'
        self.metadata['edges'] = len(map_graph.edges)
        self.metadata['waypoints'] = map_graph.num_waypoints
        return True

    def map_graph(self) -> MapGraph:
        if 'map' not in self.data:
            self.read()
        return self.data['map']


class OsmReader(_BinaryReader):
    """Reader for OSM XML and Overpass JSON extracts."""

    EXTENSIONS = ('.osm', '.xml', '.json')

    @classmethod
    def can_read(cls, file_path: str) -> bool:
        head = cls._head(file_path, 512).lstrip()
        if head.startswith(b'<'):
            return b'<osm' in head or head.startswith(b'<?xml')
        if head.startswith(b'{'):
            return cls.has_extension(file_path)
        return not head and cls.has_extension(file_path)

    def read(self) -> bool:
        if not self.is_open:
            self.open()
        osm_format = detect_format(self.file_path)
        try:
            extract = parse_osm(self.raw, osm_format)
        except OsmParseError as e:
            self.logger.error(f"Error parsing {self.file_path}: {e}")
            raise
        self.data['extract'] = extract
        self.metadata['format'] = f"osm-{osm_format}"
        self.metadata['ways'] = len(extract.ways)
        self.metadata['dropped_ways'] = extract.dropped_ways
        return True

    def extract(self) -> RawOsmExtract:
        if 'extract' not in self.data:
            self.read()
        return self.data['extract']
