#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
File formats read and written by the toolkit.
"""

from .base_reader import BaseReader, TextFileReader
from .file_importer import FileFormatDetector, FileImporter, FileImporterFactory
from .gps_io import GpsReader, read_gps, write_gps
from .map_reader import MapFileReader, OsmReader
from .scenario_io import ScenarioReader, format_scenario, read_scenario, write_scenario
from .trajectory_io import (TrajectoryReader, odometry_from_trajectory, read_odometry,
                            read_trajectory, write_trajectory)

__all__ = [
    'BaseReader',
    'TextFileReader',
    'FileFormatDetector',
    'FileImporter',
    'FileImporterFactory',
    'GpsReader',
    'read_gps',
    'write_gps',
    'MapFileReader',
    'OsmReader',
    'ScenarioReader',
    'format_scenario',
    'read_scenario',
    'write_scenario',
    'TrajectoryReader',
    'odometry_from_trajectory',
    'read_odometry',
    'read_trajectory',
    'write_trajectory',
]
