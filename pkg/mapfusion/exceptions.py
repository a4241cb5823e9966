#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Exception hierarchy for the Map-Fusion toolkit.
"""

from typing import Optional, Sequence


class MapFusionError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(MapFusionError):
    """Invalid or unknown configuration parameter."""


class DegenerateHeadingError(MapFusionError, ValueError):
    """Heading requested between two coincident points."""


class ProjectionRangeWarning(UserWarning):
    """Point lies outside the tangent-plane validity radius."""


class OsmParseError(MapFusionError):
    """Malformed OSM document.

    Parameters
    ----------
    message : str
        Description of the failure.
    offset : int
        Byte offset in the input where parsing failed.
    """

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


class MapBuildError(MapFusionError):
    """The road graph could not be built."""


class MapLoadError(MapFusionError):
    """A serialized map could not be loaded."""


class GaugeError(MapFusionError):
    """The factor graph has no prior or is disconnected."""


class SingularSystemError(MapFusionError):
    """The normal equations are singular.

    Parameters
    ----------
    message : str
        Description of the failure.
    dimensions : Sequence[str]
        Names of the unconstrained dimensions, e.g. ``"pose 3: z"``.
    """

    def __init__(self, message: str, dimensions: Sequence[str] = ()):
        self.dimensions = list(dimensions)
        if self.dimensions:
            message = f"{message}; unconstrained: {', '.join(self.dimensions)}"
        super().__init__(message)


class StationaryVehicleError(MapFusionError):
    """Displacement too small to orient a map prior."""


class TimestampOrderError(MapFusionError):
    """Measurements arrived out of order."""


class RouteError(MapFusionError):
    """A scenario route is not chain-connected."""


class AssociationError(MapFusionError):
    """No trajectory pairs could be associated."""


class AlignmentError(MapFusionError):
    """Too few pairs to align two trajectories."""


class FileFormatError(MapFusionError):
    """Ill-formed input file.

    Parameters
    ----------
    path : str
        File being read.
    line : int, optional
        1-based line number of the offending line.
    message : str
        Description of the failure.
    """

    def __init__(self, path: str, message: str, line: Optional[int] = None):
        where = f"{path}:{line}" if line is not None else str(path)
        super().__init__(f"{where}: {message}")
        self.path = path
        self.line = line
