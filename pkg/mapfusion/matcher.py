#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Map matching under the combined Euclidean/angular metric.

The distance between an estimate and a candidate waypoint is
``D = E + A`` with ``E`` the horizontal distance in meters and ``A`` the
quaternion angular distance in degrees, so one degree weighs as much as
one meter. Roads are two-way: every waypoint is tried with its heading
and with the heading reversed.
"""

import logging
import math
from dataclasses import asdict, dataclass
from typing import Any, Dict, Optional

import numpy as np
from scipy.spatial.transform import Rotation

from .config import MatcherConfig
from .geom import EULER_SEQUENCE, Pose, quat_angular_distance_deg
from .mapgraph.map_graph import MapGraph, MapPose
from .utils.logging_config import LoggerMixin

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MatchResult:
    """Best map pose for an estimate.

    Attributes
    ----------
    map_pose : MapPose
        Matched waypoint, heading reversed when the vehicle drives against
        the digitization direction.
    euclidean_m : float
        Horizontal distance E.
    angular_deg : float
        Angular distance A.
    combined : float
        D = E + A.
    lateral_m : float
        Lateral offset L of the estimate in the road frame.
    road_width_m : float
        Width of the matched road.
    exceeds_road_width : bool
        ``lateral_m > road_width_m``.
    reversed : bool
        True when the reversed heading won.
    """

    map_pose: MapPose
    euclidean_m: float
    angular_deg: float
    combined: float
    lateral_m: float
    road_width_m: float
    exceeds_road_width: bool
    reversed: bool = False

    def as_row(self) -> Dict[str, Any]:
        """Flat record for CSV output."""
        row = {f"map_{k}": v for k, v in asdict(self.map_pose).items()}
        row.update({k: v for k, v in asdict(self).items() if k != 'map_pose'})
        return row


def lateral_offset(road_pose: MapPose, estimate: Pose) -> float:
    """Lateral distance of ``estimate`` from ``road_pose``.

    The road pose takes altitude, roll and pitch from the estimate, and the
    offset is the absolute ``y`` of the estimate expressed in that frame.
    """
    roll, pitch, _ = estimate.euler()
    candidate = road_pose.as_pose(estimate.z, roll, pitch)
    return abs(candidate.relative(estimate).y)


class MapMatcher(LoggerMixin):
    """Windowed nearest-waypoint search over a :class:`MapGraph`.

    Parameters
    ----------
    map_graph : MapGraph
        Map to match against.
    config : MatcherConfig, optional
        Search radii.
    """

    def __init__(self, map_graph: MapGraph, config: Optional[MatcherConfig] = None):
        self.map_graph = map_graph
        self.config = config or MatcherConfig()

    def _candidates(self, center, radius: float) -> np.ndarray:
        indices = self.map_graph.query_indices(center, radius)
        if len(indices) == 0 and self.config.widen_radius_m > radius:
            self.logger.debug(f"No waypoint within {radius:g} m of {tuple(center)}; "
                              f"widening to {self.config.widen_radius_m:g} m")
            indices = self.map_graph.query_indices(center, self.config.widen_radius_m)
        return indices

    def match(self, estimate: Pose, hint: Optional[MatchResult] = None,
              radius: Optional[float] = None) -> Optional[MatchResult]:
        """Closest waypoint to ``estimate`` under D = E + A.

        Parameters
        ----------
        estimate : Pose
            Vehicle pose in the map frame.
        hint : MatchResult, optional
            Previous match; the search window is centered on it.
        radius : float, optional
            Search radius; defaults to ``matcher.radius_m``.

        Returns
        -------
        MatchResult or None
            None when no waypoint lies within the widened radius.
        """
        radius = self.config.radius_m if radius is None else radius
        center = ((hint.map_pose.x, hint.map_pose.y) if hint is not None
                  else (estimate.x, estimate.y))
        indices = self._candidates(center, radius)
        if len(indices) == 0:
            return None

        graph = self.map_graph
        xy = graph.waypoint_xy[indices]
        euclidean = np.hypot(xy[:, 0] - estimate.x, xy[:, 1] - estimate.y)
        roll, pitch, _ = estimate.euler()

        n = len(indices)
        headings = graph.waypoint_heading[indices]
        yaws = np.concatenate([headings, headings + math.pi])
        angles = np.column_stack([yaws, np.full(2 * n, pitch), np.full(2 * n, roll)])
        quats = Rotation.from_euler(EULER_SEQUENCE, angles).as_quat()
        angular = np.atleast_1d(quat_angular_distance_deg(quats, estimate.quaternion))
        combined = np.tile(euclidean, 2) + angular

        edges = np.tile(graph.waypoint_edge[indices], 2)
        on_hint_edge = (edges == hint.map_pose.edge_id) if hint is not None else np.zeros(2 * n, bool)
        is_reversed = np.repeat([0, 1], n)
        order = np.lexsort((is_reversed, np.tile(graph.waypoint_index[indices], 2), edges,
                            ~on_hint_edge, combined))
        best = int(order[0])
        flat = int(indices[best % n])

        map_pose = graph.waypoint(flat)
        if is_reversed[best]:
            map_pose = map_pose.reversed()
        lateral = lateral_offset(map_pose, estimate)
        width = float(graph.waypoint_width[flat])
        result = MatchResult(map_pose, float(euclidean[best % n]), float(angular[best]),
                             float(combined[best]), lateral, width, lateral > width,
                             bool(is_reversed[best]))
        self.logger.debug(f"Matched ({estimate.x:.2f}, {estimate.y:.2f}) to edge "
                          f"{map_pose.edge_id}[{map_pose.index}]: D={result.combined:.3f}, "
                          f"L={lateral:.3f}")
        return result


def matcher_for(map_graph: MapGraph, config: Optional[MatcherConfig] = None) -> MapMatcher:
    """The matcher of ``map_graph`` for ``config``, created on first use."""
    config = config or MatcherConfig()
    matcher = map_graph._matchers.get(config)
    if matcher is None:
        matcher = map_graph._matchers[config] = MapMatcher(map_graph, config)
    return matcher


def match(map_graph: MapGraph, estimate: Pose, hint: Optional[MatchResult] = None,
          radius: float = 20.0, widen_radius: float = 50.0) -> Optional[MatchResult]:
    """Match ``estimate`` against ``map_graph`` (see :meth:`MapMatcher.match`)."""
    config = MatcherConfig(radius_m=radius, widen_radius_m=max(widen_radius, radius))
    return matcher_for(map_graph, config).match(estimate, hint)
