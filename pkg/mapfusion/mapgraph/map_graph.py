#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Road graph built from OpenStreetMap: intersections are vertices, roads are
edges carrying dense, heading-annotated waypoints.
"""

import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, List, Mapping, Optional, Tuple

import networkx as nx
import numpy as np

from ..config import LANE_WIDTH_M
from ..geom import LocalFrame, Pose, euler_to_quat
from .spatial_index import GridIndex

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MapPose:
    """A waypoint on a road edge.

    Attributes
    ----------
    x, y : float
        Position in the map's local frame (meters).
    heading : float
        Road direction in radians, East = 0, counter-clockwise.
    edge_id : int
        Edge the waypoint belongs to.
    index : int
        Position of the waypoint within its edge.
    """

    x: float
    y: float
    heading: float
    edge_id: int
    index: int

    def reversed(self) -> 'MapPose':
        """The same waypoint traversed in the opposite direction."""
        heading = self.heading + math.pi
        if heading > math.pi:
            heading -= 2.0 * math.pi
        return MapPose(self.x, self.y, heading, self.edge_id, self.index)

    def as_pose(self, z: float = 0.0, roll: float = 0.0, pitch: float = 0.0) -> Pose:
        """Road pose with altitude, roll and pitch borrowed from an estimate."""
        return Pose(self.x, self.y, z, euler_to_quat(roll, pitch, self.heading))


class RoadEdge:
    """A road between two intersections.

    Parameters
    ----------
    edge_id : int
        Edge identifier.
    way_id : int
        OSM way the edge was cut from.
    u, v : int
        Start and end vertex identifiers.
    xy : np.ndarray
        Waypoint positions ``(N, 2)``.
    headings : np.ndarray
        Waypoint headings ``(N,)``.
    lane_count : int
        Number of lanes; the road width is ``lane_count * lane_width``.
    lane_width : float
        Width of one lane in meters.
    """

    __slots__ = ('edge_id', 'way_id', 'u', 'v', 'xy', 'headings', 'lane_count', 'lane_width')

    def __init__(self, edge_id: int, way_id: int, u: int, v: int, xy: np.ndarray,
                 headings: np.ndarray, lane_count: int, lane_width: float = LANE_WIDTH_M):
        if lane_count < 1:
            raise ValueError(f"lane_count must be positive, got {lane_count}")
        self.edge_id = int(edge_id)
        self.way_id = int(way_id)
        self.u = int(u)
        self.v = int(v)
        self.xy = np.array(xy, dtype=float).reshape(-1, 2)
        self.headings = np.array(headings, dtype=float).reshape(-1)
        self.lane_count = int(lane_count)
        self.lane_width = float(lane_width)
        self.xy.flags.writeable = False
        self.headings.flags.writeable = False

    @property
    def road_width(self) -> float:
        return self.lane_count * self.lane_width

    @property
    def waypoints(self) -> List[MapPose]:
        return [MapPose(float(x), float(y), float(h), self.edge_id, i)
                for i, ((x, y), h) in enumerate(zip(self.xy, self.headings))]

    def __len__(self):
        return len(self.xy)

    def with_lane_count(self, lane_count: int) -> 'RoadEdge':
        return RoadEdge(self.edge_id, self.way_id, self.u, self.v, self.xy, self.headings,
                        lane_count, self.lane_width)

    def same_as(self, other: 'RoadEdge') -> bool:
        return (self.edge_id == other.edge_id and self.way_id == other.way_id
                and self.u == other.u and self.v == other.v
                and self.lane_count == other.lane_count and self.lane_width == other.lane_width
                and np.array_equal(self.xy, other.xy)
                and np.array_equal(self.headings, other.headings))

    def __repr__(self):
        return (f"RoadEdge(id={self.edge_id}, way={self.way_id}, {self.u}->{self.v}, "
                f"waypoints={len(self)}, lanes={self.lane_count})")


class MapGraph:
    """Immutable road graph with a spatial index over every waypoint.

    Parameters
    ----------
    frame : LocalFrame
        Tangent-plane frame the coordinates live in.
    vertices : Mapping[int, Tuple[float, float]]
        Intersection id to position.
    edges : Mapping[int, RoadEdge]
        Edge id to road edge.
    grid_cell_size : float
        Cell side of the waypoint grid.
    grid : GridIndex, optional
        Prebuilt grid (used when loading from disk).
    """

    def __init__(self, frame: LocalFrame, vertices: Mapping[int, Tuple[float, float]],
                 edges: Mapping[int, RoadEdge], grid_cell_size: float = 20.0,
                 grid: Optional[GridIndex] = None):
        self.frame = frame
        self.vertices: Dict[int, Tuple[float, float]] = {
            int(k): (float(p[0]), float(p[1])) for k, p in sorted(vertices.items())
        }
        self.edges: Dict[int, RoadEdge] = dict(sorted(edges.items()))
        for edge in self.edges.values():
            if edge.u not in self.vertices or edge.v not in self.vertices:
                raise ValueError(f"edge {edge.edge_id} references an unknown vertex")

        self.topology = nx.MultiGraph()
        self.topology.add_nodes_from(self.vertices)
        for edge in self.edges.values():
            self.topology.add_edge(edge.u, edge.v, key=edge.edge_id)

        # Flat waypoint tables shared by the index and the matcher
        if self.edges:
            self.waypoint_xy = np.concatenate([e.xy for e in self.edges.values()])
            self.waypoint_heading = np.concatenate([e.headings for e in self.edges.values()])
            self.waypoint_edge = np.concatenate(
                [np.full(len(e), e.edge_id, dtype=np.int64) for e in self.edges.values()])
            self.waypoint_index = np.concatenate(
                [np.arange(len(e), dtype=np.int64) for e in self.edges.values()])
            self.waypoint_width = np.concatenate(
                [np.full(len(e), e.road_width) for e in self.edges.values()])
        else:
            self.waypoint_xy = np.empty((0, 2))
            self.waypoint_heading = np.empty(0)
            self.waypoint_edge = np.empty(0, dtype=np.int64)
            self.waypoint_index = np.empty(0, dtype=np.int64)
            self.waypoint_width = np.empty(0)
        for array in (self.waypoint_xy, self.waypoint_heading, self.waypoint_edge,
                      self.waypoint_index, self.waypoint_width):
            array.flags.writeable = False

        if grid is None:
            grid = GridIndex(self.waypoint_xy, grid_cell_size)
        self.grid = grid
        # MatcherConfig -> MapMatcher, filled by mapfusion.matcher.matcher_for
        self._matchers: Dict[Any, Any] = {}

    @property
    def num_waypoints(self) -> int:
        return len(self.waypoint_xy)

    def waypoint(self, flat_index: int) -> MapPose:
        """MapPose for a row of the flat waypoint table."""
        return MapPose(float(self.waypoint_xy[flat_index, 0]),
                       float(self.waypoint_xy[flat_index, 1]),
                       float(self.waypoint_heading[flat_index]),
                       int(self.waypoint_edge[flat_index]),
                       int(self.waypoint_index[flat_index]))

    def query_indices(self, center, radius: float) -> np.ndarray:
        """Flat indices of the waypoints within ``radius`` of ``center``."""
        return self.grid.query(center, radius)

    def query_nearby(self, center, radius: float) -> List[MapPose]:
        """Waypoints within ``radius`` meters of ``center``."""
        return [self.waypoint(i) for i in self.query_indices(center, radius)]

    def degree(self, vertex_id: int) -> int:
        return int(self.topology.degree(vertex_id))

    def with_lane_count(self, edge_id: int, lane_count: int) -> 'MapGraph':
        """Copy of the map with one edge's lane count replaced."""
        if edge_id not in self.edges:
            raise KeyError(f"unknown edge {edge_id}")
        edges = dict(self.edges)
        edges[edge_id] = edges[edge_id].with_lane_count(lane_count)
        return MapGraph(self.frame, self.vertices, edges, self.grid.cell_size, grid=self.grid)

    def __eq__(self, other) -> bool:
        if not isinstance(other, MapGraph):
            return NotImplemented
        return (self.frame == other.frame
                and self.vertices == other.vertices
                and self.edges.keys() == other.edges.keys()
                and all(e.same_as(other.edges[k]) for k, e in self.edges.items())
                and self.grid.cell_size == other.grid.cell_size)

    __hash__ = None

    def __repr__(self):
        return (f"MapGraph(vertices={len(self.vertices)}, edges={len(self.edges)}, "
                f"waypoints={self.num_waypoints})")


def query_nearby(map_graph: MapGraph, center, radius: float) -> List[MapPose]:
    """Waypoints of ``map_graph`` within ``radius`` meters of ``center``."""
    return map_graph.query_nearby(center, radius)
