#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Road graph construction from a raw OSM extract.

Each way is projected into a local tangent plane and cut into segments at the
intersections it passes through. Segments meeting at a vertex shared by
exactly two segment ends are chained, whichever way they come from, and each
chain is linearly interpolated and smoothed with a centered rolling average.
Vertices inside a chain move to their smoothed position; every edge starts
and ends on its vertices.
"""

import logging
from collections import Counter, defaultdict
from typing import Dict, List, NamedTuple, Optional, Tuple

import numpy as np

from ..config import LANE_WIDTH_M
from ..exceptions import DegenerateHeadingError, MapBuildError
from ..geom import GeoPoint, LocalFrame, headings_along
from ..utils.logging_config import LoggerMixin
from .map_graph import MapGraph, RoadEdge
from .osm_parser import RawOsmExtract

logger = logging.getLogger(__name__)

_COINCIDENT_M = 1e-9


def densify(xy: np.ndarray, step: float) -> Tuple[np.ndarray, np.ndarray]:
    """Linearly interpolate a polyline so no gap exceeds ``step``.

    Parameters
    ----------
    xy : np.ndarray
        Polyline vertices ``(N, 2)`` with no coincident neighbours.
    step : float
        Maximum spacing in meters.

    Returns
    -------
    dense : np.ndarray
        Interpolated polyline; the input vertices are kept.
    original : np.ndarray
        Row of ``dense`` holding each input vertex.
    """
    xy = np.asarray(xy, dtype=float).reshape(-1, 2)
    if len(xy) < 2:
        return xy.copy(), np.zeros(len(xy), dtype=np.int64)
    segments = np.diff(xy, axis=0)
    lengths = np.hypot(segments[:, 0], segments[:, 1])
    counts = np.maximum(np.ceil(lengths / step - 1e-9).astype(np.int64), 1)
    pieces = [start + (np.arange(n) / n)[:, None] * delta
              for start, delta, n in zip(xy[:-1], segments, counts)]
    pieces.append(xy[-1:])
    dense = np.concatenate(pieces)
    original = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
    return dense, original


def rolling_average(xy: np.ndarray, window: int, closed: bool = False) -> np.ndarray:
    """Centered rolling average whose window shrinks symmetrically at the ends.

    The first and last points are returned unchanged. A ``closed`` polyline
    repeats its first point at the end and is averaged around the ring
    instead.
    """
    xy = np.asarray(xy, dtype=float).reshape(-1, 2)
    if closed:
        return _ring_average(xy, window)
    n = len(xy)
    if window <= 1 or n < 3:
        return xy.copy()
    idx = np.arange(n)
    half = np.minimum(window // 2, np.minimum(idx, n - 1 - idx))
    lo = idx - half
    hi = idx + half + 1
    csum = np.vstack([np.zeros((1, 2)), np.cumsum(xy, axis=0)])
    smoothed = (csum[hi] - csum[lo]) / (hi - lo)[:, None]
    # cumulative sums drift by an ulp or two; the ends must stay bit-exact
    smoothed[0] = xy[0]
    smoothed[-1] = xy[-1]
    return smoothed


def _ring_average(xy: np.ndarray, window: int) -> np.ndarray:
    ring = xy[:-1]
    m = len(ring)
    if window <= 1 or m < 3:
        return xy.copy()
    half = min(window // 2, (m - 1) // 2)
    offsets = np.arange(-half, half + 1)
    smoothed = ring[(np.arange(m)[:, None] + offsets) % m].mean(axis=1)
    return np.vstack([smoothed, smoothed[:1]])


def drop_coincident(xy: np.ndarray) -> np.ndarray:
    """Remove points that coincide with their predecessor."""
    xy = np.asarray(xy, dtype=float).reshape(-1, 2)
    if len(xy) < 2:
        return xy
    gaps = np.hypot(*np.diff(xy, axis=0).T)
    keep = np.concatenate([[True], gaps > _COINCIDENT_M])
    return xy[keep]


class Segment(NamedTuple):
    """Raw piece of a way between two consecutive vertices."""
    way_id: int
    u: int
    v: int
    xy: np.ndarray
    lanes: int


# (segment index, traversed from v to u)
Chain = List[Tuple[int, bool]]


def chain_segments(segments: List[Segment]) -> List[Tuple[Chain, bool]]:
    """Group segments into chains through vertices shared by exactly two segment ends.

    Returns each chain in travel order together with a flag telling whether
    it closes on itself. A chain stops at dead ends and at intersections of
    three or more segment ends.
    """
    ends: Dict[int, List[Tuple[int, bool]]] = defaultdict(list)
    for i, segment in enumerate(segments):
        ends[segment.u].append((i, True))
        ends[segment.v].append((i, False))

    def other_end(vertex, arrival):
        entries = ends[vertex]
        if len(entries) != 2:
            return None
        return entries[1] if entries[0] == arrival else entries[0]

    visited = set()
    chains = []
    for start in range(len(segments)):
        if start in visited:
            continue
        visited.add(start)
        chain = [(start, False)]
        closed = False
        while True:
            index, backwards = chain[-1]
            segment = segments[index]
            nxt = other_end(segment.u if backwards else segment.v, (index, backwards))
            if nxt is None:
                break
            if nxt[0] in visited:
                closed = nxt == (start, True)
                break
            visited.add(nxt[0])
            chain.append((nxt[0], not nxt[1]))
        while not closed:
            index, backwards = chain[0]
            segment = segments[index]
            prev = other_end(segment.v if backwards else segment.u, (index, not backwards))
            if prev is None or prev[0] in visited:
                break
            visited.add(prev[0])
            chain.insert(0, prev)
        chains.append((chain, closed))
    return chains


class GraphBuilder(LoggerMixin):
    """Turn a :class:`RawOsmExtract` into a :class:`MapGraph`.

    Parameters
    ----------
    step : float
        Interpolation step in meters.
    smoothing_window : int
        Odd number of points in the rolling average.
    default_lanes : int
        Lane count of ways without a ``lanes`` tag.
    lane_width : float
        Width of one lane in meters.
    grid_cell_size : float
        Cell side of the waypoint grid.
    """

    def __init__(self, step: float = 1.0, smoothing_window: int = 5, default_lanes: int = 1,
                 lane_width: float = LANE_WIDTH_M, grid_cell_size: float = 20.0):
        if step <= 0:
            raise MapBuildError(f"interpolation step must be positive, got {step}")
        if smoothing_window < 1 or smoothing_window % 2 == 0:
            raise MapBuildError(f"smoothing window must be odd and >= 1, got {smoothing_window}")
        self.step = float(step)
        self.smoothing_window = int(smoothing_window)
        self.default_lanes = int(default_lanes)
        self.lane_width = float(lane_width)
        self.grid_cell_size = float(grid_cell_size)

    def _usable_ways(self, raw: RawOsmExtract) -> Dict[int, List[int]]:
        ways = {}
        for way_id in sorted(raw.ways):
            refs = raw.ways[way_id].node_ids
            # collapse repeated consecutive references
            refs = [n for i, n in enumerate(refs) if i == 0 or n != refs[i - 1]]
            if len(refs) < 2:
                self.logger.warning(f"Way {way_id} has fewer than two distinct nodes; dropped")
                continue
            ways[way_id] = refs
        return ways

    @staticmethod
    def _frame_for(raw: RawOsmExtract, node_ids) -> LocalFrame:
        lats = [raw.nodes[n].latitude for n in node_ids]
        lons = [raw.nodes[n].longitude for n in node_ids]
        return LocalFrame(GeoPoint(0.5 * (min(lats) + max(lats)), 0.5 * (min(lons) + max(lons))))

    def _segments(self, raw: RawOsmExtract, ways: Dict[int, List[int]],
                  projected: Dict[int, np.ndarray], vertex_ids) -> List[Segment]:
        segments = []
        for way_id, refs in ways.items():
            lanes = raw.ways[way_id].lane_count or self.default_lanes
            raw_xy = np.array([projected[n] for n in refs], dtype=float)
            # coincident consecutive nodes with distinct ids: keep the first
            keep = np.concatenate([[True], np.hypot(*np.diff(raw_xy, axis=0).T) > _COINCIDENT_M])
            refs = [n for n, k in zip(refs, keep) if k]
            raw_xy = raw_xy[keep]
            if len(refs) < 2:
                self.logger.warning(f"Way {way_id} has zero length; dropped")
                continue
            cuts = [i for i, n in enumerate(refs) if n in vertex_ids]
            for a, b in zip(cuts[:-1], cuts[1:]):
                segments.append(Segment(way_id, refs[a], refs[b], raw_xy[a:b + 1], lanes))
        return segments

    def _smooth_chains(self, segments: List[Segment],
                       vertices: Dict[int, np.ndarray]) -> List[np.ndarray]:
        """Smoothed dense polyline of every segment, oriented from ``u`` to ``v``.

        Vertices joining two segments of a chain are moved onto the smoothed
        curve in ``vertices``.
        """
        polylines: List[Optional[np.ndarray]] = [None] * len(segments)
        for chain, closed in chain_segments(segments):
            pieces = [segments[i].xy[::-1] if backwards else segments[i].xy
                      for i, backwards in chain]
            xy = np.concatenate([pieces[0]] + [p[1:] for p in pieces[1:]])
            bounds = np.cumsum([0] + [len(p) - 1 for p in pieces])
            dense, original = densify(xy, self.step)
            smoothed = rolling_average(dense, self.smoothing_window, closed=closed)
            for (i, backwards), a, b in zip(chain, bounds[:-1], bounds[1:]):
                piece = smoothed[original[a]:original[b] + 1]
                polylines[i] = piece[::-1] if backwards else piece
                segment = segments[i]
                entry = segment.v if backwards else segment.u
                if a > 0 or closed:
                    vertices[entry] = smoothed[original[a]].copy()
            if len(chain) > 1 or closed:
                self.logger.debug(f"Smoothed chain of {len(chain)} segments"
                                  f"{' (closed)' if closed else ''}")
        return polylines

    def _edge_polyline(self, xy: np.ndarray, start: np.ndarray,
                       end: np.ndarray) -> Optional[np.ndarray]:
        xy = drop_coincident(xy)
        if len(xy) < 2:
            return None
        dense, _ = densify(xy, self.step)
        dense = drop_coincident(dense)
        dense[0] = start
        dense[-1] = end
        return dense

    def build(self, raw: RawOsmExtract) -> MapGraph:
        """Build the road graph.

        Raises
        ------
        MapBuildError
            If no usable way remains.
        """
        if not raw.ways:
            raise MapBuildError("the OSM extract contains no road ways")
        ways = self._usable_ways(raw)
        if not ways:
            raise MapBuildError("every road way in the extract is degenerate")

        used_nodes = sorted({n for refs in ways.values() for n in refs})
        frame = self._frame_for(raw, used_nodes)
        projected = {n: frame.geo_to_enu(raw.nodes[n])[:2] for n in used_nodes}

        usage = Counter(n for refs in ways.values() for n in refs)
        vertex_ids = {n for n, count in usage.items() if count >= 2}
        for refs in ways.values():
            vertex_ids.update((refs[0], refs[-1]))
        vertices = {n: projected[n] for n in sorted(vertex_ids)}

        segments = self._segments(raw, ways, projected, vertex_ids)
        polylines = self._smooth_chains(segments, vertices)

        edges: Dict[int, RoadEdge] = {}
        for segment, smoothed in zip(segments, polylines):
            polyline = self._edge_polyline(smoothed, vertices[segment.u], vertices[segment.v])
            if polyline is None:
                self.logger.warning(f"Way {segment.way_id}: edge {segment.u}->{segment.v} "
                                    f"collapsed; dropped")
                continue
            try:
                headings = headings_along(polyline)
            except DegenerateHeadingError as e:
                self.logger.warning(f"Way {segment.way_id}: {e}; edge dropped")
                continue
            edge_id = len(edges)
            edges[edge_id] = RoadEdge(edge_id, segment.way_id, segment.u, segment.v, polyline,
                                      headings, segment.lanes, self.lane_width)

        if not edges:
            raise MapBuildError("no road edge survived graph construction")

        map_graph = MapGraph(frame, vertices, edges, self.grid_cell_size)
        self.logger.info(f"Built road graph: {len(vertices)} vertices, {len(edges)} edges, "
                         f"{map_graph.num_waypoints} waypoints")
        return map_graph


def build_graph(raw: RawOsmExtract, step: float = 1.0, smoothing_window: int = 5,
                default_lanes: int = 1, lane_width: float = LANE_WIDTH_M,
                grid_cell_size: float = 20.0) -> MapGraph:
    """Build a :class:`MapGraph` from a raw extract (see :class:`GraphBuilder`)."""
    return GraphBuilder(step, smoothing_window, default_lanes, lane_width,
                        grid_cell_size).build(raw)
