#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Synthetic road extracts built from local polylines.

Polylines are given in meters around a geodetic origin and converted into a
:class:`RawOsmExtract`; points with identical coordinates become a single
shared node, which is how intersections are expressed.
"""

import logging
from typing import Dict, Iterable, Mapping, Optional, Sequence, Tuple
from xml.sax.saxutils import quoteattr

import numpy as np

from ..geom import GeoPoint, LocalFrame
from ..mapgraph.osm_parser import OsmWay, RawOsmExtract

logger = logging.getLogger(__name__)

DEFAULT_ORIGIN = GeoPoint(51.7520, -1.2577)

Polyline = Sequence[Tuple[float, float]]


def extract_from_polylines(polylines: Mapping[int, Polyline],
                           lanes: Optional[Mapping[int, int]] = None,
                           origin: GeoPoint = DEFAULT_ORIGIN) -> RawOsmExtract:
    """Build a road extract from local polylines keyed by way id."""
    frame = LocalFrame(origin)
    lanes = lanes or {}
    node_ids: Dict[Tuple[float, float], int] = {}
    extract = RawOsmExtract()
    for way_id in sorted(polylines):
        refs = []
        for x, y in polylines[way_id]:
            key = (round(float(x), 6), round(float(y), 6))
            if key not in node_ids:
                node_id = len(node_ids) + 1
                node_ids[key] = node_id
                extract.nodes[node_id] = frame.enu_to_geo(key[0], key[1])
            refs.append(node_ids[key])
        tags = {'lanes': str(lanes[way_id])} if way_id in lanes else {}
        extract.ways[way_id] = OsmWay(refs, tags)
    return extract


def straight_road(length: float = 100.0, heading_deg: float = 0.0,
                  vertex_spacing: float = 50.0, lanes: Optional[int] = None) -> RawOsmExtract:
    """A single straight way starting at the origin."""
    count = max(1, int(np.ceil(length / vertex_spacing)))
    s = np.linspace(0.0, length, count + 1)
    direction = np.array([np.cos(np.radians(heading_deg)), np.sin(np.radians(heading_deg))])
    points = [tuple(v) for v in s[:, None] * direction]
    return extract_from_polylines({1: points}, {1: lanes} if lanes else None)


def l_shape(leg: float = 10.0) -> RawOsmExtract:
    """One way running ``leg`` meters east, then ``leg`` meters north."""
    return extract_from_polylines({1: [(0.0, 0.0), (leg, 0.0), (leg, leg)]})


def crossroads(arm: float = 50.0) -> RawOsmExtract:
    """Two ways crossing at a shared node."""
    return extract_from_polylines({
        1: [(-arm, 0.0), (0.0, 0.0), (arm, 0.0)],
        2: [(0.0, -arm), (0.0, 0.0), (0.0, arm)],
    })


def rectangle_loop(width: float = 600.0, height: float = 400.0,
                   lanes: Optional[int] = None) -> RawOsmExtract:
    """A closed rectangular way, driven counter-clockwise from the origin."""
    corners = [(0.0, 0.0), (width, 0.0), (width, height), (0.0, height), (0.0, 0.0)]
    return extract_from_polylines({1: corners}, {1: lanes} if lanes else None)


def random_network(rng: np.random.Generator, ways: int = 4, extent: float = 200.0,
                   vertices_per_way: int = 4) -> RawOsmExtract:
    """Random polylines in a square, for property tests."""
    polylines = {}
    for way_id in range(1, ways + 1):
        start = rng.uniform(-extent / 2, extent / 2, size=2)
        steps = rng.normal(0.0, extent / 6, size=(vertices_per_way - 1, 2))
        points = np.vstack([start, start + np.cumsum(steps, axis=0)])
        polylines[way_id] = [tuple(p) for p in points]
    return extract_from_polylines(polylines)


def to_osm_xml(extract: RawOsmExtract, highway: str = 'residential') -> bytes:
    """Render an extract as an OSM XML document."""
    lines = ['<?xml version="1.0" encoding="UTF-8"?>', '<osm version="0.6" generator="mapfusion">']
    for node_id, point in sorted(extract.nodes.items()):
        lines.append(f'  <node id="{node_id}" lat="{point.latitude:.10f}" '
                     f'lon="{point.longitude:.10f}"/>')
    for way_id, way in sorted(extract.ways.items()):
        lines.append(f'  <way id="{way_id}">')
        lines.extend(f'    <nd ref="{ref}"/>' for ref in way.node_ids)
        tags: Iterable[Tuple[str, str]] = [('highway', highway)] + sorted(way.tags.items())
        lines.extend(f'    <tag k={quoteattr(k)} v={quoteattr(v)}/>' for k, v in tags)
        lines.append('  </way>')
    lines.append('</osm>')
    return ('\n'.join(lines) + '\n').encode('utf-8')
