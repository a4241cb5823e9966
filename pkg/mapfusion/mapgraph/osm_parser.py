#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
OpenStreetMap extract parsing (OSM XML and Overpass JSON).

Only road ways are kept; of their tags only ``lanes`` and ``oneway``
survive.
"""

import json
import logging
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from typing import BinaryIO, Dict, List, Optional, Union

from ..exceptions import OsmParseError
from ..geom import GeoPoint

logger = logging.getLogger(__name__)

# highway values that are not drivable roads
EXCLUDED_HIGHWAYS = frozenset({
    'footway', 'cycleway', 'path', 'steps', 'bridleway', 'pedestrian',
    'corridor', 'proposed', 'construction', 'platform',
})

KEPT_TAGS = ('lanes', 'oneway')


@dataclass
class OsmWay:
    """Ordered node references of a way and its retained tags."""

    node_ids: List[int]
    tags: Dict[str, str] = field(default_factory=dict)

    @property
    def lane_count(self) -> Optional[int]:
        """Parsed ``lanes`` tag, or None when absent or unreadable."""
        raw = self.tags.get('lanes')
        if raw is None:
            return None
        try:
            # "2;3" style values list alternatives; the widest wins
            lanes = max(int(float(part)) for part in raw.split(';') if part.strip())
        except ValueError:
            return None
        return lanes if lanes >= 1 else None


@dataclass
class RawOsmExtract:
    """Nodes and road ways read from an OSM document."""

    nodes: Dict[int, GeoPoint] = field(default_factory=dict)
    ways: Dict[int, OsmWay] = field(default_factory=dict)
    dropped_ways: int = 0

    def __len__(self):
        return len(self.ways)


def is_road(tags: Dict[str, str]) -> bool:
    highway = tags.get('highway')
    return highway is not None and highway not in EXCLUDED_HIGHWAYS


def _line_col_to_offset(data: bytes, line: int, column: int) -> int:
    lines = data.split(b'\n')
    offset = sum(len(chunk) + 1 for chunk in lines[:max(line - 1, 0)])
    return offset + column


def _finish(nodes: Dict[int, GeoPoint], ways: Dict[int, OsmWay]) -> RawOsmExtract:
    """Drop ways with missing nodes and keep only referenced nodes."""
    extract = RawOsmExtract()
    for way_id in sorted(ways):
        way = ways[way_id]
        missing = [n for n in way.node_ids if n not in nodes]
        if missing:
            extract.dropped_ways += 1
            logger.warning(f"Way {way_id} references {len(missing)} missing node(s); dropped")
            continue
        extract.ways[way_id] = way
    referenced = {n for way in extract.ways.values() for n in way.node_ids}
    extract.nodes = {n: nodes[n] for n in sorted(referenced)}
    logger.info(f"Parsed OSM extract: {len(extract.ways)} road ways, {len(extract.nodes)} nodes, "
                f"{extract.dropped_ways} dropped")
    return extract


def _parse_xml(data: bytes) -> RawOsmExtract:
    try:
        root = ET.fromstring(data)
    except ET.ParseError as e:
        line, column = e.position
        raise OsmParseError(f"malformed OSM XML: {e}", _line_col_to_offset(data, line, column))

    nodes: Dict[int, GeoPoint] = {}
    ways: Dict[int, OsmWay] = {}
    for child in root:
        if child.tag == 'node':
            try:
                nodes[int(child.attrib['id'])] = GeoPoint(float(child.attrib['lat']),
                                                          float(child.attrib['lon']))
            except (KeyError, ValueError) as e:
                logger.warning(f"Skipping unreadable node element: {e}")
        elif child.tag == 'way':
            tags = {tag.attrib['k']: tag.attrib['v'] for tag in child
                    if tag.tag == 'tag' and 'k' in tag.attrib and 'v' in tag.attrib}
            if not is_road(tags):
                continue
            try:
                way_id = int(child.attrib['id'])
                refs = [int(nd.attrib['ref']) for nd in child if nd.tag == 'nd']
            except (KeyError, ValueError) as e:
                logger.warning(f"Skipping unreadable way element: {e}")
                continue
            ways[way_id] = OsmWay(refs, {k: tags[k] for k in KEPT_TAGS if k in tags})
    return _finish(nodes, ways)


def _parse_json(data: bytes) -> RawOsmExtract:
    text = data.decode('utf-8')
    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        raise OsmParseError(f"malformed Overpass JSON: {e.msg}", len(text[:e.pos].encode('utf-8')))
    if not isinstance(document, dict):
        raise OsmParseError("Overpass JSON must be an object", 0)

    nodes: Dict[int, GeoPoint] = {}
    ways: Dict[int, OsmWay] = {}
    for element in document.get('elements', []):
        kind = element.get('type')
        if kind == 'node':
            try:
                nodes[int(element['id'])] = GeoPoint(float(element['lat']), float(element['lon']))
            except (KeyError, TypeError, ValueError) as e:
                logger.warning(f"Skipping unreadable node element: {e}")
        elif kind == 'way':
            tags = {str(k): str(v) for k, v in (element.get('tags') or {}).items()}
            if not is_road(tags):
                continue
            try:
                ways[int(element['id'])] = OsmWay([int(n) for n in element.get('nodes', [])],
                                                  {k: tags[k] for k in KEPT_TAGS if k in tags})
            except (KeyError, TypeError, ValueError) as e:
                logger.warning(f"Skipping unreadable way element: {e}")
    return _finish(nodes, ways)


def parse_osm(source: Union[bytes, BinaryIO], format: str = 'xml') -> RawOsmExtract:
    """Parse an OSM document into a road extract.

    Parameters
    ----------
    source : bytes or binary file object
        OSM XML or Overpass JSON content.
    format : str
        ``'xml'`` or ``'json'``.

    Returns
    -------
    RawOsmExtract
        Road ways (``highway`` present, footway/cycleway/path classes removed)
        and the nodes they reference.

    Raises
    ------
    OsmParseError
        If the document is malformed; carries the byte offset.
    """
    data = source if isinstance(source, (bytes, bytearray)) else source.read()
    data = bytes(data)
    if not data.strip():
        return RawOsmExtract()
    if format == 'xml':
        return _parse_xml(data)
    if format == 'json':
        return _parse_json(data)
    raise ValueError(f"unsupported OSM format: {format!r}")


def detect_format(path: str) -> str:
    """Guess the OSM format from a file name."""
    return 'json' if str(path).lower().endswith('.json') else 'xml'
