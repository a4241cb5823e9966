#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Binary map files.

A map file is an HDF5 container. The root carries the attributes ``magic``,
``format_version``, ``origin`` (latitude, longitude, altitude) and
``grid_cell_size``; the tables are flat root datasets:

- ``vertex_id`` (V,), ``vertex_xy`` (V, 2)
- ``edge_id``, ``edge_way``, ``edge_u``, ``edge_v``, ``edge_lanes`` (E,),
  ``edge_lane_width`` (E,), ``edge_offsets`` (E + 1,)
- ``waypoint_xy`` (W, 2), ``waypoint_heading`` (W,)
- ``grid_cells`` (C, 2), ``grid_offsets`` (C + 1,), ``grid_members`` (W,)

Edge ``k`` owns waypoint rows ``edge_offsets[k]:edge_offsets[k + 1]``.
"""

import io
import json
import logging
from pathlib import Path
from typing import Any, Dict, Union

import h5py
import numpy as np

from ..exceptions import MapLoadError
from ..geom import GeoPoint, LocalFrame
from .map_graph import MapGraph, RoadEdge
from .spatial_index import GridIndex

logger = logging.getLogger(__name__)

MAGIC = 'MAPFUSION-MAP'
FORMAT_VERSION = 1

_DATASETS = (
    'vertex_id', 'vertex_xy', 'edge_id', 'edge_way', 'edge_u', 'edge_v', 'edge_lanes',
    'edge_lane_width', 'edge_offsets', 'waypoint_xy', 'waypoint_heading',
    'grid_cells', 'grid_offsets', 'grid_members',
)


def _tables(map_graph: MapGraph) -> Dict[str, np.ndarray]:
    edges = list(map_graph.edges.values())
    lengths = np.array([len(e) for e in edges], dtype=np.int64)
    cells = sorted(map_graph.grid.cells)
    cell_members = [map_graph.grid.cells[c] for c in cells]
    return {
        'vertex_id': np.array(list(map_graph.vertices), dtype=np.int64),
        'vertex_xy': np.array(list(map_graph.vertices.values()), dtype=float).reshape(-1, 2),
        'edge_id': np.array([e.edge_id for e in edges], dtype=np.int64),
        'edge_way': np.array([e.way_id for e in edges], dtype=np.int64),
        'edge_u': np.array([e.u for e in edges], dtype=np.int64),
        'edge_v': np.array([e.v for e in edges], dtype=np.int64),
        'edge_lanes': np.array([e.lane_count for e in edges], dtype=np.int64),
        'edge_lane_width': np.array([e.lane_width for e in edges], dtype=float),
        'edge_offsets': np.concatenate([[0], np.cumsum(lengths)]).astype(np.int64),
        'waypoint_xy': np.asarray(map_graph.waypoint_xy, dtype=float).reshape(-1, 2),
        'waypoint_heading': np.asarray(map_graph.waypoint_heading, dtype=float),
        'grid_cells': np.array(cells, dtype=np.int64).reshape(-1, 2),
        'grid_offsets': np.concatenate(
            [[0], np.cumsum([len(m) for m in cell_members])]).astype(np.int64),
        'grid_members': (np.concatenate(cell_members) if cell_members
                         else np.empty(0)).astype(np.int64),
    }


def serialize_map(map_graph: MapGraph) -> bytes:
    """Encode a map as HDF5 bytes.

    Parameters
    ----------
    map_graph : MapGraph
        Map to encode.

    Returns
    -------
    bytes
        HDF5 image of the map.
    """
    buffer = io.BytesIO()
    origin = map_graph.frame.origin
    with h5py.File(buffer, 'w', track_order=True) as handle:
        handle.attrs['magic'] = MAGIC
        handle.attrs['format_version'] = FORMAT_VERSION
        handle.attrs['origin'] = np.array([origin.latitude, origin.longitude, origin.altitude])
        handle.attrs['grid_cell_size'] = map_graph.grid.cell_size
        for name, table in _tables(map_graph).items():
            handle.create_dataset(name, data=table, track_times=False)
    data = buffer.getvalue()
    logger.debug(f"Serialized map: {len(data)} bytes, {len(map_graph.edges)} edges")
    return data


def _read(handle: h5py.File) -> MapGraph:
    magic = handle.attrs.get('magic')
    if isinstance(magic, bytes):
        magic = magic.decode('utf-8')
    if magic != MAGIC:
        raise MapLoadError(f"not a map file (magic {magic!r})")
    version = int(handle.attrs.get('format_version', -1))
    if version != FORMAT_VERSION:
        raise MapLoadError(f"unsupported map format version {version} "
                           f"(expected {FORMAT_VERSION})")
    missing = [name for name in _DATASETS if name not in handle]
    if missing:
        raise MapLoadError(f"map file is missing datasets: {', '.join(missing)}")
    t = {name: handle[name][...] for name in _DATASETS}

    lat, lon, alt = (float(v) for v in handle.attrs['origin'])
    frame = LocalFrame(GeoPoint(lat, lon, alt))
    vertices = {int(k): (float(x), float(y)) for k, (x, y) in zip(t['vertex_id'], t['vertex_xy'])}

    offsets = t['edge_offsets']
    if len(offsets) != len(t['edge_id']) + 1 or offsets[-1] != len(t['waypoint_xy']):
        raise MapLoadError("edge offsets do not match the waypoint table")
    edges = {}
    for k, edge_id in enumerate(t['edge_id']):
        rows = slice(offsets[k], offsets[k + 1])
        edges[int(edge_id)] = RoadEdge(edge_id, t['edge_way'][k], t['edge_u'][k], t['edge_v'][k],
                                       t['waypoint_xy'][rows], t['waypoint_heading'][rows],
                                       int(t['edge_lanes'][k]), float(t['edge_lane_width'][k]))

    grid_offsets = t['grid_offsets']
    if len(grid_offsets) != len(t['grid_cells']) + 1:
        raise MapLoadError("grid offsets do not match the grid cell table")
    members = np.split(t['grid_members'], grid_offsets[1:-1])
    cells = {(int(i), int(j)): m for (i, j), m in zip(t['grid_cells'], members)}
    cell_size = float(handle.attrs['grid_cell_size'])
    grid = GridIndex.from_cells(t['waypoint_xy'], cell_size, cells)
    return MapGraph(frame, vertices, edges, cell_size, grid=grid)


def load_map(data: bytes) -> MapGraph:
    """Decode bytes produced by :func:`serialize_map`.

    Raises
    ------
    MapLoadError
        If the data is truncated, corrupted or of another version.
    """
    try:
        with h5py.File(io.BytesIO(data), 'r') as handle:
            return _read(handle)
    except MapLoadError:
        raise
    except (OSError, KeyError, ValueError, TypeError, IndexError) as e:
        raise MapLoadError(f"cannot decode map: {e}") from e


def save_map(map_graph: MapGraph, path: Union[str, Path]):
    """Write a map file."""
    try:
        Path(path).write_bytes(serialize_map(map_graph))
        logger.info(f"Saved map to {path}")
    except OSError as e:
        logger.error(f"Error writing map file {path}: {e}")
        raise


def load_map_file(path: Union[str, Path]) -> MapGraph:
    """Read a map file written by :func:`save_map`."""
    try:
        data = Path(path).read_bytes()
    except OSError as e:
        logger.error(f"Error reading map file {path}: {e}")
        raise
    map_graph = load_map(data)
    logger.debug(f"Loaded map {path}: {map_graph!r}")
    return map_graph


def map_to_json(map_graph: MapGraph) -> Dict[str, Any]:
    """Plain-data view of a map for inspection."""
    origin = map_graph.frame.origin
    return {
        'format_version': FORMAT_VERSION,
        'origin': {'latitude': origin.latitude, 'longitude': origin.longitude,
                   'altitude': origin.altitude},
        'vertices': [{'id': k, 'x': x, 'y': y, 'degree': map_graph.degree(k)}
                     for k, (x, y) in map_graph.vertices.items()],
        'edges': [{'id': e.edge_id, 'way': e.way_id, 'u': e.u, 'v': e.v,
                   'lanes': e.lane_count, 'road_width': e.road_width,
                   'waypoints': [[float(x), float(y), float(h)]
                                 for (x, y), h in zip(e.xy, e.headings)]}
                  for e in map_graph.edges.values()],
    }


def write_map_json(map_graph: MapGraph, path: Union[str, Path]):
    """Write :func:`map_to_json` output as an indented JSON file."""
    with open(path, 'w', encoding='utf-8') as handle:
        json.dump(map_to_json(map_graph), handle, indent=2)
    logger.info(f"Wrote map debug JSON to {path}")
