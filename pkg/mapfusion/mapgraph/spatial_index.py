#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Uniform grid index over map waypoints.
"""

import math
from typing import Dict, Tuple

import numpy as np

Cell = Tuple[int, int]


class GridIndex:
    """Bucket points into square cells of side ``cell_size``.

    Parameters
    ----------
    xy : np.ndarray
        Point coordinates ``(N, 2)``.
    cell_size : float
        Side of a grid cell in meters.
    """

    def __init__(self, xy: np.ndarray, cell_size: float):
        if cell_size <= 0:
            raise ValueError("cell_size must be positive")
        self.cell_size = float(cell_size)
        self.xy = np.asarray(xy, dtype=float).reshape(-1, 2)
        self.cells: Dict[Cell, np.ndarray] = {}
        if len(self.xy):
            keys = np.floor(self.xy / self.cell_size).astype(np.int64)
            order = np.lexsort((keys[:, 1], keys[:, 0]))
            sorted_keys = keys[order]
            boundaries = np.flatnonzero(np.any(np.diff(sorted_keys, axis=0) != 0, axis=1)) + 1
            for members in np.split(order, boundaries):
                cell = (int(keys[members[0], 0]), int(keys[members[0], 1]))
                self.cells[cell] = np.sort(members)

    @classmethod
    def from_cells(cls, xy: np.ndarray, cell_size: float,
                   cells: Dict[Cell, np.ndarray]) -> 'GridIndex':
        """Rebuild an index from stored cell membership."""
        index = cls.__new__(cls)
        index.cell_size = float(cell_size)
        index.xy = np.asarray(xy, dtype=float).reshape(-1, 2)
        index.cells = dict(cells)
        return index

    def query(self, center, radius: float) -> np.ndarray:
        """Indices of points within ``radius`` of ``center``, ascending."""
        if radius <= 0 or not self.cells:
            return np.empty(0, dtype=np.int64)
        cx, cy = float(center[0]), float(center[1])
        i0 = math.floor((cx - radius) / self.cell_size)
        i1 = math.floor((cx + radius) / self.cell_size)
        j0 = math.floor((cy - radius) / self.cell_size)
        j1 = math.floor((cy + radius) / self.cell_size)
        buckets = []
        if (i1 - i0 + 1) * (j1 - j0 + 1) > len(self.cells):
            # Window wider than the occupied grid: walk occupied cells instead
            for (i, j), members in self.cells.items():
                if i0 <= i <= i1 and j0 <= j <= j1:
                    buckets.append(members)
        else:
            for i in range(i0, i1 + 1):
                for j in range(j0, j1 + 1):
                    members = self.cells.get((i, j))
                    if members is not None:
                        buckets.append(members)
        if not buckets:
            return np.empty(0, dtype=np.int64)
        candidates = np.concatenate(buckets)
        d = self.xy[candidates] - (cx, cy)
        inside = candidates[np.hypot(d[:, 0], d[:, 1]) <= radius]
        return np.sort(inside)
