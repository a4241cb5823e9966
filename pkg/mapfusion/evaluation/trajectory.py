#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Timestamped pose sequences.
"""

import logging
from typing import Iterable, Iterator, List, Sequence, Tuple

import numpy as np

from ..exceptions import TimestampOrderError
from ..geom import Pose

logger = logging.getLogger(__name__)


class Trajectory:
    """Poses with strictly increasing timestamps.

    Parameters
    ----------
    stamped : Iterable[Tuple[float, Pose]]
        ``(timestamp, pose)`` pairs in time order.
    """

    def __init__(self, stamped: Iterable[Tuple[float, Pose]] = ()):
        items = list(stamped)
        self.timestamps = np.array([float(t) for t, _ in items], dtype=float)
        self.poses: List[Pose] = [p for _, p in items]
        if len(self.timestamps) > 1 and np.any(np.diff(self.timestamps) <= 0):
            bad = int(np.flatnonzero(np.diff(self.timestamps) <= 0)[0]) + 1
            raise TimestampOrderError(f"trajectory timestamps must increase strictly "
                                      f"(entry {bad}: {self.timestamps[bad]!r})")

    @classmethod
    def from_arrays(cls, timestamps: Sequence[float], translations: np.ndarray,
                    quaternions: np.ndarray) -> 'Trajectory':
        return cls((t, Pose(p[0], p[1], p[2], q))
                   for t, p, q in zip(timestamps, translations, quaternions))

    @property
    def positions(self) -> np.ndarray:
        if not self.poses:
            return np.empty((0, 3))
        return np.array([p.translation for p in self.poses])

    def transformed(self, transform: Pose) -> 'Trajectory':
        """Every pose premultiplied by ``transform``."""
        return Trajectory((t, transform.compose(p)) for t, p in self)

    def integrate_deltas(self) -> List[Pose]:
        """Relative motions between consecutive poses."""
        return [a.relative(b) for a, b in zip(self.poses[:-1], self.poses[1:])]

    def __iter__(self) -> Iterator[Tuple[float, Pose]]:
        return iter(zip(self.timestamps.tolist(), self.poses))

    def __len__(self):
        return len(self.poses)

    def __getitem__(self, index) -> Tuple[float, Pose]:
        return float(self.timestamps[index]), self.poses[index]

    def __repr__(self):
        if not self.poses:
            return "Trajectory(empty)"
        return (f"Trajectory({len(self)} poses, t=[{self.timestamps[0]:.3f}, "
                f"{self.timestamps[-1]:.3f}])")
