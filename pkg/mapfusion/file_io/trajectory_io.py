#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Trajectory files: one pose per line, ``timestamp tx ty tz qx qy qz qw``.

Fields are separated by whitespace; blank lines and lines starting with
``#`` are ignored. The same format carries odometry, either as absolute
camera poses or as deltas between consecutive frames.
"""

import logging
import math
from pathlib import Path
from typing import Iterable, List, Optional, Tuple, Union

import numpy as np

from ..geom import Pose
from ..evaluation.trajectory import Trajectory
from .base_reader import TextFileReader

logger = logging.getLogger(__name__)

FIELDS = ('timestamp', 'tx', 'ty', 'tz', 'qx', 'qy', 'qz', 'qw')
ODOMETRY_KINDS = ('delta', 'absolute')

_NUMBER_FORMAT = '.17g'


class TrajectoryReader(TextFileReader):
    """Reader for whitespace-separated trajectory files."""

    EXTENSIONS = ('.txt', '.tum', '.traj')

    @classmethod
    def can_read(cls, file_path: str) -> bool:
        line = cls.first_content_line(file_path)
        if line is None:
            return cls.has_extension(file_path)
        tokens = line.split()
        if len(tokens) != len(FIELDS):
            return False
        try:
            [float(token) for token in tokens]
        except ValueError:
            return False
        return True

    def read(self) -> bool:
        timestamps: List[float] = []
        rows: List[List[float]] = []
        previous_line = None
        for number, line in self.content_lines():
            tokens = line.split()
            if len(tokens) != len(FIELDS):
                raise self.fail(f"expected {len(FIELDS)} fields "
                                f"({' '.join(FIELDS)}), got {len(tokens)}", number)
            try:
                values = [float(token) for token in tokens]
            except ValueError as e:
                raise self.fail(f"not a number: {e}", number)
            if not all(math.isfinite(v) for v in values):
                raise self.fail("non-finite value", number)
            if np.linalg.norm(values[4:]) < 1e-12:
                raise self.fail("zero quaternion", number)
            if timestamps and values[0] <= timestamps[-1]:
                raise self.fail(f"timestamp {values[0]!r} does not follow "
                                f"{timestamps[-1]!r} (line {previous_line})", number)
            timestamps.append(values[0])
            rows.append(values[1:])
            previous_line = number

        self.data['timestamps'] = np.array(timestamps)
        self.data['poses'] = [Pose(r[0], r[1], r[2], r[3:]) for r in rows]
        self.metadata['format'] = 'trajectory'
        self.metadata['pose_count'] = len(rows)
        self.logger.debug(f"Read {len(rows)} poses from {self.file_path}")
        return True

    def trajectory(self) -> Trajectory:
        if 'poses' not in self.data:
            self.read()
        return Trajectory(zip(self.data['timestamps'].tolist(), self.data['poses']))


def read_trajectory(path: Union[str, Path]) -> Trajectory:
    """Read a trajectory file.

    Raises
    ------
    FileFormatError
        If a line is ill-formed or timestamps do not increase; the message
        names the offending line.
    """
    with TrajectoryReader(str(path)) as reader:
        return reader.trajectory()


def format_pose_line(t: float, pose: Pose) -> str:
    values = [t, *pose.translation, *pose.quaternion]
    return ' '.join(format(float(v), _NUMBER_FORMAT) for v in values)


def write_trajectory(path: Union[str, Path], stamped: Iterable[Tuple[float, Pose]],
                     header: Optional[str] = None):
    """Write poses in trajectory format.

    Numbers use 17 significant digits so that a file read back reproduces the
    same floats.
    """
    lines = [f"# {header}"] if header else []
    lines.append('# ' + ' '.join(FIELDS))
    lines.extend(format_pose_line(t, pose) for t, pose in stamped)
    try:
        with open(path, 'w', encoding='utf-8', newline='\n') as handle:
            handle.write('\n'.join(lines) + '\n')
    except OSError as e:
        logger.error(f"Error writing trajectory {path}: {e}")
        raise
    logger.debug(f"Wrote {len(lines) - (2 if header else 1)} poses to {path}")


def odometry_from_trajectory(trajectory: Trajectory,
                             kind: str = 'delta') -> List[Tuple[float, Pose]]:
    """Odometry steps ``(t, delta)`` from a trajectory file's poses.

    Parameters
    ----------
    trajectory : Trajectory
        Poses as read from the file.
    kind : str
        ``'delta'`` when every line already holds the motion since the
        previous line, ``'absolute'`` for camera poses in the odometry frame.

    Returns
    -------
    List[Tuple[float, Pose]]
        One step per line; the first delta is the identity.
    """
    if kind not in ODOMETRY_KINDS:
        raise ValueError(f"odometry kind must be one of {', '.join(ODOMETRY_KINDS)}, got {kind!r}")
    stamped = list(trajectory)
    if not stamped:
        return []
    if kind == 'delta':
        return [(stamped[0][0], Pose.identity())] + stamped[1:]
    steps = [(stamped[0][0], Pose.identity())]
    for (_, previous), (t, current) in zip(stamped[:-1], stamped[1:]):
        steps.append((t, previous.relative(current)))
    return steps


def read_odometry(path: Union[str, Path], kind: str = 'delta') -> List[Tuple[float, Pose]]:
    """Read an odometry stream written in trajectory format."""
    return odometry_from_trajectory(read_trajectory(path), kind)
