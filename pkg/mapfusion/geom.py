#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Rigid-body pose algebra and geodetic projection.

Poses use a translation in meters and a unit quaternion stored scalar-last
``(qx, qy, qz, qw)``, the order used by scipy and by trajectory files. Euler
angles follow the yaw-pitch-roll convention: yaw about Up, pitch about Left,
roll about Forward, applied as ``Rz(yaw) @ Ry(pitch) @ Rx(roll)``.
"""

import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial.transform import Rotation

from .exceptions import DegenerateHeadingError, ProjectionRangeWarning

logger = logging.getLogger(__name__)

EULER_SEQUENCE = 'ZYX'

# WGS84
WGS84_A = 6378137.0
WGS84_E2 = 6.69437999014e-3

PROJECTION_VALIDITY_M = 50_000.0

_IDENTITY_QUAT = (0.0, 0.0, 0.0, 1.0)


def _readonly(array: np.ndarray) -> np.ndarray:
    array.flags.writeable = False
    return array


def euler_to_quat(roll: float, pitch: float, yaw: float) -> np.ndarray:
    """Quaternion for the yaw-pitch-roll convention."""
    return Rotation.from_euler(EULER_SEQUENCE, [yaw, pitch, roll]).as_quat()


class Pose:
    """Immutable SE(3) pose.

    Parameters
    ----------
    x, y, z : float
        Translation in meters (East/North/Up in the global frame,
        Forward/Left/Up when used as a relative transform).
    quaternion : Sequence[float]
        Orientation as ``(qx, qy, qz, qw)``; normalized on construction.
    """

    __slots__ = ('_t', '_q')

    def __init__(self, x: float = 0.0, y: float = 0.0, z: float = 0.0,
                 quaternion: Sequence[float] = _IDENTITY_QUAT):
        q = np.array(quaternion, dtype=float)
        if q.shape != (4,):
            raise ValueError(f"quaternion must have 4 components, got shape {q.shape}")
        norm = np.linalg.norm(q)
        if not np.isfinite(norm) or norm < 1e-12:
            raise ValueError("quaternion must be finite and non-zero")
        if norm != 1.0:
            q = q / norm
        self._t = _readonly(np.array([x, y, z], dtype=float))
        self._q = _readonly(q)

    # ------------------------------------------------------------------
    # Constructors
    # ------------------------------------------------------------------
    @classmethod
    def identity(cls) -> 'Pose':
        return cls()

    @classmethod
    def from_euler(cls, x: float = 0.0, y: float = 0.0, z: float = 0.0,
                   roll: float = 0.0, pitch: float = 0.0, yaw: float = 0.0) -> 'Pose':
        """Build a pose from a translation and yaw-pitch-roll angles in radians."""
        return cls(x, y, z, euler_to_quat(roll, pitch, yaw))

    @classmethod
    def from_planar(cls, x: float, y: float, yaw: float) -> 'Pose':
        """Build a pose lying in the ground plane."""
        half = 0.5 * yaw
        return cls(x, y, 0.0, (0.0, 0.0, math.sin(half), math.cos(half)))

    @classmethod
    def from_rotation(cls, rotation: Rotation, translation: Sequence[float]) -> 'Pose':
        t = np.asarray(translation, dtype=float)
        return cls(t[0], t[1], t[2], rotation.as_quat())

    @classmethod
    def from_matrix(cls, matrix: np.ndarray) -> 'Pose':
        """Build a pose from a 4x4 homogeneous transform."""
        matrix = np.asarray(matrix, dtype=float)
        return cls.from_rotation(Rotation.from_matrix(matrix[:3, :3]), matrix[:3, 3])

    # ------------------------------------------------------------------
    # Accessors
    # ------------------------------------------------------------------
    @property
    def x(self) -> float:
        return float(self._t[0])

    @property
    def y(self) -> float:
        return float(self._t[1])

    @property
    def z(self) -> float:
        return float(self._t[2])

    @property
    def translation(self) -> np.ndarray:
        return self._t

    @property
    def quaternion(self) -> np.ndarray:
        return self._q

    @property
    def rotation(self) -> Rotation:
        return Rotation.from_quat(self._q)

    @property
    def rotation_matrix(self) -> np.ndarray:
        return self.rotation.as_matrix()

    @property
    def matrix(self) -> np.ndarray:
        m = np.eye(4)
        m[:3, :3] = self.rotation_matrix
        m[:3, 3] = self._t
        return m

    def euler(self) -> Tuple[float, float, float]:
        """Return ``(roll, pitch, yaw)`` in radians."""
        yaw, pitch, roll = self.rotation.as_euler(EULER_SEQUENCE)
        return float(roll), float(pitch), float(yaw)

    @property
    def roll(self) -> float:
        return self.euler()[0]

    @property
    def pitch(self) -> float:
        return self.euler()[1]

    @property
    def yaw(self) -> float:
        return self.euler()[2]

    # ------------------------------------------------------------------
    # Algebra
    # ------------------------------------------------------------------
    def compose(self, other: 'Pose') -> 'Pose':
        """Return ``self * other``."""
        rotation = self.rotation
        t = self._t + rotation.apply(other._t)
        return Pose.from_rotation(rotation * other.rotation, t)

    def __mul__(self, other: 'Pose') -> 'Pose':
        if not isinstance(other, Pose):
            return NotImplemented
        return self.compose(other)

    def inverse(self) -> 'Pose':
        rotation = self.rotation.inv()
        return Pose.from_rotation(rotation, -rotation.apply(self._t))

    def relative(self, other: 'Pose') -> 'Pose':
        """Transform taking this pose to ``other``, expressed in this pose's frame."""
        return self.inverse().compose(other)

    def scaled(self, scale: float) -> 'Pose':
        """Same rotation with the translation multiplied by ``scale``."""
        t = self._t * scale
        return Pose(t[0], t[1], t[2], self._q)

    def with_translation(self, x: float, y: float, z: float) -> 'Pose':
        return Pose(x, y, z, self._q)

    def allclose(self, other: 'Pose', atol: float = 1e-9) -> bool:
        """Translation and rotation agree within ``atol`` (quaternion sign ignored)."""
        if not np.allclose(self._t, other._t, atol=atol, rtol=0.0):
            return False
        return abs(abs(float(np.dot(self._q, other._q))) - 1.0) <= atol

    def __eq__(self, other) -> bool:
        if not isinstance(other, Pose):
            return NotImplemented
        return bool(np.array_equal(self._t, other._t) and np.array_equal(self._q, other._q))

    def __hash__(self):
        return hash((self._t.tobytes(), self._q.tobytes()))

    def __repr__(self):
        roll, pitch, yaw = self.euler()
        return (f"Pose(x={self.x:.3f}, y={self.y:.3f}, z={self.z:.3f}, "
                f"roll={math.degrees(roll):.2f}deg, pitch={math.degrees(pitch):.2f}deg, "
                f"yaw={math.degrees(yaw):.2f}deg)")


def compose(a: Pose, b: Pose) -> Pose:
    """SE(3) product ``a * b``."""
    return a.compose(b)


def relative(from_pose: Pose, to_pose: Pose) -> Pose:
    """``from_pose^-1 * to_pose``."""
    return from_pose.relative(to_pose)


def quat_angular_distance_deg(q1, q2):
    """Angular distance between orientations in degrees.

    Computed as ``arccos(2 <q1, q2>^2 - 1)``, which is symmetric and invariant
    to the sign of either quaternion. Broadcasts over leading axes.

    Parameters
    ----------
    q1, q2 : array_like
        Unit quaternions ``(..., 4)``.

    Returns
    -------
    float or np.ndarray
        Distance in ``[0, 180]``.
    """
    inner = np.sum(np.asarray(q1, dtype=float) * np.asarray(q2, dtype=float), axis=-1)
    cosine = np.clip(2.0 * inner * inner - 1.0, -1.0, 1.0)
    result = np.degrees(np.arccos(cosine))
    if np.ndim(result) == 0:
        return float(result)
    return result


def heading_between(p_prev: Sequence[float], p_next: Sequence[float]) -> float:
    """Heading of the segment ``p_prev -> p_next``.

    Measured from East, counter-clockwise, in ``(-pi, pi]``.

    Raises
    ------
    DegenerateHeadingError
        If the points coincide within 1e-9 m.
    """
    dx = float(p_next[0]) - float(p_prev[0])
    dy = float(p_next[1]) - float(p_prev[1])
    if math.hypot(dx, dy) <= 1e-9:
        raise DegenerateHeadingError(f"coincident points {tuple(p_prev)} and {tuple(p_next)}")
    heading = math.atan2(dy, dx)
    if heading <= -math.pi:
        heading = math.pi
    return heading


def headings_along(xy: np.ndarray) -> np.ndarray:
    """Heading of every vertex of a polyline.

    Vertex ``i`` takes the heading towards ``i + 1``; the last vertex copies
    its predecessor.
    """
    xy = np.asarray(xy, dtype=float)
    if len(xy) < 2:
        raise DegenerateHeadingError("a polyline needs at least two vertices")
    diffs = np.diff(xy, axis=0)
    if np.any(np.hypot(diffs[:, 0], diffs[:, 1]) <= 1e-9):
        raise DegenerateHeadingError("polyline contains coincident consecutive vertices")
    headings = np.arctan2(diffs[:, 1], diffs[:, 0])
    headings[headings <= -math.pi] = math.pi
    return np.append(headings, headings[-1])


def wrap_angle(angle):
    """Wrap to ``(-pi, pi]``."""
    wrapped = np.pi - np.mod(np.pi - np.asarray(angle, dtype=float), 2.0 * np.pi)
    if np.ndim(wrapped) == 0:
        return float(wrapped)
    return wrapped


def circular_mean(angles: Iterable[float]) -> float:
    angles = np.asarray(list(angles), dtype=float)
    return float(math.atan2(np.mean(np.sin(angles)), np.mean(np.cos(angles))))


@dataclass(frozen=True)
class GeoPoint:
    """WGS84 coordinate in degrees with altitude in meters."""

    latitude: float
    longitude: float
    altitude: float = 0.0

    def __post_init__(self):
        if not -90.0 <= self.latitude <= 90.0:
            raise ValueError(f"latitude out of range: {self.latitude}")
        if not -180.0 <= self.longitude <= 180.0:
            raise ValueError(f"longitude out of range: {self.longitude}")


@dataclass(frozen=True)
class LocalFrame:
    """Tangent-plane East/North/Up frame anchored at ``origin``.

    Uses the meridian and prime-vertical radii of curvature at the origin, so
    that the forward and inverse projections are exact inverses.
    """

    origin: GeoPoint
    _meters_per_rad_lat: float = field(init=False, repr=False)
    _meters_per_rad_lon: float = field(init=False, repr=False)

    def __post_init__(self):
        lat0 = math.radians(self.origin.latitude)
        sin_lat = math.sin(lat0)
        denom = 1.0 - WGS84_E2 * sin_lat * sin_lat
        meridian = WGS84_A * (1.0 - WGS84_E2) / denom ** 1.5
        prime_vertical = WGS84_A / math.sqrt(denom)
        h0 = self.origin.altitude
        object.__setattr__(self, '_meters_per_rad_lat', meridian + h0)
        object.__setattr__(self, '_meters_per_rad_lon', (prime_vertical + h0) * math.cos(lat0))

    def geo_to_enu(self, point: GeoPoint, strict: bool = False) -> Tuple[float, float, float]:
        east = math.radians(point.longitude - self.origin.longitude) * self._meters_per_rad_lon
        north = math.radians(point.latitude - self.origin.latitude) * self._meters_per_rad_lat
        up = point.altitude - self.origin.altitude
        distance = math.hypot(east, north)
        if distance > PROJECTION_VALIDITY_M:
            message = (f"point {point} is {distance / 1000.0:.1f} km from the frame origin, "
                       f"beyond the {PROJECTION_VALIDITY_M / 1000.0:.0f} km tangent-plane radius")
            if strict:
                raise ValueError(message)
            warnings.warn(message, ProjectionRangeWarning, stacklevel=2)
        return east, north, up

    def enu_to_geo(self, east: float, north: float, up: float = 0.0) -> GeoPoint:
        latitude = self.origin.latitude + math.degrees(north / self._meters_per_rad_lat)
        longitude = self.origin.longitude + math.degrees(east / self._meters_per_rad_lon)
        return GeoPoint(latitude, longitude, self.origin.altitude + up)


def geo_to_enu(frame: LocalFrame, point: GeoPoint) -> Tuple[float, float, float]:
    """Project a geodetic point into the frame's East/North/Up plane."""
    return frame.geo_to_enu(point)


def enu_to_geo(frame: LocalFrame, east: float, north: float, up: float = 0.0) -> GeoPoint:
    """Inverse of :func:`geo_to_enu`."""
    return frame.enu_to_geo(east, north, up)


@dataclass(frozen=True)
class GpsFix:
    """GPS position already projected into a local East/North/Up frame.

    ``std_m`` is the horizontal standard deviation reported by the receiver,
    or None when the stream carries no covariance.
    """

    t: float
    east: float
    north: float
    up: float = 0.0
    std_m: Optional[float] = None

    @property
    def xy(self) -> np.ndarray:
        return np.array([self.east, self.north])
