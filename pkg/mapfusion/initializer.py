#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Scale and heading initialization of an odometry stream from GPS.

Distances travelled by GPS and by odometry are accumulated over windows
bounded by measurement counts derived from a minimum distance and a minimum
speed. Every completed window yields one scale sample and one heading
sample; the median scale and circular-mean heading offset initialize the
session once enough samples are collected.
"""

import logging
import math
import statistics
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .config import InitConfig
from .exceptions import DegenerateHeadingError, MapFusionError, TimestampOrderError
from .geom import GpsFix, Pose, circular_mean, euler_to_quat, heading_between, wrap_angle
from .utils.logging_config import LoggerMixin

logger = logging.getLogger(__name__)

__all__ = ['InitConfig', 'InitState', 'measurement_counts', 'scale_sample', 'feed',
           'apply_initialization']


def measurement_counts(cfg: InitConfig) -> Tuple[int, int]:
    """Maximum GPS and odometry measurement counts per sample window.

    ``C_gps = ceil(md * 3.6 * f_gps / ms)`` and
    ``C_vo = round(C_gps * f_vo / f_gps)``.
    """
    # rounding first keeps 2.0000000000000004 from becoming 3
    c_gps = max(1, math.ceil(round(cfg.md_m * 3.6 * cfg.f_gps_hz / cfg.ms_kmh, 9)))
    c_vo = max(1, math.floor(c_gps * cfg.f_vo_hz / cfg.f_gps_hz + 0.5))
    return c_gps, c_vo


def scale_sample(d_gps: float, d_vo: float, t_gps: float, t_vo: float,
                 mode: str = 'linear-ratio') -> float:
    """One scale sample from accumulated distances and durations.

    ``linear-ratio`` returns ``(d_gps / d_vo) * (t_vo / t_gps)``;
    ``literal-squared`` returns ``(d_gps**2 / d_vo**2) * (t_vo / t_gps)``.
    """
    if d_vo <= 0:
        raise ValueError("odometry distance must be positive")
    time_ratio = t_vo / t_gps if t_gps > 0 and t_vo > 0 else 1.0
    ratio = d_gps / d_vo
    if mode == 'literal-squared':
        return ratio * ratio * time_ratio
    if mode == 'linear-ratio':
        return ratio * time_ratio
    raise ValueError(f"unknown scale mode {mode!r}")


class InitState(LoggerMixin):
    """Accumulators and collected samples of the initializer.

    Parameters
    ----------
    config : InitConfig
        Thresholds and stream frequencies.
    """

    def __init__(self, config: Optional[InitConfig] = None):
        self.config = config or InitConfig()
        self.c_gps, self.c_vo = measurement_counts(self.config)
        self.scale_samples: List[float] = []
        self.heading_samples: List[float] = []
        self.discarded_windows = 0
        self.scale: Optional[float] = None
        self.yaw_offset: Optional[float] = None
        self.first_fix: Optional[GpsFix] = None
        self.first_fix_vo_pose: Optional[Pose] = None

        self._last_t: Optional[float] = None
        self._last_vo_t: Optional[float] = None
        self._vo_pose = Pose.identity()
        self._last_fix: Optional[GpsFix] = None
        self._anchor_fix: Optional[GpsFix] = None
        self._anchor_vo_xy: Optional[np.ndarray] = None
        self._reset_window()

    @property
    def initialized(self) -> bool:
        return self.scale is not None

    @property
    def status(self) -> str:
        return 'initialized' if self.initialized else 'collecting'

    @property
    def samples_required(self) -> int:
        return 1 if self.config.fixed_scale is not None else self.config.samples

    def _reset_window(self):
        self.d_gps = 0.0
        self.d_vo = 0.0
        self.t_gps = 0.0
        self.t_vo = 0.0
        self.n_gps = 0
        self.n_vo = 0
        if self._last_fix is not None:
            self._anchor_fix = self._last_fix
            self._anchor_vo_xy = self._vo_pose.translation[:2].copy()

    def record_sample(self, scale: Optional[float], heading: Optional[float] = None):
        """Store one scale sample and optionally one heading offset sample."""
        if scale is not None:
            self.scale_samples.append(float(scale))
        if heading is not None:
            self.heading_samples.append(float(heading))
        self.logger.debug(f"Initialization sample {len(self.heading_samples)}: "
                          f"scale={scale}, heading={heading}")
        if len(self.heading_samples) >= self.samples_required:
            self._finish()

    def _finish(self):
        if self.config.fixed_scale is not None:
            self.scale = float(self.config.fixed_scale)
        else:
            self.scale = float(statistics.median(self.scale_samples))
        self.yaw_offset = circular_mean(self.heading_samples)
        self.logger.info(f"Initialized: scale={self.scale:.6g}, "
                         f"heading offset={math.degrees(self.yaw_offset):.3f} deg "
                         f"from {len(self.heading_samples)} samples "
                         f"({self.discarded_windows} windows discarded)")

    def initialize_directly(self, scale: float, yaw_offset: float, origin: GpsFix,
                            origin_vo_pose: Optional[Pose] = None):
        """Initialize without GPS samples."""
        if scale <= 0:
            raise MapFusionError(f"scale must be positive, got {scale}")
        self.scale = float(scale)
        self.yaw_offset = float(yaw_offset)
        self.first_fix = origin
        self.first_fix_vo_pose = origin_vo_pose or Pose.identity()

    def feed(self, t: float, gps: Optional[GpsFix] = None,
             vo_delta: Optional[Pose] = None) -> 'InitState':
        """Feed one time step of GPS and odometry.

        Raises
        ------
        TimestampOrderError
            If ``t`` decreases.
        """
        if self._last_t is not None and t < self._last_t:
            raise TimestampOrderError(f"timestamp {t} precedes {self._last_t}")
        self._last_t = t
        if self.initialized:
            return self

        # a delta covers the time since the previous step, GPS-only steps included
        if self._last_vo_t is None:
            self._last_vo_t = t
        if vo_delta is not None:
            self._vo_pose = self._vo_pose.compose(vo_delta)
            self.d_vo += float(np.linalg.norm(vo_delta.translation))
            self.n_vo += 1
            self.t_vo += t - self._last_vo_t
            self._last_vo_t = t

        if gps is None:
            return self

        if self.first_fix is None:
            self.first_fix = gps
            self.first_fix_vo_pose = self._vo_pose
        if self._last_fix is None:
            self._last_fix = gps
            self._reset_window()
            return self

        self.d_gps += float(np.hypot(gps.east - self._last_fix.east,
                                     gps.north - self._last_fix.north))
        self.t_gps += gps.t - self._last_fix.t
        self.n_gps += 1
        self._last_fix = gps

        within_counts = self.n_gps <= self.c_gps and self.n_vo <= self.c_vo
        if self.d_gps >= self.config.md_m and within_counts and self.d_vo > 0:
            self._emit(gps)
            self._reset_window()
        elif self.n_gps >= self.c_gps or self.n_vo >= self.c_vo:
            # too slow to cover md within the allowed counts
            self.discarded_windows += 1
            self.logger.debug(f"Discarding window at t={t}: d_gps={self.d_gps:.2f} m "
                              f"after {self.n_gps} fixes, {self.n_vo} odometry steps")
            self._reset_window()
        return self

    def _emit(self, gps: GpsFix):
        scale = None
        if self.config.fixed_scale is None:
            scale = scale_sample(self.d_gps, self.d_vo, self.t_gps, self.t_vo,
                                 self.config.scale_mode)
        heading = None
        try:
            gps_heading = heading_between(self._anchor_fix.xy, gps.xy)
            vo_heading = heading_between(self._anchor_vo_xy, self._vo_pose.translation[:2])
            heading = wrap_angle(gps_heading - vo_heading)
        except DegenerateHeadingError as e:
            self.logger.debug(f"No heading sample for this window: {e}")
        if heading is None:
            if scale is not None:
                self.scale_samples.append(scale)
            return
        self.record_sample(scale, heading)

    def alignment(self) -> Pose:
        """Rigid transform taking scaled local odometry into the map frame."""
        if not self.initialized:
            raise MapFusionError("initializer has not finished")
        rotation = euler_to_quat(0.0, 0.0, self.yaw_offset)
        rotated = Pose(0.0, 0.0, 0.0, rotation).compose(self.first_fix_vo_pose.scaled(self.scale))
        target = np.array([self.first_fix.east, self.first_fix.north, self.first_fix.up])
        offset = target - rotated.translation
        return Pose(offset[0], offset[1], offset[2], rotation)

    def apply_initialization(self, poses: Sequence[Pose]) -> List[Pose]:
        """Scale, rotate and translate a local odometry prefix into the map frame."""
        transform = self.alignment()
        return [transform.compose(p.scaled(self.scale)) for p in poses]

    def __repr__(self):
        return (f"InitState({self.status}, samples={len(self.heading_samples)}/"
                f"{self.samples_required}, scale={self.scale})")


def feed(state: InitState, t: float, gps: Optional[GpsFix] = None,
         vo_delta: Optional[Pose] = None) -> InitState:
    """Module-level form of :meth:`InitState.feed`."""
    return state.feed(t, gps, vo_delta)


def apply_initialization(state: InitState, poses: Sequence[Pose]) -> List[Pose]:
    """Module-level form of :meth:`InitState.apply_initialization`."""
    return state.apply_initialization(poses)
