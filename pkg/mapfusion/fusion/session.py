#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Online fusion of odometry, GPS and road-map priors.

Before initialization, odometry poses and GPS fixes are buffered and fed to
the initializer. Once scale and heading are known, the buffered prefix is
aligned into the map frame and every further step appends one pose linked
to its predecessor by a scaled odometry factor. GPS fixes, map-alignment
priors and uncertainty caps are added as unary priors; the graph is
re-optimized only when one of them was added, since a new odometry factor
alone extends the optimum exactly.
"""

import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from ..config import ToolkitConfig
from ..exceptions import (GaugeError, MapFusionError, SingularSystemError,
                          StationaryVehicleError, TimestampOrderError)
from ..geom import GpsFix, Pose
from ..initializer import InitState
from ..mapgraph.map_graph import MapGraph
from ..matcher import MatchResult, matcher_for
from ..utils.logging_config import LoggerMixin
from .factors import between_kernel
from .noise import NoiseModel, map_prior_noise
from .optimizer import FusionGraph, OptimizationResult, optimize

logger = logging.getLogger(__name__)


def horizontal_std(covariance: np.ndarray) -> float:
    """Worst-axis horizontal standard deviation of a 6x6 pose covariance."""
    block = 0.5 * (covariance[:2, :2] + covariance[:2, :2].T)
    return float(math.sqrt(max(float(np.linalg.eigvalsh(block).max()), 0.0)))


@dataclass
class StepRecord:
    """Per-step debug record of a :class:`FusionSession`."""

    t: float
    pose: Optional[Pose]
    initialized: bool
    std_m: float = float('nan')
    gps_prior: bool = False
    map_prior: bool = False
    cap_prior: bool = False
    optimized: bool = False
    converged: bool = True
    match: Optional[MatchResult] = None

    def as_row(self) -> Dict[str, Any]:
        row = {'t': self.t, 'initialized': self.initialized}
        if self.pose is not None:
            roll, pitch, yaw = self.pose.euler()
            row.update(x=self.pose.x, y=self.pose.y, z=self.pose.z,
                       roll=roll, pitch=pitch, yaw=yaw)
        else:
            row.update(x=np.nan, y=np.nan, z=np.nan, roll=np.nan, pitch=np.nan, yaw=np.nan)
        row.update(std_m=self.std_m, gps_prior=self.gps_prior, map_prior=self.map_prior,
                   cap_prior=self.cap_prior, optimized=self.optimized, converged=self.converged)
        if self.match is not None:
            row.update(lateral_m=self.match.lateral_m, road_width_m=self.match.road_width_m,
                       combined=self.match.combined, edge_id=self.match.map_pose.edge_id)
        else:
            row.update(lateral_m=np.nan, road_width_m=np.nan, combined=np.nan, edge_id=-1)
        return row


class FusionSession(LoggerMixin):
    """Single-owner fusion state.

    Parameters
    ----------
    map_graph : MapGraph, optional
        Road map; without it no map priors are added and the cap uses the
        configured default road width.
    config : ToolkitConfig, optional
        Toolkit configuration.
    """

    def __init__(self, map_graph: Optional[MapGraph] = None,
                 config: Optional[ToolkitConfig] = None):
        self.config = config or ToolkitConfig()
        self.map_graph = map_graph
        self.matcher = None
        if map_graph is not None:
            self.matcher = matcher_for(map_graph, self.config.matcher)
        self.init_state = InitState(self.config.init)
        self.graph = FusionGraph()
        self.records: List[StepRecord] = []
        self.online: List[Tuple[float, Pose]] = []
        self.degraded = False
        self.marginal: Optional[np.ndarray] = None
        self.hint: Optional[MatchResult] = None
        self.map_prior_log: List[Tuple[float, int]] = []

        self._last_t: Optional[float] = None
        self._local: List[Tuple[float, Pose]] = []
        self._buffered_fixes: List[Tuple[int, GpsFix]] = []
        self._times: Dict[int, float] = {}
        self._frozen: Dict[int, Pose] = {}
        self._armed = True
        self._delocalized = False

    @property
    def initialized(self) -> bool:
        return len(self.graph) > 0

    @property
    def scale(self) -> Optional[float]:
        return self.init_state.scale

    @property
    def default_road_width(self) -> float:
        return self.config.mapgraph.default_lanes * self.config.mapgraph.lane_width_m

    # ------------------------------------------------------------------
    # Noise models
    # ------------------------------------------------------------------
    def _odometry_noise(self, delta: Pose, initialized: bool) -> NoiseModel:
        fusion = self.config.fusion
        if not initialized:
            return NoiseModel.isotropic(fusion.odom_pre_pos_std_m,
                                        math.radians(fusion.odom_pre_rot_std_deg))
        step = float(np.linalg.norm(delta.translation))
        return NoiseModel.isotropic(fusion.odom_post_pos_std_m + fusion.odom_post_pos_std_frac * step,
                                    math.radians(fusion.odom_post_rot_std_deg))

    def _gps_noise(self, fix: GpsFix) -> NoiseModel:
        sigma = fix.std_m if fix.std_m is not None else self.config.fusion.gps_std_m
        return NoiseModel.from_sigmas([sigma, sigma] + [math.inf] * 4)

    def _anchor_noise(self) -> NoiseModel:
        fusion = self.config.fusion
        rot = math.radians(fusion.anchor_rot_std_deg)
        return NoiseModel.from_sigmas([fusion.gps_std_m, fusion.gps_std_m,
                                       fusion.anchor_z_std_m, rot, rot, rot])

    @staticmethod
    def _gps_measurement(fix: GpsFix, estimate: Pose) -> Pose:
        return Pose(fix.east, fix.north, estimate.z, estimate.quaternion)

    # ------------------------------------------------------------------
    # Optimization helpers
    # ------------------------------------------------------------------
    def _optimize(self) -> Optional[OptimizationResult]:
        fusion = self.config.fusion
        try:
            result = optimize(self.graph, max_iterations=fusion.max_iterations,
                              step_tol=fusion.step_tol)
        except (SingularSystemError, GaugeError) as e:
            self.logger.error(f"Optimization failed: {e}")
            self.degraded = True
            return None
        if not result.converged:
            self.degraded = True
        return result

    def _slide_window(self):
        window = self.config.fusion.window
        while window and len(self.graph) > window:
            oldest = self.graph.first_id
            pose = self.graph.pose(oldest)
            if not self.graph.marginalize_oldest():
                break
            self._frozen[oldest] = pose

    # ------------------------------------------------------------------
    # Initialization
    # ------------------------------------------------------------------
    def initialize_without_gps(self, origin: Optional[GpsFix] = None) -> Optional[Pose]:
        """Initialize from configured scale and heading instead of GPS.

        Uses ``init.fixed_scale`` (1.0 when unset), ``init.initial_heading_deg``
        and places the first pose at ``origin`` (the map frame origin by
        default).
        """
        if self.initialized:
            return self.graph.pose(self.graph.next_id - 1)
        cfg = self.config.init
        scale = cfg.fixed_scale if cfg.fixed_scale is not None else 1.0
        t0 = self._local[0][0] if self._local else 0.0
        origin = origin or GpsFix(t0, 0.0, 0.0)
        self.logger.warning(f"Initializing without GPS: scale={scale:g}, "
                            f"heading={cfg.initial_heading_deg:g} deg")
        first_local = self._local[0][1] if self._local else Pose.identity()
        self.init_state.initialize_directly(scale, math.radians(cfg.initial_heading_deg),
                                            origin, first_local)
        if self._local:
            return self._bootstrap()
        return None

    def _bootstrap(self) -> Pose:
        aligned = self.init_state.apply_initialization([p for _, p in self._local])
        ids = [self.graph.add_pose(p) for p in aligned]
        for (t, _), pose_id in zip(self._local, ids):
            self._times[pose_id] = t
        for k in range(1, len(ids)):
            delta = aligned[k - 1].relative(aligned[k])
            self.graph.add_between(ids[k - 1], ids[k], delta, self._odometry_noise(delta, False))

        anchor = 0
        first_fix = self.init_state.first_fix
        for index, fix in self._buffered_fixes:
            if fix is first_fix:
                anchor = index
                break
        self.graph.add_prior(ids[anchor], aligned[anchor], self._anchor_noise(), 'anchor')
        for index, fix in self._buffered_fixes:
            self.graph.add_prior(ids[index], self._gps_measurement(fix, aligned[index]),
                                 self._gps_noise(fix), 'gps')

        result = self._optimize()
        newest = ids[-1]
        if result is not None:
            self.marginal = result.marginal_covariance(newest)
        else:
            self.marginal = np.diag([self.config.fusion.odom_pre_pos_std_m ** 2] * 6)
        self._slide_window()
        self.logger.info(f"Fusion initialized with {len(ids)} buffered poses and "
                         f"{len(self._buffered_fixes)} GPS fixes")
        for (t, _), pose_id in zip(self._local, ids):
            if pose_id in self.graph.ids:
                self.online.append((t, self.graph.pose(pose_id)))
            else:
                self.online.append((t, self._frozen[pose_id]))
        self._local.clear()
        self._buffered_fixes.clear()
        pose = self.graph.pose(newest)
        self.records.append(StepRecord(self._last_t, pose, True, horizontal_std(self.marginal),
                                       optimized=result is not None,
                                       converged=result is not None and result.converged))
        return pose

    # ------------------------------------------------------------------
    # Stepping
    # ------------------------------------------------------------------
    def step(self, t: float, vo_delta: Optional[Pose] = None,
             gps: Optional[GpsFix] = None) -> Optional[Pose]:
        """Advance the session by one odometry step.

        Parameters
        ----------
        t : float
            Timestamp in seconds, strictly increasing.
        vo_delta : Pose, optional
            Unscaled odometry motion since the previous step; ignored on the
            very first step, identity when None.
        gps : GpsFix, optional
            GPS fix in the map frame.

        Returns
        -------
        Pose or None
            Current global pose, or None while still initializing.

        Raises
        ------
        TimestampOrderError
            If ``t`` does not increase.
        """
        if self._last_t is not None and t <= self._last_t:
            raise TimestampOrderError(f"timestamp {t} does not follow {self._last_t}")
        self._last_t = t
        if self.initialized:
            return self._step_initialized(t, vo_delta, gps)

        first = not self._local
        delta = None if first else (vo_delta or Pose.identity())
        local = Pose.identity() if first else self._local[-1][1].compose(delta)
        self._local.append((t, local))
        if gps is not None:
            self._buffered_fixes.append((len(self._local) - 1, gps))
        self.init_state.feed(t, gps, delta)
        if not self.init_state.initialized:
            self.records.append(StepRecord(t, None, False))
            return None
        return self._bootstrap()

    def _velocity(self, newest_id: int) -> Tuple[float, float]:
        """Body-frame speed from the last two optimized poses."""
        previous_id = newest_id - 1
        if previous_id not in self._times or previous_id < self.graph.first_id:
            return 0.0, 0.0
        dt = self._times[newest_id] - self._times[previous_id]
        if dt <= 0:
            return 0.0, 0.0
        newest = self.graph.pose(newest_id)
        previous = self.graph.pose(previous_id)
        body = newest.rotation_matrix.T @ (newest.translation - previous.translation) / dt
        return float(body[0]), float(body[1])

    def _propagate(self, factor_noise: NoiseModel, newest: Pose, predicted: Pose,
                   delta: Pose) -> np.ndarray:
        """Marginal covariance of the new pose before unary priors."""
        _, J_i, J_j = between_kernel(newest.translation[None], newest.rotation_matrix[None],
                                     predicted.translation[None], predicted.rotation_matrix[None],
                                     delta.translation[None], delta.rotation_matrix[None])
        J_j_inv = np.linalg.inv(J_j[0])
        A = -J_j_inv @ J_i[0]
        Q = np.linalg.inv(factor_noise.information)
        covariance = A @ self.marginal @ A.T + J_j_inv @ Q @ J_j_inv.T
        return 0.5 * (covariance + covariance.T)

    def _step_initialized(self, t: float, vo_delta: Optional[Pose],
                          gps: Optional[GpsFix]) -> Pose:
        fusion = self.config.fusion
        delta = (vo_delta or Pose.identity()).scaled(self.init_state.scale)
        newest_id = self.graph.next_id - 1
        newest = self.graph.pose(newest_id)
        predicted = newest.compose(delta)
        pose_id = self.graph.add_pose(predicted)
        self._times[pose_id] = t
        odom_noise = self._odometry_noise(delta, True)
        self.graph.add_between(newest_id, pose_id, delta, odom_noise)
        record = StepRecord(t, None, True)

        covariance = self._propagate(odom_noise, newest, predicted, delta)
        unary = np.zeros((6, 6))

        if gps is not None and fusion.use_gps_after_init:
            noise = self._gps_noise(gps)
            self.graph.add_prior(pose_id, self._gps_measurement(gps, predicted), noise, 'gps')
            unary += noise.information
            record.gps_prior = True

        road_width = self.default_road_width
        if self.matcher is not None:
            match = self.matcher.match(predicted, self.hint)
            record.match = match
            if match is None:
                if not self._delocalized:
                    self.logger.warning(f"No road within reach of the estimate at t={t:.3f}")
                self._delocalized = True
                self.hint = None
            else:
                self._delocalized = False
                self.hint = match
                road_width = match.road_width_m
                if not match.exceeds_road_width:
                    self._armed = True
                elif self._armed and fusion.map_priors:
                    v_lon, v_lat = self._velocity(newest_id)
                    roll, pitch, _ = predicted.euler()
                    try:
                        noise = map_prior_noise(newest, predicted, v_lon, v_lat,
                                                fusion.map_yaw_std_deg, fusion.eigen_floor_m2,
                                                fusion.stationary_eps_m)
                    except StationaryVehicleError as e:
                        self.logger.debug(f"Map prior skipped at t={t:.3f}: {e}")
                    else:
                        measured = match.map_pose.as_pose(predicted.z, roll, pitch)
                        self.graph.add_prior(pose_id, measured, noise, 'map')
                        unary += noise.information
                        record.map_prior = True
                        self._armed = False
                        self.map_prior_log.append((t, pose_id))
                        self.logger.debug(f"Map prior at t={t:.3f}: lateral "
                                          f"{match.lateral_m:.2f} m > {road_width:.2f} m")

        if np.any(unary):
            covariance = np.linalg.inv(np.linalg.inv(covariance) + unary)
        if fusion.cap_enabled and horizontal_std(covariance) > road_width:
            info = np.linalg.inv(covariance)
            info = 0.5 * (info + info.T)
            self.graph.add_prior(pose_id, predicted, NoiseModel(info), 'cap')
            covariance = 0.5 * covariance
            record.cap_prior = True

        dirty = record.gps_prior or record.map_prior or record.cap_prior
        if dirty:
            result = self._optimize()
            record.optimized = result is not None
            if result is None:
                record.converged = False
                self.graph.set_pose(pose_id, predicted)
            else:
                record.converged = result.converged
                try:
                    covariance = result.marginal_covariance(pose_id)
                except MapFusionError as e:
                    self.logger.debug(f"Marginal unavailable, keeping propagated: {e}")
        self.marginal = covariance

        pose = self.graph.pose(pose_id)
        self._slide_window()
        record.pose = pose
        record.std_m = horizontal_std(covariance)
        self.records.append(record)
        self.online.append((t, pose))
        return pose

    # ------------------------------------------------------------------
    # Results
    # ------------------------------------------------------------------
    def estimates(self) -> List[Tuple[float, Pose]]:
        """Smoothed estimates of every initialized pose, oldest first."""
        poses = dict(self._frozen)
        poses.update({k: self.graph.pose(k) for k in self.graph.ids})
        return [(self._times[k], poses[k]) for k in sorted(poses)]

    def marginal_std(self) -> float:
        """Horizontal standard deviation of the newest pose."""
        if self.marginal is None:
            raise MapFusionError("session is not initialized")
        return horizontal_std(self.marginal)

    def __repr__(self):
        return (f"FusionSession(initialized={self.initialized}, poses={len(self.graph)}, "
                f"degraded={self.degraded})")


def replay(session: FusionSession, odometry: List[Tuple[float, Pose]],
           fixes: List[GpsFix] = ()) -> List[Tuple[float, Optional[Pose]]]:
    """Feed time-ordered streams through ``session``.

    Every odometry sample is one step; each GPS fix is attached to the first
    odometry step at or after its timestamp, the latest fix winning when
    several fall between two steps.
    """
    fixes = sorted(fixes, key=lambda fix: fix.t)
    outputs = []
    cursor = 0
    for t, delta in odometry:
        attached = None
        while cursor < len(fixes) and fixes[cursor].t <= t + 1e-9:
            attached = fixes[cursor]
            cursor += 1
        outputs.append((t, session.step(t, delta, attached)))
    if cursor < len(fixes):
        session.logger.debug(f"{len(fixes) - cursor} GPS fixes after the last odometry step ignored")
    return outputs
