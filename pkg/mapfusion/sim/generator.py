#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Ground truth, odometry and GPS streams for a synthetic drive.

The vehicle follows the route centerline at the scenario speeds. Odometry
deltas are the true frame-to-frame motions corrupted in the body frame by
lateral and yaw drift proportional to the distance travelled, Gaussian
noise and a scale error. GPS fixes are noisy truth positions at a fixed
period with dropout windows removed.
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from ..exceptions import RouteError
from ..geom import GpsFix, Pose
from ..mapgraph.graph_builder import drop_coincident
from ..mapgraph.map_graph import MapGraph
from ..evaluation.trajectory import Trajectory
from .scenario import Scenario

logger = logging.getLogger(__name__)


@dataclass
class SimulatedDrive:
    """Streams produced by :func:`generate`.

    ``odometry`` holds one ``(t, delta)`` per ground-truth sample; the first
    delta is the identity.
    """

    truth: Trajectory
    odometry: List[Tuple[float, Pose]]
    gps: List[GpsFix]

    def odometry_trajectory(self) -> Trajectory:
        """Odometry integrated into absolute poses from the identity."""
        pose = Pose.identity()
        stamped = []
        for k, (t, delta) in enumerate(self.odometry):
            pose = pose if k == 0 else pose.compose(delta)
            stamped.append((t, pose))
        return Trajectory(stamped)


def route_polyline(map_graph: MapGraph, scenario: Scenario) -> Tuple[np.ndarray, np.ndarray]:
    """Centerline of the route and the route index of every segment.

    Raises
    ------
    RouteError
        If an edge is unknown or consecutive edges do not share a vertex.
    """
    route = list(scenario.route)
    for edge_id in route:
        if edge_id not in map_graph.edges:
            raise RouteError(f"route edge {edge_id} is not in the map")
    edges = [map_graph.edges[e] for e in route]

    if len(edges) == 1:
        forward = [True]
    else:
        first, second = edges[0], edges[1]
        shared = {first.u, first.v} & {second.u, second.v}
        if not shared:
            raise RouteError(f"route edges {first.edge_id} and {second.edge_id} are not connected")
        forward = [first.v in shared]
        current = first.v if forward[0] else first.u
        for previous, edge in zip(edges[:-1], edges[1:]):
            if edge.u == current:
                forward.append(True)
                current = edge.v
            elif edge.v == current:
                forward.append(False)
                current = edge.u
            else:
                raise RouteError(f"route edges {previous.edge_id} and {edge.edge_id} "
                                 f"are not connected")

    pieces, owners = [], []
    for index, (edge, fwd) in enumerate(zip(edges, forward)):
        xy = edge.xy if fwd else edge.xy[::-1]
        if pieces:
            xy = xy[1:] if np.hypot(*(xy[0] - pieces[-1][-1])) <= 1e-6 else xy
        pieces.append(np.asarray(xy))
        owners.extend([index] * len(xy))
    polyline = np.concatenate(pieces)
    owners = np.array(owners)
    keep = np.concatenate([[True], np.hypot(*np.diff(polyline, axis=0).T) > 1e-9])
    return polyline[keep], owners[keep]


def generate(map_graph: MapGraph, scenario: Scenario) -> SimulatedDrive:
    """Simulate a drive.

    Parameters
    ----------
    map_graph : MapGraph
        Map holding the route.
    scenario : Scenario
        Route, speeds, corruption, GPS stream and seed.

    Returns
    -------
    SimulatedDrive
        Ground truth, odometry deltas and GPS fixes; identical seeds give
        identical streams.
    """
    rng = np.random.default_rng(scenario.seed)
    polyline, owners = route_polyline(map_graph, scenario)
    polyline = drop_coincident(polyline)
    segment = np.hypot(*np.diff(polyline, axis=0).T)
    speeds = np.array([scenario.speed_of(i) for i in owners[:len(segment)]])
    arc = np.concatenate([[0.0], np.cumsum(segment)])
    vertex_times = np.concatenate([[0.0], np.cumsum(segment / speeds)])

    dt = 1.0 / scenario.odom_rate_hz
    count = int(math.floor(vertex_times[-1] / dt + 1e-9)) + 1
    times = np.arange(count) * dt
    s = np.interp(times, vertex_times, arc)
    xy = np.column_stack([np.interp(s, arc, polyline[:, 0]), np.interp(s, arc, polyline[:, 1])])

    step = np.diff(xy, axis=0)
    yaws = np.arctan2(step[:, 1], step[:, 0])
    yaws = np.append(yaws, yaws[-1]) if len(yaws) else np.zeros(1)
    truth_poses = [Pose.from_planar(x, y, yaw) for (x, y), yaw in zip(xy, yaws)]
    truth = Trajectory(zip(times.tolist(), truth_poses))

    drift = scenario.drift
    n = len(truth_poses)
    pos_noise = rng.normal(0.0, drift.step_pos_std, size=(n, 2)) if drift.step_pos_std else np.zeros((n, 2))
    rot_noise = (rng.normal(0.0, math.radians(drift.step_rot_std_deg), size=n)
                 if drift.step_rot_std_deg else np.zeros(n))
    odometry = [(float(times[0]), Pose.identity())]
    for k in range(1, n):
        true_delta = truth_poses[k - 1].relative(truth_poses[k])
        travelled = float(np.hypot(true_delta.x, true_delta.y))
        x = true_delta.x + pos_noise[k, 0]
        y = true_delta.y + drift.lateral_drift * travelled + pos_noise[k, 1]
        yaw = true_delta.yaw + math.radians(drift.yaw_drift_deg) * travelled + rot_noise[k]
        odometry.append((float(times[k]),
                         Pose.from_euler(x * drift.scale_error, y * drift.scale_error,
                                         true_delta.z * drift.scale_error, yaw=yaw)))

    fixes: List[GpsFix] = []
    gps = scenario.gps
    if gps.period > 0:
        gps_times = np.arange(0.0, times[-1] + 1e-9, gps.period)
        indices = np.unique(np.clip(np.rint(gps_times / dt).astype(int), 0, n - 1))
        noise = rng.normal(0.0, gps.noise_std, size=(len(indices), 2)) if gps.noise_std else \
            np.zeros((len(indices), 2))
        for k, e in zip(indices, noise):
            t = float(times[k])
            if gps.in_dropout(t):
                continue
            fixes.append(GpsFix(t, float(xy[k, 0] + e[0]), float(xy[k, 1] + e[1])))

    logger.info(f"Simulated '{scenario.name}' (seed {scenario.seed}): {n} poses over "
                f"{arc[-1]:.1f} m, {len(fixes)} GPS fixes")
    return SimulatedDrive(truth, odometry, fixes)
