#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Absolute trajectory error on the ground plane.

Estimated poses are paired with ground truth by timestamp, aligned with a
rigid (rotation + translation) least-squares fit in 3D and then compared on
their East/North components only.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
from scipy.spatial.transform import Rotation

from ..config import DELOCALIZATION_THRESHOLD_M
from ..exceptions import AlignmentError, AssociationError
from ..geom import Pose
from .trajectory import Trajectory

logger = logging.getLogger(__name__)

DELOC_METRICS = ('max', 'rmse')

Pair = Tuple[float, Pose, Pose]


def associate(est: Trajectory, gt: Trajectory, max_dt: float = 0.02) -> List[Pair]:
    """Pair every ground-truth pose with the nearest estimate in time.

    Each estimate is used at most once; ground-truth poses without an
    estimate within ``max_dt`` are dropped.

    Returns
    -------
    List[Tuple[float, Pose, Pose]]
        ``(gt timestamp, estimate, ground truth)`` in ground-truth order.

    Raises
    ------
    AssociationError
        If a trajectory is empty or nothing pairs.
    """
    if len(est) == 0 or len(gt) == 0:
        raise AssociationError("cannot associate an empty trajectory")
    est_t = est.timestamps
    idx = np.searchsorted(est_t, gt.timestamps)
    lo = np.clip(idx - 1, 0, len(est_t) - 1)
    hi = np.clip(idx, 0, len(est_t) - 1)
    pick = np.where(np.abs(est_t[lo] - gt.timestamps) <= np.abs(est_t[hi] - gt.timestamps), lo, hi)
    dt = np.abs(est_t[pick] - gt.timestamps)

    pairs: List[Pair] = []
    used = set()
    for k in np.argsort(dt, kind='stable'):
        if dt[k] > max_dt:
            break
        if pick[k] in used:
            continue
        used.add(int(pick[k]))
        pairs.append((float(gt.timestamps[k]), est.poses[pick[k]], gt.poses[k]))
    if not pairs:
        raise AssociationError(f"no estimate lies within {max_dt} s of any ground-truth pose")
    pairs.sort(key=lambda pair: pair[0])
    logger.debug(f"Associated {len(pairs)} of {len(gt)} ground-truth poses")
    return pairs


def _dominant_direction(points: np.ndarray) -> np.ndarray:
    centered = points - points.mean(axis=0)
    _, _, vt = np.linalg.svd(centered, full_matrices=False)
    direction = vt[0]
    # orient along travel
    if np.dot(points[-1] - points[0], direction) < 0:
        direction = -direction
    return direction


def align_6dof(pairs: List[Pair]) -> Pose:
    """Rigid transform ``T`` minimizing ``sum |T * est - gt|^2`` over positions.

    Collinear inputs leave the rotation about the line undetermined; the
    transform then aligns the dominant directions with a rotation about Up.

    Raises
    ------
    AlignmentError
        If fewer than two pairs are given.
    """
    if len(pairs) < 2:
        raise AlignmentError(f"alignment needs at least 2 pairs, got {len(pairs)}")
    est = np.array([e.translation for _, e, _ in pairs])
    gt = np.array([g.translation for _, _, g in pairs])
    mu_e, mu_g = est.mean(axis=0), gt.mean(axis=0)
    centered_e, centered_g = est - mu_e, gt - mu_g

    singular = np.linalg.svd(centered_e, compute_uv=False)
    scale = max(float(singular[0]), 1e-12)
    if len(singular) < 2 or singular[1] <= 1e-9 * scale:
        d_e = _dominant_direction(est)
        d_g = _dominant_direction(gt)
        yaw = math.atan2(d_g[1], d_g[0]) - math.atan2(d_e[1], d_e[0])
        rotation = Rotation.from_euler('z', yaw).as_matrix()
        logger.debug("Collinear trajectory: aligning dominant directions about Up")
    else:
        covariance = centered_g.T @ centered_e
        u, _, vt = np.linalg.svd(covariance)
        sign = np.sign(np.linalg.det(u @ vt)) or 1.0
        rotation = u @ np.diag([1.0, 1.0, sign]) @ vt
    translation = mu_g - rotation @ mu_e
    return Pose.from_rotation(Rotation.from_matrix(rotation), translation)


@dataclass
class AteReport:
    """Horizontal absolute trajectory error.

    ``delocalized`` applies the 20 m rule to ``metric`` (``max`` by default).
    """

    rmse: float
    max_error: float
    errors: np.ndarray = field(repr=False)
    timestamps: np.ndarray = field(repr=False)
    delocalized: bool
    metric: str = 'max'
    alignment: Optional[Pose] = None

    def to_dict(self) -> Dict[str, Any]:
        result = {
            'rmse': self.rmse,
            'max_error': self.max_error,
            'mean_error': float(np.mean(self.errors)) if len(self.errors) else 0.0,
            'pairs': int(len(self.errors)),
            'delocalized': self.delocalized,
            'deloc_metric': self.metric,
        }
        if self.alignment is not None:
            result['alignment'] = {
                'translation': self.alignment.translation.tolist(),
                'quaternion': self.alignment.quaternion.tolist(),
            }
        return result

    def to_frame(self) -> pd.DataFrame:
        """Per-pose errors for plotting."""
        return pd.DataFrame({'timestamp': self.timestamps, 'error_m': self.errors})


def ate_2d(pairs: List[Pair], transform: Optional[Pose] = None, metric: str = 'max',
           threshold: float = DELOCALIZATION_THRESHOLD_M) -> AteReport:
    """Per-pose East/North error after applying ``transform`` to the estimates."""
    if metric not in DELOC_METRICS:
        raise ValueError(f"deloc metric must be one of {DELOC_METRICS}, got {metric!r}")
    if not pairs:
        raise AssociationError("no pairs to evaluate")
    est = np.array([e.translation for _, e, _ in pairs])
    if transform is not None:
        est = est @ transform.rotation_matrix.T + transform.translation
    gt = np.array([g.translation for _, _, g in pairs])
    errors = np.hypot(est[:, 0] - gt[:, 0], est[:, 1] - gt[:, 1])
    rmse = float(np.sqrt(np.mean(errors ** 2)))
    max_error = float(errors.max())
    delocalized = (max_error if metric == 'max' else rmse) > threshold
    if delocalized:
        logger.warning(f"Trajectory delocalized: {metric} error "
                       f"{max_error if metric == 'max' else rmse:.2f} m > {threshold:g} m")
    return AteReport(rmse, max_error, errors, np.array([t for t, _, _ in pairs]), delocalized,
                     metric, transform)


def evaluate(est: Trajectory, gt: Trajectory, max_dt: float = 0.02, align: bool = True,
             metric: str = 'max') -> AteReport:
    """Associate, optionally align, and compute the horizontal ATE."""
    pairs = associate(est, gt, max_dt)
    transform = align_6dof(pairs) if align else None
    return ate_2d(pairs, transform, metric)
