#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Factor types and their residual/Jacobian kernels.

Pose variables live on R^3 x SO(3) and are updated as ``t <- t + dt``,
``R <- R Exp(dtheta)``; the tangent vector is ordered ``[dt, dtheta]``.

Residuals:

- prior on pose i at measurement m:
  ``r = (t_i - t_m, Log(R_m^T R_i))``
- between poses i and j with measurement z:
  ``r = (R_i^T (t_j - t_i) - t_z, Log(R_z^T R_i^T R_j))``

The kernels are batched over a leading factor axis.
"""

import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy.spatial.transform import Rotation

from ..geom import Pose
from .noise import NoiseModel

logger = logging.getLogger(__name__)

PRIOR_KINDS = ('anchor', 'gps', 'map', 'cap', 'marginal', 'user')


def skew(v: np.ndarray) -> np.ndarray:
    """Cross-product matrices of ``(..., 3)`` vectors."""
    v = np.asarray(v, dtype=float)
    out = np.zeros(v.shape[:-1] + (3, 3))
    out[..., 0, 1] = -v[..., 2]
    out[..., 0, 2] = v[..., 1]
    out[..., 1, 0] = v[..., 2]
    out[..., 1, 2] = -v[..., 0]
    out[..., 2, 0] = -v[..., 1]
    out[..., 2, 1] = v[..., 0]
    return out


def so3_log(matrices: np.ndarray) -> np.ndarray:
    """Rotation vectors of ``(n, 3, 3)`` rotation matrices."""
    return Rotation.from_matrix(matrices).as_rotvec().reshape(-1, 3)


def so3_exp(vectors: np.ndarray) -> np.ndarray:
    return Rotation.from_rotvec(np.asarray(vectors, dtype=float).reshape(-1, 3)).as_matrix()


def right_jacobian_inverse(phi: np.ndarray) -> np.ndarray:
    """Inverse right Jacobian of SO(3) for ``(n, 3)`` rotation vectors."""
    phi = np.asarray(phi, dtype=float).reshape(-1, 3)
    theta = np.linalg.norm(phi, axis=1)
    small = theta < 1e-5
    safe = np.where(small, 1.0, theta)
    coeff = np.where(small, 1.0 / 12.0,
                     1.0 / safe ** 2 - (1.0 + np.cos(safe)) / (2.0 * safe * np.sin(safe)))
    a = skew(phi)
    return np.eye(3) + 0.5 * a + coeff[:, None, None] * (a @ a)


def prior_kernel(t: np.ndarray, R: np.ndarray, t_m: np.ndarray,
                 R_m: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Residuals ``(n, 6)`` and Jacobians ``(n, 6, 6)`` of prior factors."""
    r_rot = so3_log(np.swapaxes(R_m, -1, -2) @ R)
    residual = np.concatenate([t - t_m, r_rot], axis=1)
    jac = np.zeros((len(t), 6, 6))
    jac[:, :3, :3] = np.eye(3)
    jac[:, 3:, 3:] = right_jacobian_inverse(r_rot)
    return residual, jac


def between_kernel(t_i: np.ndarray, R_i: np.ndarray, t_j: np.ndarray, R_j: np.ndarray,
                   t_z: np.ndarray, R_z: np.ndarray
                   ) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Residuals ``(n, 6)`` and Jacobians wrt pose i and pose j of between factors."""
    R_i_t = np.swapaxes(R_i, -1, -2)
    local = np.einsum('nab,nb->na', R_i_t, t_j - t_i)
    relative_rot = R_i_t @ R_j
    r_rot = so3_log(np.swapaxes(R_z, -1, -2) @ relative_rot)
    residual = np.concatenate([local - t_z, r_rot], axis=1)

    jr_inv = right_jacobian_inverse(r_rot)
    n = len(t_i)
    jac_i = np.zeros((n, 6, 6))
    jac_i[:, :3, :3] = -R_i_t
    jac_i[:, :3, 3:] = skew(local)
    jac_i[:, 3:, 3:] = -jr_inv @ np.swapaxes(relative_rot, -1, -2)
    jac_j = np.zeros((n, 6, 6))
    jac_j[:, :3, :3] = R_i_t
    jac_j[:, 3:, 3:] = jr_inv
    return residual, jac_i, jac_j


@dataclass(frozen=True)
class BetweenFactor:
    """Relative pose measurement from pose ``i`` to pose ``j``."""

    i: int
    j: int
    measured: Pose
    noise: NoiseModel

    @property
    def keys(self) -> Tuple[int, ...]:
        return (self.i, self.j)

    def error(self, pose_i: Pose, pose_j: Pose) -> np.ndarray:
        """Unwhitened residual at the given poses."""
        residual, _, _ = between_kernel(pose_i.translation[None], pose_i.rotation_matrix[None],
                                        pose_j.translation[None], pose_j.rotation_matrix[None],
                                        self.measured.translation[None],
                                        self.measured.rotation_matrix[None])
        return residual[0]


@dataclass(frozen=True)
class PriorFactor:
    """Absolute pose measurement of pose ``i``.

    ``kind`` records where the prior came from (``anchor``, ``gps``, ``map``,
    ``cap``, ``marginal`` or ``user``).
    """

    i: int
    measured: Pose
    noise: NoiseModel
    kind: str = 'user'

    def __post_init__(self):
        if self.kind not in PRIOR_KINDS:
            raise ValueError(f"unknown prior kind {self.kind!r}")

    @property
    def keys(self) -> Tuple[int, ...]:
        return (self.i,)

    def error(self, pose: Pose) -> np.ndarray:
        residual, _ = prior_kernel(pose.translation[None], pose.rotation_matrix[None],
                                   self.measured.translation[None],
                                   self.measured.rotation_matrix[None])
        return residual[0]


def retract(pose: Pose, delta: np.ndarray) -> Pose:
    """Apply a tangent update ``[dt, dtheta]`` to a pose."""
    delta = np.asarray(delta, dtype=float)
    t = pose.translation + delta[:3]
    rotation = pose.rotation * Rotation.from_rotvec(delta[3:])
    return Pose(t[0], t[1], t[2], rotation.as_quat())
