#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Gaussian noise models over the pose tangent space.

Dimensions are ordered ``(x, y, z, roll, pitch, yaw)``: translation in
meters followed by rotation in radians. A noise model stores an
information matrix, so a zero row and column encodes an unconstrained
("infinite covariance") dimension.
"""

import logging
import math
from typing import Sequence

import numpy as np

from ..exceptions import StationaryVehicleError
from ..geom import Pose

logger = logging.getLogger(__name__)

DIMENSION_NAMES = ('x', 'y', 'z', 'roll', 'pitch', 'yaw')


class NoiseModel:
    """Information matrix of a 6-DoF residual.

    Parameters
    ----------
    information : np.ndarray
        Symmetric positive semi-definite ``(6, 6)`` matrix.
    """

    __slots__ = ('information', 'sqrt_information')

    def __init__(self, information: np.ndarray):
        info = np.array(information, dtype=float)
        if info.shape != (6, 6):
            raise ValueError(f"information matrix must be 6x6, got {info.shape}")
        if not np.all(np.isfinite(info)):
            raise ValueError("information matrix must be finite")
        info = 0.5 * (info + info.T)
        eigenvalues, eigenvectors = np.linalg.eigh(info)
        scale = max(1.0, float(np.max(np.abs(eigenvalues))))
        if eigenvalues.min() < -1e-9 * scale:
            raise ValueError("information matrix must be positive semi-definite")
        eigenvalues = np.clip(eigenvalues, 0.0, None)
        self.information = info
        self.information.flags.writeable = False
        # W with W.T @ W == information
        self.sqrt_information = (eigenvectors * np.sqrt(eigenvalues)).T
        self.sqrt_information.flags.writeable = False

    @classmethod
    def from_sigmas(cls, sigmas: Sequence[float]) -> 'NoiseModel':
        """Diagonal model; ``inf`` sigmas give zero information."""
        sigmas = np.asarray(sigmas, dtype=float)
        with np.errstate(divide='ignore'):
            info = np.where(np.isinf(sigmas), 0.0, 1.0 / sigmas ** 2)
        return cls(np.diag(info))

    @classmethod
    def from_covariance(cls, covariance: np.ndarray) -> 'NoiseModel':
        return cls(np.linalg.inv(np.asarray(covariance, dtype=float)))

    @classmethod
    def isotropic(cls, position_sigma: float, rotation_sigma: float) -> 'NoiseModel':
        return cls.from_sigmas([position_sigma] * 3 + [rotation_sigma] * 3)

    @property
    def is_diagonal(self) -> bool:
        return bool(np.count_nonzero(self.information - np.diag(np.diag(self.information))) == 0)

    @property
    def constrained(self) -> np.ndarray:
        """Mask of dimensions carrying information."""
        return np.any(self.information != 0.0, axis=1)

    def whiten(self, residual: np.ndarray) -> np.ndarray:
        return self.sqrt_information @ residual

    def __add__(self, other: 'NoiseModel') -> 'NoiseModel':
        return NoiseModel(self.information + other.information)

    def __repr__(self):
        diag = ', '.join(f"{d}={v:.3g}" for d, v in zip(DIMENSION_NAMES, np.diag(self.information)))
        return f"NoiseModel(info diag: {diag})"


def map_prior_covariance_2d(dx: float, dy: float, v_lon: float, v_lat: float,
                            eigen_floor: float = 0.01) -> np.ndarray:
    """East/North covariance of a map prior.

    The eigenvectors follow the direction of travel ``(dx, dy)`` and its
    normal ``(dy, -dx)``; their eigenvalues are the longitudinal and lateral
    speeds, floored at ``eigen_floor``.
    """
    norm = math.hypot(dx, dy)
    u1 = np.array([dx, dy]) / norm
    u2 = np.array([dy, -dx]) / norm
    lam1 = max(abs(v_lon), eigen_floor)
    lam2 = max(abs(v_lat), eigen_floor)
    return lam1 * np.outer(u1, u1) + lam2 * np.outer(u2, u2)


def map_prior_noise(prev: Pose, cur: Pose, v_lon: float, v_lat: float,
                    yaw_std_deg: float = 10.0, eigen_floor: float = 0.01,
                    stationary_eps: float = 1e-3) -> NoiseModel:
    """Noise of a prior aligning a pose to the road.

    Parameters
    ----------
    prev, cur : Pose
        Previous and current pose; their horizontal displacement orients the
        covariance ellipse.
    v_lon, v_lat : float
        Longitudinal and lateral speed in m/s.
    yaw_std_deg : float
        Yaw standard deviation in degrees.
    eigen_floor : float
        Smallest allowed eigenvalue in m^2.
    stationary_eps : float
        Minimum horizontal displacement in meters.

    Returns
    -------
    NoiseModel
        Information on x, y (from the 2x2 covariance) and yaw only.

    Raises
    ------
    StationaryVehicleError
        If the displacement is below ``stationary_eps``.
    """
    dx = cur.x - prev.x
    dy = cur.y - prev.y
    if math.hypot(dx, dy) <= stationary_eps:
        raise StationaryVehicleError(
            f"displacement {math.hypot(dx, dy):.2e} m is below {stationary_eps:g} m")
    covariance = map_prior_covariance_2d(dx, dy, v_lon, v_lat, eigen_floor)
    info = np.zeros((6, 6))
    info[:2, :2] = np.linalg.inv(covariance)
    info[5, 5] = 1.0 / math.radians(yaw_std_deg) ** 2
    return NoiseModel(info)
