#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Synthetic drive descriptions.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

from ..exceptions import ConfigError


@dataclass(frozen=True)
class DriftSpec:
    """Odometry corruption.

    Attributes
    ----------
    lateral_drift : float
        Body-frame sideways error in meters per meter travelled.
    yaw_drift_deg : float
        Heading error in degrees per meter travelled.
    scale_error : float
        Factor applied to every odometry translation.
    step_pos_std : float
        Per-step position noise in meters.
    step_rot_std_deg : float
        Per-step yaw noise in degrees.
    """

    lateral_drift: float = 0.0
    yaw_drift_deg: float = 0.0
    scale_error: float = 1.0
    step_pos_std: float = 0.0
    step_rot_std_deg: float = 0.0

    def __post_init__(self):
        if self.scale_error <= 0:
            raise ConfigError(f"scale_error must be > 0, got {self.scale_error}")
        if self.step_pos_std < 0 or self.step_rot_std_deg < 0:
            raise ConfigError("step noise must be non-negative")


@dataclass(frozen=True)
class GpsSpec:
    """GPS stream: a fix every ``period`` seconds except inside dropouts.

    A ``period`` of zero disables GPS entirely.
    """

    period: float = 5.0
    noise_std: float = 0.5
    dropouts: Tuple[Tuple[float, float], ...] = ()

    def __post_init__(self):
        if self.period < 0:
            raise ConfigError(f"GPS period must be >= 0, got {self.period}")
        if self.noise_std < 0:
            raise ConfigError(f"GPS noise must be >= 0, got {self.noise_std}")
        windows = tuple((float(a), float(b)) for a, b in self.dropouts)
        for start, end in windows:
            if end <= start:
                raise ConfigError(f"dropout window ({start}, {end}) is empty")
        for (_, end), (start, _) in zip(windows[:-1], windows[1:]):
            if start < end:
                raise ConfigError("dropout windows must be sorted and non-overlapping")
        object.__setattr__(self, 'dropouts', windows)

    def in_dropout(self, t: float) -> bool:
        return any(start <= t <= end for start, end in self.dropouts)


@dataclass(frozen=True)
class Scenario:
    """A drive over a map.

    Attributes
    ----------
    route : Sequence[int]
        Edge ids traversed in order; consecutive edges share a vertex.
    speeds : Sequence[float]
        Speed in m/s, one per route edge or a single value for all.
    odom_rate_hz : float
        Odometry (and ground truth) sampling rate.
    drift : DriftSpec
        Odometry corruption.
    gps : GpsSpec
        GPS stream.
    seed : int
        Seed of every random draw.
    name : str
        Label used in reports.
    config : Dict[str, str]
        ``section.key`` overrides applied when the scenario is evaluated.
    """

    route: Sequence[int]
    speeds: Sequence[float] = (10.0,)
    odom_rate_hz: float = 10.0
    drift: DriftSpec = field(default_factory=DriftSpec)
    gps: GpsSpec = field(default_factory=GpsSpec)
    seed: int = 0
    name: str = 'scenario'
    config: Dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, 'route', tuple(int(e) for e in self.route))
        object.__setattr__(self, 'speeds', tuple(float(s) for s in self.speeds))
        if not self.route:
            raise ConfigError("a scenario needs at least one route edge")
        if len(self.speeds) not in (1, len(self.route)):
            raise ConfigError(f"expected 1 or {len(self.route)} speeds, got {len(self.speeds)}")
        if any(s <= 0 for s in self.speeds):
            raise ConfigError("speeds must be positive")
        if self.odom_rate_hz <= 0:
            raise ConfigError("odom_rate_hz must be positive")

    def speed_of(self, route_index: int) -> float:
        return self.speeds[0] if len(self.speeds) == 1 else self.speeds[route_index]

    @property
    def config_overrides(self) -> List[str]:
        return [f"{key}={value}" for key, value in sorted(self.config.items())]

    def with_seed(self, seed: int) -> 'Scenario':
        return Scenario(self.route, self.speeds, self.odom_rate_hz, self.drift, self.gps,
                        seed, self.name, dict(self.config))
