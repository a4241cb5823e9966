#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Scenario evaluation with and without map priors.
"""

import dataclasses
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from ..config import DELOCALIZATION_THRESHOLD_M, ToolkitConfig
from ..evaluation.ate import AteReport, associate, evaluate
from ..evaluation.trajectory import Trajectory
from ..fusion.session import FusionSession, replay
from ..mapgraph.map_graph import MapGraph
from .generator import SimulatedDrive, generate
from .scenario import Scenario

logger = logging.getLogger(__name__)


@dataclass
class ArmResult:
    """Outcome of one fusion run over a simulated drive."""

    map_priors: bool
    ate: Optional[AteReport]
    dropout_max_errors: List[float]
    map_prior_times: List[float]
    cap_priors: int
    degraded: bool
    estimate: Trajectory = field(repr=False)
    scale_samples: List[float] = field(default_factory=list, repr=False)

    @property
    def max_error(self) -> float:
        return self.ate.max_error if self.ate is not None else float('inf')

    def to_dict(self) -> Dict[str, Any]:
        return {
            'map_priors': self.map_priors,
            'ate': self.ate.to_dict() if self.ate is not None else None,
            'dropout_max_errors': self.dropout_max_errors,
            'map_prior_count': len(self.map_prior_times),
            'map_prior_times': self.map_prior_times,
            'cap_priors': self.cap_priors,
            'degraded': self.degraded,
        }


@dataclass
class ScenarioReport:
    """Both arms of a scenario evaluation."""

    name: str
    seed: int
    with_map: ArmResult
    without_map: ArmResult

    def to_dict(self) -> Dict[str, Any]:
        return {
            'scenario': self.name,
            'seed': self.seed,
            'with_map': self.with_map.to_dict(),
            'without_map': self.without_map.to_dict(),
        }


def dropout_errors(estimate: Trajectory, truth: Trajectory,
                   windows: List[Tuple[float, float]], max_dt: float) -> List[float]:
    """Maximum unaligned horizontal error inside each dropout window."""
    if len(estimate) == 0:
        return [float('inf')] * len(windows)
    pairs = associate(estimate, truth, max_dt)
    times = np.array([t for t, _, _ in pairs])
    errors = np.array([np.hypot(*(e.translation[:2] - g.translation[:2])) for _, e, g in pairs])
    result = []
    for start, end in windows:
        inside = (times >= start) & (times <= end)
        result.append(float(errors[inside].max()) if np.any(inside) else float('nan'))
    return result


def run_arm(map_graph: MapGraph, drive: SimulatedDrive, scenario: Scenario,
            config: ToolkitConfig, map_priors: bool) -> ArmResult:
    """Fuse a simulated drive with map priors switched on or off."""
    fusion = dataclasses.replace(config.fusion, map_priors=map_priors)
    session = FusionSession(map_graph, dataclasses.replace(config, fusion=fusion))
    replay(session, drive.odometry, drive.gps)
    estimate = Trajectory(session.online)
    max_dt = config.sim.assoc_max_dt_s
    ate = None
    if len(estimate) >= 2:
        ate = evaluate(estimate, drive.truth, max_dt)
    else:
        logger.warning(f"Scenario '{scenario.name}' never initialized")
    return ArmResult(map_priors, ate,
                     dropout_errors(estimate, drive.truth, list(scenario.gps.dropouts), max_dt),
                     [t for t, _ in session.map_prior_log],
                     sum(r.cap_prior for r in session.records),
                     session.degraded, estimate,
                     list(session.init_state.scale_samples))


def evaluate_scenario(map_graph: MapGraph, scenario: Scenario,
                      config: Optional[ToolkitConfig] = None) -> ScenarioReport:
    """Run a scenario through fusion twice (map priors on and off).

    Parameters
    ----------
    map_graph : MapGraph
        Map holding the route.
    scenario : Scenario
        Scenario to simulate; its config overrides are applied on top of
        ``config``.
    config : ToolkitConfig, optional
        Base configuration.

    Returns
    -------
    ScenarioReport
        ATE of both arms, per-dropout maximum errors and the map prior log.
    """
    config = config or ToolkitConfig()
    if scenario.config:
        config = config.with_overrides(scenario.config_overrides)

    drive = generate(map_graph, scenario)
    with_map = run_arm(map_graph, drive, scenario, config, True)
    without_map = run_arm(map_graph, drive, scenario, config, False)
    report = ScenarioReport(scenario.name, scenario.seed, with_map, without_map)
    for arm in (with_map, without_map):
        if arm.ate is not None and arm.ate.max_error > DELOCALIZATION_THRESHOLD_M:
            logger.info(f"'{scenario.name}' seed {scenario.seed}: map priors "
                        f"{'on' if arm.map_priors else 'off'} delocalized")
    logger.info(f"Scenario '{scenario.name}' seed {scenario.seed}: ATE rmse with map "
                f"{_rmse(with_map):.3f} m, without map {_rmse(without_map):.3f} m")
    return report


def _rmse(arm: ArmResult) -> float:
    return arm.ate.rmse if arm.ate is not None else float('nan')
