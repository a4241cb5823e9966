# -*- coding: utf-8 -*-

"""
Scenario-level runs over synthetic maps. Each case fuses a full drive twice,
so the whole module is marked slow.
"""

import pytest

from mapfusion.config import DELOCALIZATION_THRESHOLD_M
from mapfusion.sim.evaluation import evaluate_scenario
from mapfusion.sim.scenario import DriftSpec, GpsSpec, Scenario

pytestmark = pytest.mark.slow

SEEDS = range(10)

DRIFT = DriftSpec(lateral_drift=0.005, yaw_drift_deg=0.02, step_pos_std=0.01,
                  step_rot_std_deg=0.01)


@pytest.mark.parametrize('seed', SEEDS)
def test_loop_drift_correction(loop_map, seed):
    """GPS only while initializing, then the road map alone bounds the drift."""
    scenario = Scenario(route=[0], speeds=[10.0], drift=DRIFT,
                        gps=GpsSpec(period=1.0, noise_std=0.5), seed=seed, name='loop',
                        config={'fusion.use_gps_after_init': 'false'})
    assert scenario.odom_rate_hz == 10.0
    report = evaluate_scenario(loop_map, scenario)
    assert len(report.with_map.scale_samples) >= 50
    assert report.with_map.scale_samples[0] == pytest.approx(1.0, rel=0.25)
    assert report.with_map.ate is not None
    assert report.without_map.ate is not None
    assert report.with_map.map_prior_times
    assert report.with_map.ate.rmse <= 0.5 * report.without_map.ate.rmse


def test_first_scale_sample_matches_injected_scale(long_straight_map):
    scenario = Scenario(route=list(long_straight_map.edges), speeds=[10.0],
                        drift=DriftSpec(scale_error=0.5), gps=GpsSpec(period=1.0, noise_std=0.0),
                        name='scaled')
    report = evaluate_scenario(long_straight_map, scenario)
    for arm in (report.with_map, report.without_map):
        assert len(arm.scale_samples) >= 50
        assert arm.scale_samples[0] == pytest.approx(2.0, rel=1e-6)


@pytest.mark.parametrize('seed', SEEDS)
def test_tunnel_dropout(long_straight_map, seed):
    """A 300 m GPS gap on a 1 km road."""
    scenario = Scenario(route=list(long_straight_map.edges), speeds=[10.0], odom_rate_hz=2.0,
                        drift=DRIFT, seed=seed, name='tunnel',
                        gps=GpsSpec(period=5.0, noise_std=0.5, dropouts=[(45.0, 75.0)]),
                        config={'init.f_gps_hz': '0.2', 'init.f_vo_hz': '2',
                                'init.md_m': '40', 'init.samples': '5'})
    report = evaluate_scenario(long_straight_map, scenario)
    without_map, with_map = report.without_map.dropout_max_errors, report.with_map.dropout_max_errors
    assert without_map[0] > 10.0
    assert with_map[0] < 10.0
    assert report.with_map.max_error <= DELOCALIZATION_THRESHOLD_M
    assert not report.with_map.ate.delocalized


def test_reports_are_deterministic(loop_map):
    scenario = Scenario(route=[0], odom_rate_hz=2.0, drift=DRIFT, seed=2,
                        gps=GpsSpec(period=1.0), name='loop',
                        config={'init.f_vo_hz': '2', 'init.samples': '10'})
    assert evaluate_scenario(loop_map, scenario).to_dict() == \
        evaluate_scenario(loop_map, scenario).to_dict()
