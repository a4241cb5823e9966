# -*- coding: utf-8 -*-

import logging

import numpy as np
import pytest

from mapfusion.config import ToolkitConfig
from mapfusion.exceptions import MapFusionError, TimestampOrderError
from mapfusion.fusion.session import FusionSession, StepRecord, horizontal_std, replay
from mapfusion.geom import GpsFix, Pose


def gps_drive(session, steps, vo_scale=0.5, gps_every=10):
    """East-bound drive at 10 m/s with 10 Hz odometry and a GPS fix every ``gps_every`` steps."""
    outputs = []
    for k in range(steps):
        t = k * 0.1
        gps = GpsFix(t, 10.0 * t, 0.0) if k % gps_every == 0 else None
        outputs.append(session.step(t, Pose(1.0 * vo_scale, 0.0, 0.0), gps))
    return outputs


def start_without_gps(session, x=0.0, y=0.0):
    assert session.step(0.0) is None
    return session.initialize_without_gps(GpsFix(0.0, x, y))


def odometry_drive(session, steps, delta, start=1):
    poses = []
    for k in range(start, start + steps):
        poses.append(session.step(k * 0.1, delta))
    return poses


class TestHorizontalStd:

    def test_worst_axis(self):
        covariance = np.diag([4.0, 9.0, 100.0, 1.0, 1.0, 1.0])
        assert horizontal_std(covariance) == pytest.approx(3.0)


class TestGpsInitialization:

    def test_collecting_then_initialized(self, config):
        session = FusionSession(config=config.with_overrides(['init.samples=5']))
        outputs = gps_drive(session, 120)
        first = next(k for k, pose in enumerate(outputs) if pose is not None)
        assert all(pose is None for pose in outputs[:first])
        assert session.initialized
        assert session.scale == pytest.approx(2.0)
        assert session.init_state.scale_samples == pytest.approx([2.0] * 5)
        assert len(session.online) == 120
        t, final = session.online[-1]
        assert final.x == pytest.approx(10.0 * t, abs=0.5)
        assert final.y == pytest.approx(0.0, abs=0.5)
        assert [r.initialized for r in session.records].count(False) == first

    def test_online_prefix_is_aligned(self, config):
        session = FusionSession(config=config.with_overrides(['init.samples=5']))
        gps_drive(session, 80)
        times = [t for t, _ in session.online]
        assert times == sorted(times)
        for t, pose in session.online:
            assert pose.x == pytest.approx(10.0 * t, abs=0.5)

    def test_timestamps_must_increase(self):
        session = FusionSession()
        session.step(1.0)
        with pytest.raises(TimestampOrderError):
            session.step(1.0)

    def test_marginal_std_requires_initialization(self):
        with pytest.raises(MapFusionError):
            FusionSession().marginal_std()


class TestInitializeWithoutGps:

    def test_configured_scale_and_heading(self, config):
        overrides = ['init.fixed_scale=2.0', 'init.initial_heading_deg=90']
        session = FusionSession(config=config.with_overrides(overrides))
        origin = start_without_gps(session, 5.0, -3.0)
        assert origin.x == pytest.approx(5.0)
        assert origin.y == pytest.approx(-3.0)
        poses = odometry_drive(session, 10, Pose(1.0, 0.0, 0.0))
        assert poses[-1].x == pytest.approx(5.0, abs=1e-6)
        assert poses[-1].y == pytest.approx(-3.0 + 20.0, abs=1e-6)

    def test_idempotent(self):
        session = FusionSession()
        first = start_without_gps(session)
        assert session.initialize_without_gps().allclose(first)

    def test_estimates_cover_every_step(self):
        session = FusionSession()
        start_without_gps(session)
        odometry_drive(session, 30, Pose(1.0, 0.0, 0.0))
        estimates = session.estimates()
        assert len(estimates) == 31
        assert [t for t, _ in estimates] == sorted(t for t, _ in estimates)


class TestMapPriors:

    def _lateral_drift(self, straight_map, config, map_priors):
        cfg = config.with_overrides([f'fusion.map_priors={map_priors}'])
        session = FusionSession(straight_map, cfg)
        start_without_gps(session, -100.0, 0.0)
        poses = odometry_drive(session, 150, Pose.from_planar(1.0, 0.05, 0.0))
        return session, poses

    def test_map_pulls_estimate_back(self, straight_map, config):
        without, poses_without = self._lateral_drift(straight_map, config, False)
        with_map, poses_with = self._lateral_drift(straight_map, config, True)
        assert poses_without[-1].y == pytest.approx(7.5, abs=0.5)
        assert not without.map_prior_log
        assert with_map.map_prior_log
        assert abs(poses_with[-1].y) < 0.5 * abs(poses_without[-1].y)
        assert any(r.map_prior for r in with_map.records)

    def test_records_carry_matches(self, straight_map, config):
        session, _ = self._lateral_drift(straight_map, config, True)
        initialized = [r for r in session.records if r.initialized and r.match is not None]
        assert initialized
        row = initialized[-1].as_row()
        assert row['edge_id'] == initialized[-1].match.map_pose.edge_id
        assert set(row) >= {'t', 'x', 'y', 'std_m', 'map_prior', 'cap_prior', 'lateral_m'}

    def test_off_the_map(self, straight_map, config):
        session = FusionSession(straight_map, config)
        start_without_gps(session, 0.0, 500.0)
        poses = odometry_drive(session, 20, Pose(1.0, 0.0, 0.0))
        assert session.records[-1].match is None
        assert session.hint is None
        assert not session.map_prior_log
        assert poses[-1].y == pytest.approx(500.0, abs=1e-6)


def _std_series(cap_enabled, steps=500):
    config = ToolkitConfig().with_overrides([f'fusion.cap_enabled={cap_enabled}',
                                             'fusion.window=100'])
    session = FusionSession(config=config)
    start_without_gps(session)
    odometry_drive(session, steps, Pose(1.0, 0.0, 0.0))
    records = [r for r in session.records if r.initialized]
    return np.array([r.std_m for r in records]), records, session


class TestUncertaintyCap:

    def test_grows_without_cap(self):
        stds, records, _ = _std_series(False)
        assert np.all(np.diff(stds) >= -1e-12)
        assert stds[-1] > 3.0
        assert not any(r.cap_prior for r in records)

    def test_bounded_with_cap(self):
        uncapped, _, _ = _std_series(False)
        capped, records, session = _std_series(True)
        width = session.default_road_width
        crossing = int(np.argmax(uncapped > width))
        growth = uncapped[crossing] - uncapped[crossing - 1]
        assert any(r.cap_prior for r in records)
        assert session.graph.priors('cap') or session.graph.priors('marginal')
        assert capped.max() <= width + growth


class TestSlidingWindow:

    def test_matches_unbounded_window(self, config):
        results = []
        for window in (0, 20):
            cfg = config.with_overrides(['init.samples=5', f'fusion.window={window}'])
            session = FusionSession(config=cfg)
            gps_drive(session, 200)
            results.append(session)
        unbounded, windowed = results
        assert len(windowed.graph) <= 20
        assert len(unbounded.graph) > 100
        for (t0, a), (t1, b) in zip(unbounded.online, windowed.online):
            assert t0 == t1
            assert np.linalg.norm(a.translation - b.translation) < 1e-2


class _Recorder:
    logger = logging.getLogger('recorder')

    def __init__(self):
        self.calls = []

    def step(self, t, delta, gps):
        self.calls.append((t, gps))
        return None


class TestReplay:

    def test_fix_attaches_to_next_step(self):
        odometry = [(float(t), Pose()) for t in range(5)]
        fixes = [GpsFix(1.0, 0.0, 0.0), GpsFix(2.5, 1.0, 0.0), GpsFix(2.7, 2.0, 0.0),
                 GpsFix(9.0, 3.0, 0.0)]
        recorder = _Recorder()
        replay(recorder, odometry, fixes)
        attached = {t: gps for t, gps in recorder.calls}
        assert attached[0.0] is None
        assert attached[1.0].east == 0.0
        assert attached[2.0] is None
        assert attached[3.0].east == 2.0
        assert attached[4.0] is None

    def test_unsorted_fixes(self):
        recorder = _Recorder()
        replay(recorder, [(0.0, Pose()), (1.0, Pose())],
               [GpsFix(1.0, 5.0, 0.0), GpsFix(0.0, 4.0, 0.0)])
        assert [gps.east for _, gps in recorder.calls] == [4.0, 5.0]


def test_step_record_without_pose():
    row = StepRecord(0.0, None, False).as_row()
    assert np.isnan(row['x'])
    assert row['edge_id'] == -1
