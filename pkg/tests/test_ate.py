# -*- coding: utf-8 -*-

import math

import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from mapfusion.evaluation.ate import align_6dof, associate, ate_2d, evaluate
from mapfusion.evaluation.trajectory import Trajectory
from mapfusion.exceptions import AlignmentError, AssociationError, TimestampOrderError
from mapfusion.geom import Pose


def curvy_trajectory(rng, n=100, dt=0.1):
    """A 3D wandering path, not collinear."""
    t = np.arange(n) * dt
    xyz = np.column_stack([10.0 * t, 20.0 * np.sin(0.3 * t), 2.0 * np.cos(0.2 * t)])
    xyz += rng.normal(0.0, 0.01, size=xyz.shape)
    return Trajectory((float(ti), Pose(*p)) for ti, p in zip(t, xyz))


def random_transform(rng, planar=False):
    if planar:
        rotation = Rotation.from_euler('z', rng.uniform(-math.pi, math.pi))
        translation = np.append(rng.uniform(-100, 100, size=2), 0.0)
    else:
        rotation = Rotation.random(random_state=int(rng.integers(1 << 31)))
        translation = rng.uniform(-100, 100, size=3)
    return Pose.from_rotation(rotation, translation)


class TestTrajectory:

    def test_timestamps_must_increase(self):
        with pytest.raises(TimestampOrderError):
            Trajectory([(1.0, Pose()), (1.0, Pose())])

    def test_transformed(self, rng):
        trajectory = curvy_trajectory(rng, 5)
        shift = Pose(1.0, 2.0, 3.0)
        moved = trajectory.transformed(shift)
        assert np.allclose(moved.positions, trajectory.positions + [1.0, 2.0, 3.0])


class TestAssociate:

    def test_nearest_in_time(self):
        est = Trajectory([(0.0, Pose(0, 0, 0)), (1.01, Pose(1, 0, 0)), (2.5, Pose(2, 0, 0))])
        gt = Trajectory([(0.0, Pose()), (1.0, Pose()), (2.0, Pose())])
        pairs = associate(est, gt, max_dt=0.02)
        assert [t for t, _, _ in pairs] == [0.0, 1.0]
        assert pairs[1][1].x == 1.0

    def test_estimate_used_once(self):
        est = Trajectory([(1.0, Pose())])
        gt = Trajectory([(0.99, Pose()), (1.005, Pose())])
        pairs = associate(est, gt, max_dt=0.02)
        assert [t for t, _, _ in pairs] == [1.005]

    def test_empty(self):
        with pytest.raises(AssociationError):
            associate(Trajectory(), Trajectory([(0.0, Pose())]))

    def test_nothing_pairs(self):
        with pytest.raises(AssociationError):
            associate(Trajectory([(0.0, Pose())]), Trajectory([(5.0, Pose())]))


class TestAlignment:

    def test_recovers_known_transform(self, rng):
        gt = curvy_trajectory(rng)
        transform = random_transform(rng)
        est = gt.transformed(transform.inverse())
        recovered = align_6dof(associate(est, gt))
        assert np.allclose(recovered.translation, transform.translation, atol=1e-9)
        assert (recovered.rotation.inv() * transform.rotation).magnitude() < 1e-9

    def test_collinear_uses_yaw_only(self):
        gt = Trajectory((float(k), Pose(float(k), float(k), 0.0)) for k in range(10))
        est = Trajectory((float(k), Pose(0.0, 2.0 * k, 5.0)) for k in range(10))
        transform = align_6dof(associate(est, gt))
        roll, pitch, yaw = transform.euler()
        assert roll == pytest.approx(0.0, abs=1e-12)
        assert pitch == pytest.approx(0.0, abs=1e-12)
        assert yaw == pytest.approx(-math.pi / 4)

    def test_needs_two_pairs(self):
        trajectory = Trajectory([(0.0, Pose())])
        with pytest.raises(AlignmentError):
            align_6dof(associate(trajectory, trajectory))


class TestAte:

    def test_perfect_estimate(self, rng):
        gt = curvy_trajectory(rng)
        report = evaluate(gt.transformed(random_transform(rng)), gt)
        assert report.rmse == pytest.approx(0.0, abs=1e-6)
        assert not report.delocalized

    def test_invariant_under_common_motion(self, rng):
        gt = curvy_trajectory(rng)
        noisy = Trajectory((t, Pose(*(p.translation + rng.normal(0, 0.5, size=3)))) for t, p in gt)
        base = evaluate(noisy, gt)
        for _ in range(5):
            motion = random_transform(rng, planar=True)
            moved = evaluate(noisy.transformed(motion), gt.transformed(motion))
            assert moved.rmse == pytest.approx(base.rmse, abs=1e-9)
            assert moved.max_error == pytest.approx(base.max_error, abs=1e-9)

    def test_horizontal_only(self):
        gt = Trajectory((float(k), Pose(float(k), 0.0, 0.0)) for k in range(5))
        est = Trajectory((float(k), Pose(float(k), 0.0, 7.0)) for k in range(5))
        report = evaluate(est, gt, align=False)
        assert report.max_error == 0.0

    def test_delocalization_outlier(self):
        gt = Trajectory((float(k), Pose(float(k), 0.0, 0.0)) for k in range(100))
        poses = [Pose(float(k), 25.0 if k == 50 else 0.0, 0.0) for k in range(100)]
        est = Trajectory(zip(map(float, range(100)), poses))
        report = evaluate(est, gt, align=False)
        assert report.max_error == pytest.approx(25.0)
        assert report.delocalized
        assert not evaluate(est, gt, align=False, metric='rmse').delocalized

    def test_unknown_metric(self):
        trajectory = Trajectory([(0.0, Pose()), (1.0, Pose(1, 0, 0))])
        with pytest.raises(ValueError):
            ate_2d(associate(trajectory, trajectory), metric='median')

    def test_report_outputs(self, rng):
        gt = curvy_trajectory(rng, 10)
        report = evaluate(gt, gt)
        result = report.to_dict()
        assert result['pairs'] == 10
        assert result['deloc_metric'] == 'max'
        assert set(result['alignment']) == {'translation', 'quaternion'}
        frame = report.to_frame()
        assert list(frame.columns) == ['timestamp', 'error_m']
        assert len(frame) == 10
