# -*- coding: utf-8 -*-

import math
import warnings

import numpy as np
import pytest

from mapfusion.exceptions import DegenerateHeadingError, ProjectionRangeWarning
from mapfusion.geom import (GeoPoint, LocalFrame, Pose, circular_mean, compose, enu_to_geo,
                            geo_to_enu, heading_between, headings_along,
                            quat_angular_distance_deg, relative, wrap_angle)


def random_pose(rng):
    return Pose.from_euler(*rng.uniform(-50, 50, size=3),
                           roll=rng.uniform(-1, 1), pitch=rng.uniform(-1, 1),
                           yaw=rng.uniform(-math.pi, math.pi))


class TestPose:

    def test_identity_compose_returns_input(self, rng):
        pose = random_pose(rng)
        assert compose(Pose.identity(), pose).allclose(pose, atol=1e-12)
        assert compose(pose, Pose.identity()).allclose(pose, atol=1e-12)

    def test_compose_with_inverse_is_identity(self, rng):
        pose = random_pose(rng)
        assert compose(pose, pose.inverse()).allclose(Pose.identity())

    def test_compose_rotated_translation(self):
        a = Pose.from_euler(1.0, 0.0, 0.0, yaw=math.pi / 2)
        b = Pose.from_euler(1.0, 0.0, 0.0)
        result = compose(a, b)
        np.testing.assert_allclose(result.translation, [1.0, 1.0, 0.0], atol=1e-12)
        assert result.yaw == pytest.approx(math.pi / 2)

    def test_compose_is_associative(self, rng):
        for _ in range(20):
            a, b, c = random_pose(rng), random_pose(rng), random_pose(rng)
            assert compose(compose(a, b), c).allclose(compose(a, compose(b, c)))

    def test_quaternion_stays_normalized(self, rng):
        pose = Pose.identity()
        for _ in range(200):
            pose = pose * random_pose(rng)
        assert np.linalg.norm(pose.quaternion) == pytest.approx(1.0, abs=1e-9)

    def test_relative_examples(self):
        assert relative(Pose.identity(), Pose(3.0, 2.0, 0.0)).allclose(Pose(3.0, 2.0, 0.0))
        facing_north = Pose.from_euler(yaw=math.pi / 2)
        np.testing.assert_allclose(relative(facing_north, Pose(0.0, 4.0, 0.0)).translation,
                                   [4.0, 0.0, 0.0], atol=1e-12)

    def test_relative_inverts_compose(self, rng):
        for _ in range(20):
            a, b = random_pose(rng), random_pose(rng)
            assert compose(a, relative(a, b)).allclose(b)
            assert relative(b, b).allclose(Pose.identity())

    def test_euler_round_trip(self, rng):
        for _ in range(50):
            roll, yaw = rng.uniform(-math.pi, math.pi, size=2)
            pitch = rng.uniform(-math.pi / 2 + 1e-3, math.pi / 2 - 1e-3)
            pose = Pose.from_euler(roll=roll, pitch=pitch, yaw=yaw)
            again = Pose.from_euler(0, 0, 0, *pose.euler())
            assert again.allclose(pose)

    def test_from_planar_matches_euler(self):
        assert Pose.from_planar(1.0, 2.0, 0.7).allclose(Pose.from_euler(1.0, 2.0, yaw=0.7))

    def test_rejects_zero_quaternion(self):
        with pytest.raises(ValueError):
            Pose(0, 0, 0, (0, 0, 0, 0))

    def test_matrix_round_trip(self, rng):
        pose = random_pose(rng)
        assert Pose.from_matrix(pose.matrix).allclose(pose)

    def test_algebra_matches_homogeneous_matrices(self, rng):
        for _ in range(20):
            a, b = random_pose(rng), random_pose(rng)
            np.testing.assert_allclose(compose(a, b).matrix, a.matrix @ b.matrix, atol=1e-9)
            np.testing.assert_allclose(a.inverse().matrix, np.linalg.inv(a.matrix), atol=1e-9)
            np.testing.assert_allclose(a.rotation_matrix @ a.rotation_matrix.T, np.eye(3),
                                       atol=1e-12)


class TestAngularDistance:

    def test_identical_and_double_cover(self, rng):
        q = random_pose(rng).quaternion
        assert quat_angular_distance_deg(q, q) == pytest.approx(0.0, abs=1e-5)
        assert quat_angular_distance_deg(q, -q) == pytest.approx(0.0, abs=1e-5)

    def test_quarter_turn(self):
        q0 = Pose.identity().quaternion
        q90 = Pose.from_euler(yaw=math.pi / 2).quaternion
        assert quat_angular_distance_deg(q0, q90) == pytest.approx(90.0)

    def test_symmetric_and_matches_half_angle_identity(self, rng):
        for _ in range(100):
            q1, q2 = random_pose(rng).quaternion, random_pose(rng).quaternion
            d = quat_angular_distance_deg(q1, q2)
            assert 0.0 <= d <= 180.0
            assert d == pytest.approx(quat_angular_distance_deg(q2, q1), abs=1e-9)
            inner = min(abs(float(np.dot(q1, q2))), 1.0)
            assert d == pytest.approx(math.degrees(2.0 * math.acos(inner)), abs=1e-6)

    def test_broadcasts(self):
        q = np.tile(Pose.identity().quaternion, (3, 1))
        np.testing.assert_allclose(quat_angular_distance_deg(q, q), np.zeros(3), atol=1e-5)


class TestHeadings:

    @pytest.mark.parametrize('target, expected', [
        ((1.0, 0.0), 0.0),
        ((1.0, 1.0), math.pi / 4),
        ((-1.0, 0.0), math.pi),
        ((0.0, -1.0), -math.pi / 2),
    ])
    def test_heading_between(self, target, expected):
        assert heading_between((0.0, 0.0), target) == pytest.approx(expected)

    def test_coincident_points_raise(self):
        with pytest.raises(DegenerateHeadingError):
            heading_between((1.0, 1.0), (1.0, 1.0))

    def test_last_vertex_copies_predecessor(self):
        headings = headings_along(np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]]))
        np.testing.assert_allclose(headings, [0.0, math.pi / 2, math.pi / 2])

    def test_wrap_angle_range(self):
        assert wrap_angle(-math.pi) == pytest.approx(math.pi)
        assert wrap_angle(3 * math.pi) == pytest.approx(math.pi)
        np.testing.assert_allclose(wrap_angle(np.array([0.0, 2 * math.pi + 0.1])), [0.0, 0.1])

    def test_circular_mean_across_the_branch_cut(self):
        mean = circular_mean([math.pi - 0.1, -math.pi + 0.1])
        assert abs(wrap_angle(mean - math.pi)) < 1e-9


class TestLocalFrame:

    def test_origin_projects_to_zero(self):
        frame = LocalFrame(GeoPoint(48.1, 11.5, 500.0))
        np.testing.assert_allclose(geo_to_enu(frame, frame.origin), [0.0, 0.0, 0.0], atol=1e-12)

    @pytest.mark.parametrize('longitude', [-120.0, 0.0, 11.5, 170.0])
    def test_north_offset_matches_meridian_arc(self, longitude):
        frame = LocalFrame(GeoPoint(45.0, longitude))
        east, north, _ = geo_to_enu(frame, GeoPoint(45.001, longitude))
        assert east == pytest.approx(0.0, abs=1e-9)
        assert north == pytest.approx(111.2, abs=0.3)

    def test_round_trip(self, rng):
        frame = LocalFrame(GeoPoint(51.75, -1.25))
        lat = 51.75 + rng.uniform(-0.1, 0.1, size=1000)
        lon = -1.25 + rng.uniform(-0.1, 0.1, size=1000)
        worst = 0.0
        for a, b in zip(lat, lon):
            back = enu_to_geo(frame, *geo_to_enu(frame, GeoPoint(a, b)))
            worst = max(worst, abs(back.latitude - a), abs(back.longitude - b))
        assert worst < 1e-6

    def test_far_point_warns(self):
        frame = LocalFrame(GeoPoint(0.0, 0.0))
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter('always')
            geo_to_enu(frame, GeoPoint(1.0, 0.0))
        assert any(issubclass(w.category, ProjectionRangeWarning) for w in caught)

    def test_far_point_strict_raises(self):
        frame = LocalFrame(GeoPoint(0.0, 0.0))
        with pytest.raises(ValueError):
            frame.geo_to_enu(GeoPoint(1.0, 0.0), strict=True)

    def test_geopoint_range_checked(self):
        with pytest.raises(ValueError):
            GeoPoint(91.0, 0.0)
        with pytest.raises(ValueError):
            GeoPoint(0.0, 181.0)
