# -*- coding: utf-8 -*-

import math

import numpy as np
import pytest

from mapfusion.exceptions import FileFormatError
from mapfusion.file_io import gps_io, scenario_io, trajectory_io
from mapfusion.file_io.file_importer import FileFormatDetector, FileImporter, FileImporterFactory
from mapfusion.file_io.map_reader import MapFileReader, OsmReader
from mapfusion.geom import GeoPoint, GpsFix, LocalFrame, Pose
from mapfusion.mapgraph.map_io import save_map
from mapfusion.sim.scenario import DriftSpec, GpsSpec, Scenario
from mapfusion.sim.synthetic_maps import straight_road, to_osm_xml


def write_text(path, text):
    path.write_text(text, encoding='utf-8')
    return str(path)


class TestTrajectoryFiles:

    def test_round_trip(self, tmp_path, rng):
        stamped = [(0.1 * k, Pose.from_euler(*rng.normal(size=3), *rng.normal(size=3)))
                   for k in range(20)]
        path = tmp_path / 'est.txt'
        trajectory_io.write_trajectory(path, stamped, header='estimate')
        loaded = trajectory_io.read_trajectory(path)
        assert loaded.timestamps.tolist() == [t for t, _ in stamped]
        for (_, original), pose in zip(stamped, loaded.poses):
            assert np.array_equal(pose.translation, original.translation)
            assert pose.allclose(original, atol=1e-12)

    def test_comments_and_blank_lines(self, tmp_path):
        path = write_text(tmp_path / 'a.txt', "# t x y z qx qy qz qw\n\n"
                                              "0 1 2 3 0 0 0 1\n  \n1 2 2 3 0 0 0 2\n")
        trajectory = trajectory_io.read_trajectory(path)
        assert len(trajectory) == 2
        assert trajectory.poses[1].allclose(Pose(2.0, 2.0, 3.0))

    @pytest.mark.parametrize('text, line', [
        ("0 0 0 0 0 0 0 1\n1 0 0 0 0 0 1\n", 2),
        ("# header\n0 0 0 x 0 0 0 1\n", 2),
        ("0 0 0 0 0 0 0 1\n1 0 0 0 0 0 0 0\n", 2),
        ("0 0 0 0 0 0 0 1\n\n1 0 0 nan 0 0 0 1\n", 3),
        ("1 0 0 0 0 0 0 1\n1 0 0 0 0 0 0 1\n", 2),
        ("1 0 0 0 0 0 0 1\n2 0 0 0 0 0 0 1\n0.5 0 0 0 0 0 0 1\n", 3),
    ])
    def test_errors_name_the_line(self, tmp_path, text, line):
        path = write_text(tmp_path / 'bad.txt', text)
        with pytest.raises(FileFormatError) as excinfo:
            trajectory_io.read_trajectory(path)
        assert excinfo.value.line == line
        assert f"bad.txt:{line}" in str(excinfo.value)

    def test_absolute_odometry(self):
        from mapfusion.evaluation.trajectory import Trajectory

        poses = [Pose.from_planar(0.0, 0.0, 0.0), Pose.from_planar(1.0, 0.0, math.pi / 2),
                 Pose.from_planar(1.0, 1.0, math.pi / 2)]
        steps = trajectory_io.odometry_from_trajectory(
            Trajectory(zip([0.0, 1.0, 2.0], poses)), 'absolute')
        assert steps[0][1].allclose(Pose.identity())
        assert steps[2][1].allclose(Pose(1.0, 0.0, 0.0), atol=1e-12)

    def test_delta_odometry_ignores_first_line(self, tmp_path):
        path = write_text(tmp_path / 'odom.txt', "0 5 5 5 0 0 0 1\n1 1 0 0 0 0 0 1\n")
        steps = trajectory_io.read_odometry(path, 'delta')
        assert steps[0][1].allclose(Pose.identity())
        assert steps[1][1].allclose(Pose(1.0, 0.0, 0.0))

    def test_unknown_odometry_kind(self):
        from mapfusion.evaluation.trajectory import Trajectory

        with pytest.raises(ValueError):
            trajectory_io.odometry_from_trajectory(Trajectory(), 'relative')


class TestGpsFiles:

    def test_local_round_trip(self, tmp_path):
        fixes = [GpsFix(0.0, 1.5, -2.25), GpsFix(1.0, 3.0, 0.1, 2.0)]
        path = tmp_path / 'gps.csv'
        gps_io.write_gps(path, fixes)
        assert gps_io.read_gps(path) == fixes

    def test_covariance_is_variance(self, tmp_path):
        path = write_text(tmp_path / 'gps.csv', "timestamp,east,north,up,cov\n0,1,2,0,0.25\n")
        fix, = gps_io.read_gps(path)
        assert fix.std_m == pytest.approx(0.5)

    def test_written_covariance(self, tmp_path):
        path = tmp_path / 'gps.csv'
        gps_io.write_gps(path, [GpsFix(0.0, 0.0, 0.0, 0.0, 2.0)])
        assert path.read_text().splitlines()[0] == 'timestamp,east,north,up,cov'
        assert gps_io.read_gps(path)[0].std_m == pytest.approx(2.0)

    def test_geodetic_needs_frame(self, tmp_path):
        frame = LocalFrame(GeoPoint(48.0, 11.0))
        point = frame.enu_to_geo(100.0, 50.0, 2.0)
        path = write_text(tmp_path / 'gps.csv', "timestamp,lat,lon,alt\n"
                                                f"0,{point.latitude!r},{point.longitude!r},"
                                                f"{point.altitude!r}\n")
        fix, = gps_io.read_gps(path, frame)
        assert (fix.east, fix.north, fix.up) == pytest.approx((100.0, 50.0, 2.0), abs=1e-6)
        with pytest.raises(FileFormatError):
            gps_io.read_gps(path)

    def test_header_spacing_and_case(self, tmp_path):
        path = write_text(tmp_path / 'gps.csv', "Timestamp, East, North, Up\n0, 1, 2, 3\n")
        assert gps_io.read_gps(path) == [GpsFix(0.0, 1.0, 2.0, 3.0)]

    @pytest.mark.parametrize('text, line', [
        ("timestamp,east,north\n0,1,2\n", 1),
        ("timestamp,east,north,up,speed\n0,1,2,0,5\n", 1),
        ("timestamp,east,north,up\n0,1,2,0\n1,x,2,0\n", 3),
        ("timestamp,east,north,up\n0,1,,0\n", 2),
        ("timestamp,east,north,up\n1,1,2,0\n1,1,2,0\n", 3),
        ("timestamp,east,north,up,cov\n0,1,2,0,0\n", 2),
    ])
    def test_errors_name_the_line(self, tmp_path, text, line):
        path = write_text(tmp_path / 'gps.csv', text)
        with pytest.raises(FileFormatError) as excinfo:
            gps_io.read_gps(path)
        assert excinfo.value.line == line


class TestScenarioFiles:

    def test_documented_example(self, tmp_path):
        path = write_text(tmp_path / 'tunnel.scenario', scenario_io.__doc__.split('::')[1])
        scenario = scenario_io.read_scenario(path)
        assert scenario.name == 'tunnel'
        assert scenario.route == (1, 2, 3)
        assert scenario.gps.dropouts == ((45.0, 75.0), (120.0, 130.0))
        assert scenario.drift.yaw_drift_deg == 0.02
        assert scenario.config_overrides == ['fusion.use_gps_after_init=false']

    def test_round_trip(self, tmp_path):
        scenario = Scenario(route=[4, 5], speeds=[7.5, 12.0], odom_rate_hz=2.0,
                            drift=DriftSpec(lateral_drift=0.01, scale_error=0.8),
                            gps=GpsSpec(period=5.0, noise_std=1.0, dropouts=[(10, 20)]),
                            seed=9, name='two-edges', config={'init.samples': '5'})
        path = tmp_path / 'x.scenario'
        scenario_io.write_scenario(path, scenario)
        assert scenario_io.read_scenario(path) == scenario

    def test_name_defaults_to_file_stem(self, tmp_path):
        path = write_text(tmp_path / 'plain.scn', "route = 0\n")
        assert scenario_io.read_scenario(path).name == 'plain'

    def test_dropout_format(self):
        assert scenario_io.parse_dropouts('1-2, 3.5-4') == ((1.0, 2.0), (3.5, 4.0))
        assert scenario_io.format_dropouts([(1.0, 2.0)]) == '1.0-2.0'
        with pytest.raises(ValueError):
            scenario_io.parse_dropouts('5')

    @pytest.mark.parametrize('text, line', [
        ("route = 0\nroute = 1\n", 2),
        ("route = 0\n# ok\nmystery = 1\n", 3),
        ("route = 0\nspeed = fast\n", 2),
        ("route = 0\njust text\n", 2),
        ("seed = 1\n", None),
        ("route = 0\ngps.dropouts = 20-10\n", None),
    ])
    def test_errors(self, tmp_path, text, line):
        path = write_text(tmp_path / 'bad.scenario', text)
        with pytest.raises(FileFormatError) as excinfo:
            scenario_io.read_scenario(path)
        assert excinfo.value.line == line


class TestDetection:

    @pytest.fixture
    def files(self, tmp_path, straight_map):
        save_map(straight_map, tmp_path / 'road.map')
        (tmp_path / 'road.osm').write_bytes(to_osm_xml(straight_road(100.0)))
        gps_io.write_gps(tmp_path / 'gps.csv', [GpsFix(0.0, 0.0, 0.0)])
        trajectory_io.write_trajectory(tmp_path / 'est.txt', [(0.0, Pose())])
        write_text(tmp_path / 'run.cfg', "route = 0\n")
        write_text(tmp_path / 'notes.txt', "hello world\n")
        return tmp_path

    @pytest.mark.parametrize('name, reader', [
        ('road.map', 'MapFileReader'),
        ('road.osm', 'OsmReader'),
        ('gps.csv', 'GpsReader'),
        ('est.txt', 'TrajectoryReader'),
        ('run.cfg', 'ScenarioReader'),
    ])
    def test_detects_by_content(self, files, name, reader):
        assert FileFormatDetector.detect_format(str(files / name)).__name__ == reader

    def test_unrecognized(self, files):
        assert FileFormatDetector.detect_format(str(files / 'notes.txt')) is None
        assert FileFormatDetector.detect_format(str(files / 'missing.txt')) is None
        with pytest.raises(FileFormatError):
            FileImporterFactory.create_reader(str(files / 'notes.txt'))
        with pytest.raises(FileNotFoundError):
            FileImporterFactory.create_reader(str(files / 'missing.txt'))

    def test_supported_extensions(self):
        extensions = FileFormatDetector.get_supported_extensions()
        assert {'.csv', '.osm', '.map', '.txt', '.scenario'} <= set(extensions)
        assert extensions == sorted(extensions)

    def test_importer(self, files, straight_map):
        importer = FileImporter(frame=straight_map.frame)
        reader = importer.import_file(str(files / 'road.map'))
        assert isinstance(reader, MapFileReader)
        assert reader.map_graph() == straight_map
        assert reader.get_metadata()['edges'] == 1
        importer.import_file(str(files / 'gps.csv'))
        assert len(importer) == 2
        assert str(files / 'gps.csv') in importer
        importer.clear()
        assert len(importer) == 0

    def test_importer_reraises(self, files):
        with pytest.raises(FileFormatError):
            FileImporter().import_file(str(files / 'notes.txt'))

    def test_import_as_checks_format(self, files):
        importer = FileImporter()
        reader = importer.import_as(files / 'est.txt', trajectory_io.TrajectoryReader)
        assert len(reader.get_data()['poses']) == 1
        assert reader.get_file_info()['file_name'] == 'est.txt'
        with pytest.raises(FileFormatError, match='TrajectoryReader'):
            importer.import_as(files / 'gps.csv', trajectory_io.TrajectoryReader)

    def test_osm_reader(self, files):
        with OsmReader(str(files / 'road.osm')) as reader:
            extract = reader.extract()
            assert reader.get_metadata()['format'] == 'osm-xml'
        assert set(extract.ways) == {1}
