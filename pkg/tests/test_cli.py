# -*- coding: utf-8 -*-

import json

import numpy as np
import pytest

from mapfusion.commands import EXIT_ERROR, EXIT_OK
from mapfusion.file_io.gps_io import read_gps
from mapfusion.file_io.trajectory_io import read_trajectory
from mapfusion.main import main
from mapfusion.mapgraph.map_io import load_map_file
from mapfusion.sim.synthetic_maps import straight_road, to_osm_xml

SCENARIO = """\
name = east
seed = 4
route = 0
speed = 10
drift.lateral_drift = 0.005
drift.yaw_drift_deg = 0.01
gps.period_s = 1
gps.noise_std_m = 0.3
config.init.samples = 5
"""


@pytest.fixture(autouse=True)
def no_config_env(monkeypatch):
    monkeypatch.delenv('MAPFUSION_CONFIG', raising=False)


@pytest.fixture
def run(tmp_path):
    log_file = str(tmp_path / 'mapfusion.log')

    def _run(*argv):
        return main(['--log-file', log_file, *[str(a) for a in argv]])
    return _run


@pytest.fixture
def map_file(tmp_path, run):
    osm = tmp_path / 'road.osm'
    osm.write_bytes(to_osm_xml(straight_road(200.0)))
    path = tmp_path / 'road.map'
    assert run('map', 'build', '--input', osm, '--output', path) == EXIT_OK
    return path


@pytest.fixture
def simulated(tmp_path, run, map_file):
    scenario = tmp_path / 'east.scenario'
    scenario.write_text(SCENARIO, encoding='utf-8')
    out_dir = tmp_path / 'sim'
    assert run('simulate', '--map', map_file, '--scenario', scenario,
               '--out-dir', out_dir) == EXIT_OK
    return out_dir


class TestMapCommands:

    def test_build_with_json(self, tmp_path, run):
        osm = tmp_path / 'road.osm'
        osm.write_bytes(to_osm_xml(straight_road(50.0, lanes=2)))
        view = tmp_path / 'road.json'
        assert run('map', 'build', '--input', osm, '--output', tmp_path / 'road.map',
                   '--step', 2, '--json', view) == EXIT_OK
        payload = json.loads(view.read_text())
        edge, = payload['edges']
        assert edge['lanes'] == 2
        assert edge['road_width'] == pytest.approx(6.0)
        assert len(edge['waypoints']) == 26

    def test_set_lanes_in_place(self, run, map_file):
        assert run('map', 'set-lanes', '--map', map_file, '--edge', 0, '--lanes', 3) == EXIT_OK
        assert load_map_file(map_file).edges[0].lane_count == 3

    def test_set_lanes_to_new_file(self, tmp_path, run, map_file):
        output = tmp_path / 'wide.map'
        assert run('map', 'set-lanes', '--map', map_file, '--edge', 0, '--lanes', 4,
                   '--output', output) == EXIT_OK
        assert load_map_file(output).edges[0].lane_count == 4
        assert load_map_file(map_file).edges[0].lane_count == 1

    @pytest.mark.parametrize('edge, lanes', [(7, 2), (0, 0)])
    def test_set_lanes_errors(self, run, map_file, edge, lanes):
        assert run('map', 'set-lanes', '--map', map_file, '--edge', edge,
                   '--lanes', lanes) == EXIT_ERROR

    def test_dump_json(self, tmp_path, run, map_file):
        view = tmp_path / 'dump.json'
        assert run('map', 'dump-json', '--map', map_file, '--output', view) == EXIT_OK
        assert json.loads(view.read_text())['vertices']

    def test_build_errors(self, tmp_path, run):
        osm = tmp_path / 'road.osm'
        osm.write_bytes(to_osm_xml(straight_road(50.0)))
        assert run('map', 'build', '--input', osm, '--output', tmp_path / 'a.map',
                   '--window', 4) == EXIT_ERROR
        assert run('map', 'build', '--input', tmp_path / 'missing.osm',
                   '--output', tmp_path / 'b.map') == EXIT_ERROR

    def test_bad_override(self, tmp_path, run, map_file):
        assert run('--set', 'window=3', 'map', 'dump-json', '--map', map_file,
                   '--output', tmp_path / 'x.json') == EXIT_ERROR


class TestSimulate:

    def test_writes_streams(self, simulated):
        truth = read_trajectory(simulated / 'east_truth.txt')
        assert truth.positions[0, 0] == pytest.approx(-100.0, abs=0.01)
        assert len(read_trajectory(simulated / 'east_odom.txt')) == len(truth)
        assert len(read_gps(simulated / 'east_gps.csv')) >= 19
        assert not (simulated / 'east_report.json').exists()

    def test_report(self, tmp_path, run, map_file):
        scenario = tmp_path / 'east.scenario'
        scenario.write_text(SCENARIO, encoding='utf-8')
        assert run('simulate', '--map', map_file, '--scenario', scenario,
                   '--out-dir', tmp_path, '--report') == EXIT_OK
        report = json.loads((tmp_path / 'east_report.json').read_text())
        assert report['scenario'] == 'east'
        assert set(report) >= {'with_map', 'without_map'}

    def test_duplicate_names(self, tmp_path, run, map_file):
        first, second = tmp_path / 'a.scenario', tmp_path / 'b.scenario'
        first.write_text(SCENARIO, encoding='utf-8')
        second.write_text(SCENARIO, encoding='utf-8')
        assert run('simulate', '--map', map_file, '--scenario', first, '--scenario', second,
                   '--out-dir', tmp_path / 'out') == EXIT_ERROR
        assert not list((tmp_path / 'out').glob('*.txt'))


class TestFuse:

    def test_with_gps(self, tmp_path, run, map_file, simulated):
        output = tmp_path / 'est.txt'
        debug = tmp_path / 'steps.csv'
        matches = tmp_path / 'matches.csv'
        assert run('--set', 'init.samples=5', 'fuse', '--map', map_file,
                   '--odom', simulated / 'east_odom.txt', '--gps', simulated / 'east_gps.csv',
                   '--output', output, '--debug', debug, '--debug-matches', matches) == EXIT_OK
        estimate = read_trajectory(output)
        truth = read_trajectory(simulated / 'east_truth.txt')
        assert 0 < len(estimate) <= len(truth)
        assert np.abs(estimate.positions[:, 1]).max() < 5.0
        assert debug.read_text().splitlines()[0].startswith('t,')
        assert len(matches.read_text().splitlines()) > 1

    def test_no_map(self, tmp_path, run, simulated):
        output = tmp_path / 'est.txt'
        assert run('--set', 'init.samples=5', 'fuse', '--no-map',
                   '--odom', simulated / 'east_odom.txt', '--gps', simulated / 'east_gps.csv',
                   '--output', output) == EXIT_OK
        assert len(read_trajectory(output)) > 0

    def test_map_required(self, tmp_path, run, simulated):
        assert run('fuse', '--odom', simulated / 'east_odom.txt',
                   '--output', tmp_path / 'est.txt') == EXIT_ERROR

    def test_inputs_of_the_wrong_format(self, tmp_path, run, map_file, simulated):
        assert run('fuse', '--map', map_file, '--odom', simulated / 'east_gps.csv',
                   '--output', tmp_path / 'est.txt') == EXIT_ERROR
        assert run('fuse', '--map', simulated / 'east_odom.txt', '--odom',
                   simulated / 'east_odom.txt', '--output', tmp_path / 'est.txt') == EXIT_ERROR
        assert not (tmp_path / 'est.txt').exists()

    def test_without_gps(self, tmp_path, run, map_file, simulated):
        output = tmp_path / 'est.txt'
        assert run('fuse', '--map', map_file, '--odom', simulated / 'east_odom.txt',
                   '--output', output) == EXIT_OK
        assert len(read_trajectory(output)) == len(read_trajectory(simulated / 'east_odom.txt'))
        assert run('fuse', '--map', map_file, '--odom', simulated / 'east_odom.txt',
                   '--output', output, '--require-gps-init') == EXIT_ERROR

    def test_never_initialized(self, tmp_path, run, map_file, simulated):
        assert run('fuse', '--map', map_file, '--odom', simulated / 'east_odom.txt',
                   '--gps', simulated / 'east_gps.csv',
                   '--output', tmp_path / 'est.txt') == EXIT_ERROR

    def test_bad_odometry(self, tmp_path, run, map_file):
        odom = tmp_path / 'odom.txt'
        odom.write_text("0 0 0 0 0 0 0 1\n0 0 0 0 0 0 0 1\n", encoding='utf-8')
        assert run('fuse', '--map', map_file, '--odom', odom,
                   '--output', tmp_path / 'est.txt') == EXIT_ERROR


class TestEval:

    def test_report_to_file(self, tmp_path, run, simulated):
        truth = simulated / 'east_truth.txt'
        output = tmp_path / 'ate.json'
        per_pose = tmp_path / 'errors.csv'
        assert run('eval', '--est', truth, '--gt', truth, '--output', output,
                   '--per-pose', per_pose) == EXIT_OK
        report = json.loads(output.read_text())
        assert report['rmse'] == pytest.approx(0.0, abs=1e-6)
        assert report['delocalized'] is False
        assert per_pose.read_text().splitlines()[0] == 'timestamp,error_m'

    def test_report_to_stdout(self, run, simulated, capsys):
        truth = simulated / 'east_truth.txt'
        assert run('eval', '--est', truth, '--gt', truth, '--no-align',
                   '--deloc-metric', 'rmse') == EXIT_OK
        assert json.loads(capsys.readouterr().out)['deloc_metric'] == 'rmse'

    def test_no_pairs(self, tmp_path, run, simulated):
        shifted = tmp_path / 'late.txt'
        shifted.write_text("1000 0 0 0 0 0 0 1\n1001 1 0 0 0 0 0 1\n", encoding='utf-8')
        assert run('eval', '--est', shifted, '--gt', simulated / 'east_truth.txt') == EXIT_ERROR


def test_pipeline_is_deterministic(tmp_path, run, map_file):
    scenario = tmp_path / 'east.scenario'
    scenario.write_text(SCENARIO, encoding='utf-8')
    outputs = []
    for attempt in ('one', 'two'):
        out_dir = tmp_path / attempt
        assert run('simulate', '--map', map_file, '--scenario', scenario,
                   '--out-dir', out_dir) == EXIT_OK
        assert run('--set', 'init.samples=5', 'fuse', '--map', map_file,
                   '--odom', out_dir / 'east_odom.txt', '--gps', out_dir / 'east_gps.csv',
                   '--output', out_dir / 'est.txt') == EXIT_OK
        assert run('eval', '--est', out_dir / 'est.txt', '--gt', out_dir / 'east_truth.txt',
                   '--output', out_dir / 'ate.json') == EXIT_OK
        outputs.append({name: (out_dir / name).read_bytes()
                        for name in ('east_truth.txt', 'east_odom.txt', 'east_gps.csv',
                                     'est.txt', 'ate.json')})
    assert outputs[0] == outputs[1]
