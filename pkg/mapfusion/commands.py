#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Command implementations behind the ``mapfusion`` command line.

Every command takes the parsed arguments and the loaded configuration and
returns an exit code: 0 on success, 1 when fusion ran but the optimizer
flagged a degraded solution. Errors propagate as exceptions and are turned
into exit code 2 by :func:`mapfusion.main.main`.
"""

import dataclasses
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import pandas as pd

from .config import ToolkitConfig
from .evaluation.ate import evaluate
from .exceptions import ConfigError, MapFusionError
from .file_io.file_importer import FileImporter
from .file_io.gps_io import GpsReader, write_gps
from .file_io.map_reader import MapFileReader, OsmReader
from .file_io.scenario_io import read_scenario
from .file_io.trajectory_io import TrajectoryReader, odometry_from_trajectory, write_trajectory
from .fusion.session import FusionSession, replay
from .mapgraph.graph_builder import build_graph
from .mapgraph.map_graph import MapGraph
from .mapgraph.map_io import save_map, write_map_json
from .sim.evaluation import evaluate_scenario
from .sim.generator import generate

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_DEGRADED = 1
EXIT_ERROR = 2


def _load_map(path: str, importer: Optional[FileImporter] = None) -> MapGraph:
    if importer is None:
        importer = FileImporter()
    return importer.import_as(path, MapFileReader).get_data()['map']


def write_json(path: Optional[str], payload: Dict[str, Any]):
    """Write sorted, indented JSON to ``path`` or stdout when None."""
    text = json.dumps(payload, indent=2, sort_keys=True) + '\n'
    if path is None:
        print(text, end='')
        return
    with open(path, 'w', encoding='utf-8', newline='\n') as handle:
        handle.write(text)


# ----------------------------------------------------------------------
# map
# ----------------------------------------------------------------------
def cmd_map_build(args, config: ToolkitConfig) -> int:
    """Build a map file from an OSM extract."""
    extract = FileImporter().import_as(args.input, OsmReader).get_data()['extract']
    cfg = config.mapgraph
    step = args.step if args.step is not None else cfg.step_m
    window = args.window if args.window is not None else cfg.window
    if step <= 0:
        raise ConfigError(f"--step must be > 0, got {step}")
    if window < 1 or window % 2 == 0:
        raise ConfigError(f"--window must be odd and >= 1, got {window}")
    map_graph = build_graph(extract, step, window, cfg.default_lanes, cfg.lane_width_m,
                            cfg.grid_cell_m)
    save_map(map_graph, args.output)
    if args.json:
        write_map_json(map_graph, args.json)
    return EXIT_OK


def cmd_map_set_lanes(args, config: ToolkitConfig) -> int:
    """Override the lane count of one edge."""
    if args.lanes < 1:
        raise ConfigError(f"--lanes must be >= 1, got {args.lanes}")
    map_graph = _load_map(args.map)
    if args.edge not in map_graph.edges:
        raise MapFusionError(f"edge {args.edge} is not in {args.map}")
    updated = map_graph.with_lane_count(args.edge, args.lanes)
    save_map(updated, args.output or args.map)
    logger.info(f"Edge {args.edge}: {map_graph.edges[args.edge].lane_count} -> "
                f"{args.lanes} lanes")
    return EXIT_OK


def cmd_map_dump_json(args, config: ToolkitConfig) -> int:
    """Write the debug JSON view of a map file."""
    write_map_json(_load_map(args.map), args.output)
    return EXIT_OK


# ----------------------------------------------------------------------
# fuse
# ----------------------------------------------------------------------
def run_fusion(map_graph: Optional[MapGraph], odometry, fixes, config: ToolkitConfig,
               require_gps_init: bool = False) -> FusionSession:
    """Replay odometry and GPS through a new session.

    Without fixes the session is initialized from the configured scale and
    heading unless ``require_gps_init`` is set.
    """
    if not odometry:
        raise MapFusionError("odometry stream is empty")
    session = FusionSession(map_graph, config)
    if fixes:
        replay(session, odometry, fixes)
    elif require_gps_init:
        raise MapFusionError("no GPS fixes given and --require-gps-init is set")
    else:
        t0, _ = odometry[0]
        session.step(t0)
        session.initialize_without_gps()
        replay(session, odometry[1:])
    if not session.initialized:
        raise MapFusionError("fusion never initialized: not enough GPS motion for "
                             f"{session.init_state.samples_required} samples")
    return session


def cmd_fuse(args, config: ToolkitConfig) -> int:
    """Fuse odometry with GPS and map priors into a global trajectory."""
    if args.no_map:
        config = dataclasses.replace(
            config, fusion=dataclasses.replace(config.fusion, map_priors=False))
    if args.map is None and not args.no_map:
        raise ConfigError("--map is required unless --no-map is given")
    importer = FileImporter()
    map_graph = _load_map(args.map, importer) if args.map else None
    if map_graph is not None:
        importer.frame = map_graph.frame

    trajectory = importer.import_as(args.odom, TrajectoryReader).trajectory()
    odometry = odometry_from_trajectory(trajectory, args.odom_kind)
    fixes = []
    if args.gps:
        fixes = importer.import_as(args.gps, GpsReader).fixes()

    session = run_fusion(map_graph, odometry, fixes, config, args.require_gps_init)
    write_trajectory(args.output, session.online)
    logger.info(f"Wrote {len(session.online)} poses to {args.output}")

    if args.debug_csv:
        pd.DataFrame([r.as_row() for r in session.records]).to_csv(
            args.debug_csv, index=False, float_format='%.17g')
    if args.debug_matches:
        rows = [dict(t=r.t, **r.match.as_row()) for r in session.records if r.match is not None]
        pd.DataFrame(rows).to_csv(args.debug_matches, index=False, float_format='%.17g')

    if session.degraded:
        logger.warning("Optimizer reported a degraded solution")
        return EXIT_DEGRADED
    return EXIT_OK


# ----------------------------------------------------------------------
# simulate
# ----------------------------------------------------------------------
def stream_paths(out_dir: Path, name: str) -> Dict[str, Path]:
    return {
        'truth': out_dir / f"{name}_truth.txt",
        'odometry': out_dir / f"{name}_odom.txt",
        'gps': out_dir / f"{name}_gps.csv",
        'report': out_dir / f"{name}_report.json",
    }


def simulate_one(map_path: str, scenario_path: str, out_dir: str,
                 config: ToolkitConfig, report: bool) -> Tuple[str, bool]:
    """Simulate one scenario file and write its streams.

    Returns the scenario name and whether a fusion arm was degraded.
    """
    map_graph = _load_map(map_path)
    scenario = read_scenario(scenario_path)
    drive = generate(map_graph, scenario)
    paths = stream_paths(Path(out_dir), scenario.name)
    write_trajectory(paths['truth'], drive.truth, header=f"{scenario.name} ground truth")
    write_trajectory(paths['odometry'], drive.odometry, header=f"{scenario.name} odometry deltas")
    write_gps(paths['gps'], drive.gps)
    degraded = False
    if report:
        result = evaluate_scenario(map_graph, scenario, config)
        write_json(str(paths['report']), result.to_dict())
        degraded = result.with_map.degraded or result.without_map.degraded
    return scenario.name, degraded


def cmd_simulate(args, config: ToolkitConfig) -> int:
    """Generate synthetic streams, optionally with a fusion report per scenario."""
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    scenarios: List[str] = list(args.scenario)
    if args.jobs < 1:
        raise ConfigError(f"--jobs must be >= 1, got {args.jobs}")

    names = [read_scenario(path).name for path in scenarios]
    duplicates = sorted({n for n in names if names.count(n) > 1})
    if duplicates:
        raise MapFusionError(f"scenario names must be unique, repeated: {', '.join(duplicates)}")

    jobs = [(args.map, path, str(out_dir), config, args.report) for path in scenarios]
    if args.jobs == 1 or len(jobs) == 1:
        results = [simulate_one(*job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(simulate_one, *zip(*jobs)))
    logger.info(f"Simulated {len(results)} scenario(s) into {out_dir}")
    return EXIT_DEGRADED if any(degraded for _, degraded in results) else EXIT_OK


# ----------------------------------------------------------------------
# eval
# ----------------------------------------------------------------------
def cmd_eval(args, config: ToolkitConfig) -> int:
    """Horizontal ATE of an estimated trajectory against ground truth."""
    importer = FileImporter()
    est = importer.import_as(args.est, TrajectoryReader).trajectory()
    gt = importer.import_as(args.gt, TrajectoryReader).trajectory()
    max_dt = args.max_dt if args.max_dt is not None else config.sim.assoc_max_dt_s
    report = evaluate(est, gt, max_dt, align=not args.no_align, metric=args.deloc_metric)
    write_json(args.output, report.to_dict())
    if args.per_pose:
        report.to_frame().to_csv(args.per_pose, index=False, float_format='%.17g')
    logger.info(f"ATE rmse {report.rmse:.3f} m, max {report.max_error:.3f} m over "
                f"{len(report.errors)} pairs")
    return EXIT_OK
