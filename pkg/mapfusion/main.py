#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Main entry point for the Map-Fusion toolkit.
"""

import sys
import argparse
from typing import List, Optional

from . import commands
from .config import APP_NAME, APP_VERSION, ToolkitConfig
from .evaluation.ate import DELOC_METRICS
from .exceptions import MapFusionError
from .file_io.trajectory_io import ODOMETRY_KINDS
from .utils.logging_config import get_logger, setup_logging


def build_parser() -> argparse.ArgumentParser:
    """Argument parser for every subcommand."""
    parser = argparse.ArgumentParser(prog='mapfusion', description=APP_NAME)
    parser.add_argument('--version', action='version', version=f"%(prog)s {APP_VERSION}")
    parser.add_argument('--debug', action='store_true', help='Enable debug logging')
    parser.add_argument('--log-file', type=str, help='Log file path')
    parser.add_argument('--config', type=str,
                        help='Configuration file (default: $MAPFUSION_CONFIG)')
    parser.add_argument('--set', dest='overrides', action='append', default=[],
                        metavar='SECTION.KEY=VALUE', help='Override one configuration value')
    sub = parser.add_subparsers(dest='command', required=True)

    map_parser = sub.add_parser('map', help='Build and edit road maps')
    map_sub = map_parser.add_subparsers(dest='map_command', required=True)

    build = map_sub.add_parser('build', help='Build a map file from an OSM extract')
    build.add_argument('--input', required=True, help='OSM XML (.osm/.xml) or Overpass JSON')
    build.add_argument('--output', required=True, help='Map file to write')
    build.add_argument('--step', type=float, help='Interpolation step in meters')
    build.add_argument('--window', type=int, help='Rolling-average window (odd)')
    build.add_argument('--json', help='Also write a debug JSON view')
    build.set_defaults(handler=commands.cmd_map_build)

    lanes = map_sub.add_parser('set-lanes', help='Override the lane count of an edge')
    lanes.add_argument('--map', required=True)
    lanes.add_argument('--edge', type=int, required=True)
    lanes.add_argument('--lanes', type=int, required=True)
    lanes.add_argument('--output', help='Map file to write (default: in place)')
    lanes.set_defaults(handler=commands.cmd_map_set_lanes)

    dump = map_sub.add_parser('dump-json', help='Write the debug JSON view of a map')
    dump.add_argument('--map', required=True)
    dump.add_argument('--output', required=True)
    dump.set_defaults(handler=commands.cmd_map_dump_json)

    fuse = sub.add_parser('fuse', help='Fuse odometry, GPS and map priors')
    fuse.add_argument('--map', help='Map file')
    fuse.add_argument('--odom', required=True, help='Odometry stream in trajectory format')
    fuse.add_argument('--odom-kind', choices=ODOMETRY_KINDS, default='delta')
    fuse.add_argument('--gps', help='GPS CSV file')
    fuse.add_argument('--output', required=True, help='Estimated trajectory to write')
    fuse.add_argument('--no-map', action='store_true', help='Disable map priors')
    fuse.add_argument('--require-gps-init', action='store_true',
                      help='Fail instead of initializing from configured scale and heading')
    fuse.add_argument('--debug', dest='debug_csv', metavar='CSV',
                      help='Write per-step debug records')
    fuse.add_argument('--debug-matches', metavar='CSV', help='Write per-step map matches')
    fuse.set_defaults(handler=commands.cmd_fuse)

    simulate = sub.add_parser('simulate', help='Generate synthetic drives')
    simulate.add_argument('--map', required=True)
    simulate.add_argument('--scenario', action='append', required=True,
                          help='Scenario file; repeat for several')
    simulate.add_argument('--out-dir', required=True)
    simulate.add_argument('--jobs', type=int, default=1)
    simulate.add_argument('--report', action='store_true',
                          help='Also fuse with and without map priors and write a report')
    simulate.set_defaults(handler=commands.cmd_simulate)

    evaluate = sub.add_parser('eval', help='Absolute trajectory error')
    evaluate.add_argument('--est', required=True)
    evaluate.add_argument('--gt', required=True)
    evaluate.add_argument('--no-align', action='store_true')
    evaluate.add_argument('--deloc-metric', choices=DELOC_METRICS, default='max')
    evaluate.add_argument('--max-dt', type=float, help='Association tolerance in seconds')
    evaluate.add_argument('--output', help='JSON report (default: stdout)')
    evaluate.add_argument('--per-pose', metavar='CSV', help='Write per-pose errors')
    evaluate.set_defaults(handler=commands.cmd_eval)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point for the Map-Fusion toolkit."""
    parser = build_parser()
    args = parser.parse_args(argv)

    setup_logging(debug=args.debug, log_file=args.log_file)
    logger = get_logger(__name__)

    try:
        config = ToolkitConfig.load(args.config, args.overrides)
        logger.debug(f"Running '{args.command}' with {config}")
        return args.handler(args, config)
    except (MapFusionError, OSError) as e:
        logger.error(f"{args.command} failed: {e}")
        print(f"error: {e}", file=sys.stderr)
        return commands.EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
