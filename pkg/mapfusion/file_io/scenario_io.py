#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Scenario files for the simulator.

One ``key = value`` pair per line, ``#`` comments. Example::

    name = tunnel
    seed = 3
    route = 1, 2, 3
    speed = 10
    odom_rate_hz = 10
    drift.lateral_drift = 0.005
    drift.yaw_drift_deg = 0.02
    gps.period_s = 5
    gps.noise_std_m = 0.5
    gps.dropouts = 45-75, 120-130
    config.fusion.use_gps_after_init = false
"""

import logging
from pathlib import Path
from typing import Any, Callable, Dict, List, Tuple, Union

from ..exceptions import ConfigError
from ..sim.scenario import DriftSpec, GpsSpec, Scenario
from .base_reader import TextFileReader

logger = logging.getLogger(__name__)

CONFIG_PREFIX = 'config.'

DRIFT_KEYS = {
    'drift.lateral_drift': 'lateral_drift',
    'drift.yaw_drift_deg': 'yaw_drift_deg',
    'drift.scale_error': 'scale_error',
    'drift.step_pos_std': 'step_pos_std',
    'drift.step_rot_std_deg': 'step_rot_std_deg',
}

GPS_KEYS = {
    'gps.period_s': 'period',
    'gps.noise_std_m': 'noise_std',
    'gps.dropouts': 'dropouts',
}


def _floats(text: str) -> List[float]:
    return [float(part) for part in text.split(',') if part.strip()]


def _ints(text: str) -> List[int]:
    return [int(part) for part in text.split(',') if part.strip()]


def parse_dropouts(text: str) -> Tuple[Tuple[float, float], ...]:
    """Parse ``"a-b, c-d"`` into dropout windows in seconds."""
    windows = []
    for part in text.split(','):
        part = part.strip()
        if not part:
            continue
        start, sep, end = part.partition('-')
        if not sep:
            raise ValueError(f"dropout {part!r} must look like start-end")
        windows.append((float(start), float(end)))
    return tuple(windows)


def format_dropouts(windows) -> str:
    return ', '.join(f"{start!r}-{end!r}" for start, end in windows)


_SCALARS: Dict[str, Callable[[str], Any]] = {
    'name': str,
    'seed': int,
    'route': _ints,
    'speed': _floats,
    'odom_rate_hz': float,
}


class ScenarioReader(TextFileReader):
    """Reader for simulator scenario files."""

    EXTENSIONS = ('.scenario', '.scn')

    @classmethod
    def can_read(cls, file_path: str) -> bool:
        if cls.has_extension(file_path):
            return True
        line = cls.first_content_line(file_path)
        return line is not None and '=' in line and line.split('=', 1)[0].strip() in (
            set(_SCALARS) | set(DRIFT_KEYS) | set(GPS_KEYS))

    def read(self) -> bool:
        values: Dict[str, Any] = {}
        drift: Dict[str, float] = {}
        gps: Dict[str, Any] = {}
        config: Dict[str, str] = {}
        seen: Dict[str, int] = {}

        for number, line in self.content_lines():
            key, sep, raw = line.partition('=')
            key, raw = key.strip(), raw.strip()
            if not sep or not key:
                raise self.fail(f"expected key = value, got {line!r}", number)
            if key in seen:
                raise self.fail(f"duplicate key {key!r} (first on line {seen[key]})", number)
            seen[key] = number
            try:
                if key in _SCALARS:
                    values[key] = _SCALARS[key](raw)
                elif key in DRIFT_KEYS:
                    drift[DRIFT_KEYS[key]] = float(raw)
                elif key == 'gps.dropouts':
                    gps['dropouts'] = parse_dropouts(raw)
                elif key in GPS_KEYS:
                    gps[GPS_KEYS[key]] = float(raw)
                elif key.startswith(CONFIG_PREFIX) and '.' in key[len(CONFIG_PREFIX):]:
                    config[key[len(CONFIG_PREFIX):]] = raw
                else:
                    raise self.fail(f"unknown key {key!r}", number)
            except ValueError as e:
                raise self.fail(f"bad value for {key}: {e}", number)

        if 'route' not in values:
            raise self.fail("missing required key 'route'")
        try:
            scenario = Scenario(route=values['route'],
                                speeds=values.get('speed', (10.0,)),
                                odom_rate_hz=values.get('odom_rate_hz', 10.0),
                                drift=DriftSpec(**drift),
                                gps=GpsSpec(**gps),
                                seed=values.get('seed', 0),
                                name=values.get('name', Path(self.file_path).stem),
                                config=config)
        except ConfigError as e:
            raise self.fail(str(e))

        self.data['scenario'] = scenario
        self.metadata['format'] = 'scenario'
        self.metadata['name'] = scenario.name
        return True

    def scenario(self) -> Scenario:
        if 'scenario' not in self.data:
            self.read()
        return self.data['scenario']


def read_scenario(path: Union[str, Path]) -> Scenario:
    """Read a scenario file.

    Raises
    ------
    FileFormatError
        For unknown or duplicate keys, bad values and invalid scenarios.
    """
    with ScenarioReader(str(path)) as reader:
        return reader.scenario()


def format_scenario(scenario: Scenario) -> str:
    """Scenario file text; reading it back gives an equal scenario."""
    drift, gps = scenario.drift, scenario.gps
    lines = [
        f"name = {scenario.name}",
        f"seed = {scenario.seed}",
        f"route = {', '.join(str(e) for e in scenario.route)}",
        f"speed = {', '.join(repr(s) for s in scenario.speeds)}",
        f"odom_rate_hz = {scenario.odom_rate_hz!r}",
    ]
    lines.extend(f"{key} = {getattr(drift, attr)!r}" for key, attr in DRIFT_KEYS.items())
    lines.append(f"gps.period_s = {gps.period!r}")
    lines.append(f"gps.noise_std_m = {gps.noise_std!r}")
    if gps.dropouts:
        lines.append(f"gps.dropouts = {format_dropouts(gps.dropouts)}")
    lines.extend(f"{CONFIG_PREFIX}{key} = {value}" for key, value in sorted(scenario.config.items()))
    return '\n'.join(lines) + '\n'


def write_scenario(path: Union[str, Path], scenario: Scenario):
    with open(path, 'w', encoding='utf-8', newline='\n') as handle:
        handle.write(format_scenario(scenario))
