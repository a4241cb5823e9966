#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Configuration settings for the Map-Fusion toolkit.

Parameters live in four sections (``init``, ``fusion``, ``matcher``,
``mapgraph``) plus a small ``sim`` section. Defaults are embedded below and
can be overridden by an INI-style file and then by ``section.key=value``
flags.
"""

import configparser
import os
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, Iterable, Optional

from .exceptions import ConfigError

# Application information
APP_NAME = "Map-Fusion Toolkit"
APP_VERSION = "0.1.0"
APP_AUTHOR = "Map-Fusion Team"

# Paths
HOME_DIR = Path.home()
APP_DATA_DIR = HOME_DIR / ".mapfusion"
LOG_DIR = APP_DATA_DIR / "logs"

CONFIG_ENV_VAR = "MAPFUSION_CONFIG"

LANE_WIDTH_M = 3.0
DELOCALIZATION_THRESHOLD_M = 20.0

SCALE_MODES = ('linear-ratio', 'literal-squared')

# Default settings
DEFAULT_SETTINGS = {
    'init': {
        'md_m': 10.0,
        'ms_kmh': 18.0,
        'f_gps_hz': 1.0,
        'f_vo_hz': 10.0,
        'samples': 50,
        'scale_mode': 'linear-ratio',
        'fixed_scale': None,
        'initial_heading_deg': 0.0,
    },
    'fusion': {
        'odom_pre_pos_std_m': 10.0,
        'odom_pre_rot_std_deg': 0.5,
        'odom_post_pos_std_m': 0.1,
        'odom_post_pos_std_frac': 0.01,
        'odom_post_rot_std_deg': 0.5,
        'gps_std_m': 0.5,
        'anchor_z_std_m': 1.0,
        'anchor_rot_std_deg': 5.0,
        'map_yaw_std_deg': 10.0,
        'eigen_floor_m2': 0.01,
        'stationary_eps_m': 1e-3,
        'window': 500,
        'cap_enabled': True,
        'map_priors': True,
        'use_gps_after_init': True,
        'max_iterations': 100,
        'step_tol': 1e-10,
    },
    'matcher': {
        'radius_m': 20.0,
        'widen_radius_m': 50.0,
    },
    'mapgraph': {
        'step_m': 1.0,
        'window': 5,
        'default_lanes': 1,
        'lane_width_m': LANE_WIDTH_M,
        'grid_cell_m': 20.0,
    },
    'sim': {
        'assoc_max_dt_s': 0.02,
    },
}

# Logging configuration
LOG_FILE = LOG_DIR / 'mapfusion.log'
LOGGER_NAME = 'mapfusion'
CONSOLE_HANDLER = 'mapfusion_console'
FILE_HANDLER = 'mapfusion_file'

# Records of every toolkit module go to stderr and to a per-user log file;
# stdout is reserved for command output such as ATE reports.
LOGGING_CONFIG = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'mapfusion_brief': {
            'format': '%(levelname)s %(name)s: %(message)s'
        },
        'mapfusion_detailed': {
            'format': '%(asctime)s [%(levelname)s] %(name)s:%(lineno)d: %(message)s'
        },
    },
    'handlers': {
        CONSOLE_HANDLER: {
            'level': 'INFO',
            'class': 'logging.StreamHandler',
            'stream': 'ext://sys.stderr',
            'formatter': 'mapfusion_brief',
        },
        FILE_HANDLER: {
            'level': 'DEBUG',
            'class': 'logging.FileHandler',
            'filename': str(LOG_FILE),
            'encoding': 'utf-8',
            'formatter': 'mapfusion_detailed',
        },
    },
    'loggers': {
        LOGGER_NAME: {
            'handlers': [CONSOLE_HANDLER, FILE_HANDLER],
            'level': 'DEBUG',
            'propagate': True,
        },
    },
}


def _require(condition: bool, message: str):
    if not condition:
        raise ConfigError(message)


@dataclass(frozen=True)
class InitConfig:
    """Thresholds for GPS-based scale and heading initialization."""

    md_m: float = 10.0
    ms_kmh: float = 18.0
    f_gps_hz: float = 1.0
    f_vo_hz: float = 10.0
    samples: int = 50
    scale_mode: str = 'linear-ratio'
    fixed_scale: Optional[float] = None
    initial_heading_deg: float = 0.0

    def __post_init__(self):
        _require(self.md_m > 0, "init.md_m must be > 0")
        _require(self.ms_kmh > 0, "init.ms_kmh must be > 0")
        _require(self.f_gps_hz > 0 and self.f_vo_hz > 0, "init frequencies must be > 0")
        _require(self.samples >= 1, "init.samples must be >= 1")
        _require(self.scale_mode in SCALE_MODES,
                 f"init.scale_mode must be one of {', '.join(SCALE_MODES)}")
        _require(self.fixed_scale is None or self.fixed_scale > 0, "init.fixed_scale must be > 0")


@dataclass(frozen=True)
class FusionConfig:
    """Noise parameters and switches of the fusion back-end."""

    odom_pre_pos_std_m: float = 10.0
    odom_pre_rot_std_deg: float = 0.5
    odom_post_pos_std_m: float = 0.1
    odom_post_pos_std_frac: float = 0.01
    odom_post_rot_std_deg: float = 0.5
    gps_std_m: float = 0.5
    anchor_z_std_m: float = 1.0
    anchor_rot_std_deg: float = 5.0
    map_yaw_std_deg: float = 10.0
    eigen_floor_m2: float = 0.01
    stationary_eps_m: float = 1e-3
    window: int = 500
    cap_enabled: bool = True
    map_priors: bool = True
    use_gps_after_init: bool = True
    max_iterations: int = 100
    step_tol: float = 1e-10

    def __post_init__(self):
        for name in ('odom_pre_pos_std_m', 'odom_pre_rot_std_deg', 'odom_post_pos_std_m',
                     'odom_post_rot_std_deg', 'gps_std_m', 'anchor_z_std_m',
                     'anchor_rot_std_deg', 'map_yaw_std_deg', 'eigen_floor_m2',
                     'stationary_eps_m', 'step_tol'):
            _require(getattr(self, name) > 0, f"fusion.{name} must be > 0")
        _require(self.odom_post_pos_std_frac >= 0, "fusion.odom_post_pos_std_frac must be >= 0")
        _require(self.window == 0 or self.window >= 2, "fusion.window must be 0 or >= 2")
        _require(self.max_iterations >= 1, "fusion.max_iterations must be >= 1")


@dataclass(frozen=True)
class MatcherConfig:
    """Search radii for map matching."""

    radius_m: float = 20.0
    widen_radius_m: float = 50.0

    def __post_init__(self):
        _require(self.radius_m > 0, "matcher.radius_m must be > 0")
        _require(self.widen_radius_m >= self.radius_m,
                 "matcher.widen_radius_m must be >= matcher.radius_m")


@dataclass(frozen=True)
class MapGraphConfig:
    """Densification, smoothing and width parameters for map building."""

    step_m: float = 1.0
    window: int = 5
    default_lanes: int = 1
    lane_width_m: float = LANE_WIDTH_M
    grid_cell_m: float = 20.0

    def __post_init__(self):
        _require(self.step_m > 0, "mapgraph.step_m must be > 0")
        _require(self.window >= 1 and self.window % 2 == 1, "mapgraph.window must be odd and >= 1")
        _require(self.default_lanes >= 1, "mapgraph.default_lanes must be >= 1")
        _require(self.lane_width_m > 0, "mapgraph.lane_width_m must be > 0")
        _require(self.grid_cell_m > 0, "mapgraph.grid_cell_m must be > 0")


@dataclass(frozen=True)
class SimConfig:
    """Evaluation settings used by the simulator harness."""

    assoc_max_dt_s: float = 0.02

    def __post_init__(self):
        _require(self.assoc_max_dt_s > 0, "sim.assoc_max_dt_s must be > 0")


_SECTIONS = {
    'init': InitConfig,
    'fusion': FusionConfig,
    'matcher': MatcherConfig,
    'mapgraph': MapGraphConfig,
    'sim': SimConfig,
}


def _coerce(section: str, key: str, raw: Any) -> Any:
    """Convert a raw value to the type of the section default."""
    default = DEFAULT_SETTINGS[section][key]
    name = f"{section}.{key}"
    if not isinstance(raw, str):
        return raw
    text = raw.strip()
    if default is None:
        if text.lower() in ('', 'none'):
            return None
        try:
            return float(text)
        except ValueError:
            raise ConfigError(f"{name}: expected a number or 'none', got {text!r}")
    if isinstance(default, bool):
        lowered = text.lower()
        if lowered in ('1', 'true', 'yes', 'on'):
            return True
        if lowered in ('0', 'false', 'no', 'off'):
            return False
        raise ConfigError(f"{name}: expected a boolean, got {text!r}")
    if isinstance(default, int):
        try:
            return int(text)
        except ValueError:
            raise ConfigError(f"{name}: expected an integer, got {text!r}")
    if isinstance(default, float):
        try:
            return float(text)
        except ValueError:
            raise ConfigError(f"{name}: expected a number, got {text!r}")
    return text


@dataclass(frozen=True)
class ToolkitConfig:
    """Validated configuration for every toolkit section."""

    init: InitConfig = field(default_factory=InitConfig)
    fusion: FusionConfig = field(default_factory=FusionConfig)
    matcher: MatcherConfig = field(default_factory=MatcherConfig)
    mapgraph: MapGraphConfig = field(default_factory=MapGraphConfig)
    sim: SimConfig = field(default_factory=SimConfig)

    @classmethod
    def load(cls, path: Optional[str] = None,
             overrides: Iterable[str] = ()) -> 'ToolkitConfig':
        """Load the configuration.

        Parameters
        ----------
        path : str, optional
            INI-style file; falls back to ``$MAPFUSION_CONFIG`` when None.
        overrides : Iterable[str]
            ``section.key=value`` strings applied after the file.

        Returns
        -------
        ToolkitConfig
            Validated configuration.
        """
        values: Dict[str, Dict[str, Any]] = {
            section: dict(settings) for section, settings in DEFAULT_SETTINGS.items()
        }

        if path is None:
            path = os.environ.get(CONFIG_ENV_VAR) or None
        if path is not None:
            cls._apply_file(values, path)

        for item in overrides:
            cls._apply_override(values, item)

        return cls.from_dict(values)

    def with_overrides(self, overrides: Iterable[str]) -> 'ToolkitConfig':
        """Copy of this configuration with ``section.key=value`` overrides applied."""
        values = {section: asdict(getattr(self, section)) for section in _SECTIONS}
        for item in overrides:
            self._apply_override(values, item)
        return self.from_dict(values)

    @classmethod
    def _apply_override(cls, values: Dict[str, Dict[str, Any]], item: str):
        if '=' not in item or '.' not in item.split('=', 1)[0]:
            raise ConfigError(f"override must look like section.key=value, got {item!r}")
        dotted, raw = item.split('=', 1)
        section, key = dotted.strip().split('.', 1)
        cls._set(values, section, key, raw)

    @staticmethod
    def _set(values: Dict[str, Dict[str, Any]], section: str, key: str, raw: Any):
        if section not in DEFAULT_SETTINGS:
            raise ConfigError(f"unknown config section {section!r}")
        if key not in DEFAULT_SETTINGS[section]:
            raise ConfigError(f"unknown config key {section}.{key}")
        values[section][key] = _coerce(section, key, raw)

    @classmethod
    def _apply_file(cls, values: Dict[str, Dict[str, Any]], path: str):
        parser = configparser.ConfigParser(inline_comment_prefixes=('#', ';'))
        try:
            with open(path, 'r', encoding='utf-8') as handle:
                parser.read_file(handle)
        except configparser.Error as e:
            raise ConfigError(f"{path}: {e}")
        except OSError as e:
            raise ConfigError(f"cannot read config file {path}: {e}")
        for section in parser.sections():
            for key, raw in parser.items(section):
                cls._set(values, section, key, raw)

    @classmethod
    def from_dict(cls, values: Dict[str, Dict[str, Any]]) -> 'ToolkitConfig':
        """Build a configuration from nested dictionaries, rejecting unknown keys."""
        kwargs = {}
        for section, section_cls in _SECTIONS.items():
            provided = dict(values.get(section, {}))
            known = {f.name for f in fields(section_cls)}
            unknown = set(provided) - known
            if unknown:
                raise ConfigError(f"unknown config key(s): "
                                  f"{', '.join(sorted(f'{section}.{k}' for k in unknown))}")
            kwargs[section] = section_cls(**provided)
        extra = set(values) - set(_SECTIONS)
        if extra:
            raise ConfigError(f"unknown config section(s): {', '.join(sorted(extra))}")
        return cls(**kwargs)
