#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
GPS stream files.

CSV with a header row selecting the coordinates: either
``timestamp,east,north,up`` in the map frame or ``timestamp,lat,lon,alt``
in WGS84 degrees, which is projected through the map's local frame. An
optional ``cov`` column holds the horizontal position variance in m².
"""

import io
import logging
import math
import re
from pathlib import Path
from typing import List, Optional, Sequence, Union

import pandas as pd

from ..geom import GeoPoint, GpsFix, LocalFrame
from .base_reader import TextFileReader

logger = logging.getLogger(__name__)

LOCAL_COLUMNS = ('timestamp', 'east', 'north', 'up')
GEODETIC_COLUMNS = ('timestamp', 'lat', 'lon', 'alt')
COVARIANCE_COLUMN = 'cov'

_PANDAS_LINE = re.compile(r'line (\d+)')


class GpsReader(TextFileReader):
    """Reader for GPS CSV files.

    Parameters
    ----------
    file_path : str
        CSV file.
    frame : LocalFrame, optional
        Frame used to project geodetic files; required for them.
    """

    EXTENSIONS = ('.csv',)

    def __init__(self, file_path: str, frame: Optional[LocalFrame] = None):
        super().__init__(file_path)
        self.frame = frame

    @staticmethod
    def _columns(header: Sequence[str]) -> Optional[str]:
        names = {c.strip().lower() for c in header}
        if set(LOCAL_COLUMNS) <= names:
            return 'local'
        if set(GEODETIC_COLUMNS) <= names:
            return 'geodetic'
        return None

    @classmethod
    def can_read(cls, file_path: str) -> bool:
        line = cls.first_content_line(file_path)
        return line is not None and cls._columns(line.split(',')) is not None

    def _frame(self) -> pd.DataFrame:
        try:
            return pd.read_csv(io.StringIO(self.text), dtype=str, keep_default_na=False,
                               skip_blank_lines=False, skipinitialspace=True)
        except pd.errors.EmptyDataError:
            raise self.fail("empty file")
        except pd.errors.ParserError as e:
            found = _PANDAS_LINE.search(str(e))
            raise self.fail(f"malformed row: {e}", int(found.group(1)) if found else None)

    def read(self) -> bool:
        if not self.is_open:
            self.open()
        table = self._frame()
        table.columns = [str(c).strip().lower() for c in table.columns]
        kind = self._columns(table.columns)
        if kind is None:
            raise self.fail(f"header must contain {','.join(LOCAL_COLUMNS)} or "
                            f"{','.join(GEODETIC_COLUMNS)}", 1)
        if kind == 'geodetic' and self.frame is None:
            raise self.fail("geodetic GPS needs a map to define the local frame")
        columns = list(LOCAL_COLUMNS if kind == 'local' else GEODETIC_COLUMNS)
        has_cov = COVARIANCE_COLUMN in table.columns
        if has_cov:
            columns.append(COVARIANCE_COLUMN)
        extra = sorted(set(table.columns) - set(columns))
        if extra:
            raise self.fail(f"unexpected column(s): {', '.join(extra)}", 1)

        fixes: List[GpsFix] = []
        for index, row in enumerate(table[columns].itertuples(index=False)):
            number = index + 2
            cells = ['' if pd.isna(v) else str(v).strip() for v in row]
            if not any(cells):
                continue
            if not all(cells):
                raise self.fail("missing value", number)
            try:
                values = [float(v) for v in cells]
            except ValueError as e:
                raise self.fail(f"not a number: {e}", number)
            if not all(math.isfinite(v) for v in values):
                raise self.fail("non-finite value", number)
            if fixes and values[0] <= fixes[-1].t:
                raise self.fail(f"timestamp {values[0]!r} does not follow {fixes[-1].t!r}", number)
            std = None
            if has_cov:
                if values[4] <= 0:
                    raise self.fail(f"covariance must be positive, got {values[4]!r}", number)
                std = math.sqrt(values[4])
            if kind == 'local':
                east, north, up = values[1:4]
            else:
                east, north, up = self.frame.geo_to_enu(GeoPoint(values[1], values[2], values[3]))
            fixes.append(GpsFix(values[0], east, north, up, std))

        self.data['fixes'] = fixes
        self.metadata['format'] = 'gps'
        self.metadata['coordinates'] = kind
        self.metadata['fix_count'] = len(fixes)
        self.logger.debug(f"Read {len(fixes)} {kind} GPS fixes from {self.file_path}")
        return True

    def fixes(self) -> List[GpsFix]:
        if 'fixes' not in self.data:
            self.read()
        return list(self.data['fixes'])


def read_gps(path: Union[str, Path], frame: Optional[LocalFrame] = None) -> List[GpsFix]:
    """Read a GPS CSV file into fixes in the local frame."""
    with GpsReader(str(path), frame) as reader:
        return reader.fixes()


def write_gps(path: Union[str, Path], fixes: Sequence[GpsFix]):
    """Write fixes as a local-frame GPS CSV file.

    The ``cov`` column is written when every fix carries a standard deviation.
    """
    table = pd.DataFrame({
        'timestamp': [f.t for f in fixes],
        'east': [f.east for f in fixes],
        'north': [f.north for f in fixes],
        'up': [f.up for f in fixes],
    }, columns=list(LOCAL_COLUMNS))
    if fixes and all(f.std_m is not None for f in fixes):
        table[COVARIANCE_COLUMN] = [f.std_m ** 2 for f in fixes]
    try:
        table.to_csv(path, index=False, float_format='%.17g')
    except OSError as e:
        logger.error(f"Error writing GPS file {path}: {e}")
        raise
    logger.debug(f"Wrote {len(fixes)} GPS fixes to {path}")
