#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Format detection and reader factory for toolkit input files.
"""

import os
import logging
from typing import Dict, List, Optional, Type

from ..exceptions import FileFormatError
from ..geom import LocalFrame
from ..utils.logging_config import LoggerMixin
from .base_reader import BaseReader
from .gps_io import GpsReader
from .map_reader import MapFileReader, OsmReader
from .scenario_io import ScenarioReader
from .trajectory_io import TrajectoryReader

logger = logging.getLogger(__name__)


class FileFormatDetector(LoggerMixin):
    """Detector for file formats and appropriate readers."""

    # Checked in order; content sniffing comes before extension fallbacks
    READERS: List[Type[BaseReader]] = [
        MapFileReader,
        OsmReader,
        GpsReader,
        TrajectoryReader,
        ScenarioReader,
    ]

    @classmethod
    def detect_format(cls, file_path: str) -> Optional[Type[BaseReader]]:
        """Reader class for a file, or None if no reader accepts it."""
        if not os.path.exists(file_path):
            logger.error(f"File not found: {file_path}")
            return None

        for reader_class in cls.READERS:
            if reader_class.can_read(file_path):
                logger.debug(f"File {file_path} can be read by {reader_class.__name__}")
                return reader_class

        logger.warning(f"No suitable reader found for file: {file_path}")
        return None

    @classmethod
    def get_supported_extensions(cls) -> List[str]:
        return sorted({ext for reader in cls.READERS for ext in reader.EXTENSIONS})


class FileImporterFactory(LoggerMixin):
    """Factory for creating file readers."""

    @staticmethod
    def create_reader(file_path: str, frame: Optional[LocalFrame] = None) -> BaseReader:
        """Create a reader for ``file_path``.

        Parameters
        ----------
        file_path : str
            File to read.
        frame : LocalFrame, optional
            Passed to GPS readers for geodetic files.

        Raises
        ------
        FileNotFoundError
            If the file does not exist.
        FileFormatError
            If no reader recognizes the file.
        """
        if not os.path.exists(file_path):
            raise FileNotFoundError(f"File not found: {file_path}")
        reader_class = FileFormatDetector.detect_format(file_path)
        if reader_class is None:
            raise FileFormatError(file_path, "unrecognized file format")
        if reader_class is GpsReader:
            reader = GpsReader(file_path, frame)
        else:
            reader = reader_class(file_path)
        logger.debug(f"Created {reader_class.__name__} for {file_path}")
        return reader


class FileImporter(LoggerMixin):
    """Reads input files of any supported format and keeps their readers."""

    def __init__(self, frame: Optional[LocalFrame] = None):
        self.frame = frame
        self.readers: Dict[str, BaseReader] = {}
        self.factory = FileImporterFactory()

    def import_file(self, file_path: str) -> BaseReader:
        """Detect, open and read one file.

        Errors are logged and re-raised.
        """
        try:
            reader = self.factory.create_reader(file_path, self.frame)
            with reader:
                reader.read()
        except Exception as e:
            self.logger.error(f"Error importing file {file_path}: {e}")
            raise
        self.readers[file_path] = reader
        self.logger.info(f"Imported {file_path} as {reader.metadata.get('format', 'unknown')}")
        return reader

    def import_as(self, file_path: str, expected: Type[BaseReader]) -> BaseReader:
        """Import a file that must be of the format read by ``expected``.

        Raises
        ------
        FileFormatError
            If the file is recognized as another format.
        """
        file_path = str(file_path)
        reader = self.import_file(file_path)
        if not isinstance(reader, expected):
            raise FileFormatError(file_path, f"expected {expected.__name__} input, found "
                                  f"{reader.metadata.get('format', 'unknown')}")
        info = reader.get_file_info()
        self.logger.debug(f"{info['file_name']}: {info['file_size']} bytes, "
                          f"{reader.get_metadata()}")
        return reader

    def clear(self):
        for reader in self.readers.values():
            reader.close()
        self.readers.clear()

    def __len__(self):
        return len(self.readers)

    def __contains__(self, file_path: str):
        return file_path in self.readers
