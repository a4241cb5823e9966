#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Base reader classes for toolkit input files.
"""

import os
import logging
from abc import ABC, abstractmethod
from typing import Any, Dict, Iterator, List, Optional, Tuple

from ..exceptions import FileFormatError
from ..utils.logging_config import LoggerMixin

logger = logging.getLogger(__name__)

COMMENT_PREFIX = '#'


class BaseReader(ABC, LoggerMixin):
    """Abstract base class for file readers.

    Subclasses fill ``data`` and ``metadata`` in :meth:`read` and raise
    :class:`FileFormatError` for ill-formed content.
    """

    #: Extensions claimed by the reader, lower case with the dot.
    EXTENSIONS: Tuple[str, ...] = ()

    def __init__(self, file_path: str):
        """Initialize the base reader.

        Parameters
        ----------
        file_path : str
            Path to the file to read.
        """
        self.file_path = str(file_path)
        self.data: Dict[str, Any] = {}
        self.metadata: Dict[str, Any] = {}
        self.is_open = False

        if not os.path.exists(self.file_path):
            raise FileNotFoundError(f"File not found: {self.file_path}")

    @abstractmethod
    def open(self):
        """Open the file for reading."""

    @abstractmethod
    def close(self):
        """Release the file contents."""

    @abstractmethod
    def read(self) -> bool:
        """Read data from the file.

        Returns
        -------
        bool
            True once the file has been read.

        Raises
        ------
        FileFormatError
            If the content is ill-formed.
        """

    @classmethod
    @abstractmethod
    def can_read(cls, file_path: str) -> bool:
        """Check if the file can be read by this reader."""

    @classmethod
    def has_extension(cls, file_path: str) -> bool:
        return os.path.splitext(str(file_path))[1].lower() in cls.EXTENSIONS

    def fail(self, message: str, line: Optional[int] = None) -> FileFormatError:
        """Log a format error and return it for raising."""
        error = FileFormatError(self.file_path, message, line)
        self.logger.error(str(error))
        return error

    def get_data(self) -> Dict[str, Any]:
        return self.data

    def get_metadata(self) -> Dict[str, Any]:
        return self.metadata

    def get_file_info(self) -> Dict[str, Any]:
        """File name, size and modification time."""
        stat = os.stat(self.file_path)
        return {
            'file_path': self.file_path,
            'file_name': os.path.basename(self.file_path),
            'file_size': stat.st_size,
            'modification_time': stat.st_mtime,
        }

    def __enter__(self):
        self.open()
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        self.close()

    def __repr__(self):
        return f"{self.__class__.__name__}('{self.file_path}')"


class TextFileReader(BaseReader):
    """Reader for UTF-8 line-oriented files."""

    def __init__(self, file_path: str):
        super().__init__(file_path)
        self.text: Optional[str] = None

    def open(self):
        if self.is_open:
            return
        try:
            with open(self.file_path, 'r', encoding='utf-8') as handle:
                self.text = handle.read()
        except UnicodeDecodeError as e:
            raise self.fail(f"not valid UTF-8: {e}")
        except OSError as e:
            self.logger.error(f"Error opening {self.file_path}: {e}")
            raise
        self.is_open = True

    def close(self):
        self.text = None
        self.is_open = False

    def lines(self) -> List[str]:
        if not self.is_open:
            self.open()
        return self.text.splitlines()

    def content_lines(self) -> Iterator[Tuple[int, str]]:
        """Non-blank, non-comment lines with their 1-based line numbers."""
        for number, line in enumerate(self.lines(), start=1):
            stripped = line.strip()
            if stripped and not stripped.startswith(COMMENT_PREFIX):
                yield number, stripped

    @classmethod
    def first_content_line(cls, file_path: str, limit: int = 64) -> Optional[str]:
        """First non-comment line of a file, or None if there is none."""
        try:
            with open(file_path, 'r', encoding='utf-8') as handle:
                for _, line in zip(range(limit), handle):
                    stripped = line.strip()
                    if stripped and not stripped.startswith(COMMENT_PREFIX):
                        return stripped
        except (OSError, UnicodeDecodeError):
            return None
        return None
