#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Logging setup for the ``mapfusion`` logger hierarchy.

Every module logs through ``logging.getLogger(__name__)`` or
:class:`LoggerMixin`; :func:`setup_logging` attaches the console and file
handlers of :data:`mapfusion.config.LOGGING_CONFIG` to the package logger.
"""

import copy
import logging
import logging.config
from pathlib import Path
from typing import Optional, Union

from ..config import CONSOLE_HANDLER, FILE_HANDLER, LOGGER_NAME, LOGGING_CONFIG


def setup_logging(debug: bool = False, log_file: Optional[Union[str, Path]] = None):
    """Configure the ``mapfusion`` logger for a command-line run.

    Parameters
    ----------
    debug : bool, optional
        Show debug records on the console as well as in the log file.
    log_file : str or Path, optional
        Log file replacing the per-user default.
    """
    config = copy.deepcopy(LOGGING_CONFIG)
    handlers = config['handlers']
    if debug:
        handlers[CONSOLE_HANDLER]['level'] = 'DEBUG'
    if log_file:
        handlers[FILE_HANDLER]['filename'] = str(log_file)

    # FileHandler opens the file while configuring
    Path(handlers[FILE_HANDLER]['filename']).parent.mkdir(parents=True, exist_ok=True)
    logging.config.dictConfig(config)
    get_logger(__name__).debug(f"Logging to {handlers[FILE_HANDLER]['filename']}"
                               f"{' with console debug output' if debug else ''}")


def get_logger(name: str) -> logging.Logger:
    """Logger named ``name`` inside the ``mapfusion`` hierarchy.

    Names from outside the package, ``__main__`` for instance, are nested
    under it so that the toolkit handlers receive their records.
    """
    if name != LOGGER_NAME and not name.startswith(LOGGER_NAME + '.'):
        name = f"{LOGGER_NAME}.{name}"
    return logging.getLogger(name)


class LoggerMixin:
    """Gives instances a ``logger`` named after their module and class."""

    @property
    def logger(self) -> logging.Logger:
        cls = type(self)
        return get_logger(f"{cls.__module__}.{cls.__qualname__}")
