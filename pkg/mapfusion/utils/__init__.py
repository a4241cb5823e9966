"""
Utility modules for the Map-Fusion toolkit.
"""

from .logging_config import setup_logging, get_logger, LoggerMixin

__all__ = [
    'setup_logging',
    'get_logger',
    'LoggerMixin',
]
