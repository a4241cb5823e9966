# -*- coding: utf-8 -*-

import logging

import pytest

from mapfusion.config import LOGGING_CONFIG
from mapfusion.mapgraph.graph_builder import GraphBuilder
from mapfusion.utils.logging_config import get_logger, setup_logging


@pytest.fixture
def package_logger():
    logger = logging.getLogger('mapfusion')
    yield logger
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
        handler.close()


def test_handlers_belong_to_the_package_logger():
    assert set(LOGGING_CONFIG['handlers']) == {'mapfusion_console', 'mapfusion_file'}
    assert list(LOGGING_CONFIG['loggers']) == ['mapfusion']


def test_get_logger_nests_foreign_names():
    assert get_logger('__main__').name == 'mapfusion.__main__'
    assert get_logger('mapfusion.commands').name == 'mapfusion.commands'
    assert get_logger('mapfusion').name == 'mapfusion'


def test_mixin_logger_is_named_after_class():
    assert GraphBuilder().logger.name == 'mapfusion.mapgraph.graph_builder.GraphBuilder'


def test_setup_writes_debug_records_to_file(tmp_path, package_logger):
    log_file = tmp_path / 'logs' / 'run.log'
    setup_logging(log_file=log_file)
    levels = {h.name: h.level for h in package_logger.handlers}
    assert levels == {'mapfusion_console': logging.INFO, 'mapfusion_file': logging.DEBUG}
    get_logger('mapfusion.test').debug("written to the file only")
    for handler in package_logger.handlers:
        handler.flush()
    assert "written to the file only" in log_file.read_text(encoding='utf-8')


def test_debug_flag_lowers_console_level(tmp_path, package_logger):
    setup_logging(debug=True, log_file=tmp_path / 'run.log')
    console = next(h for h in package_logger.handlers if h.name == 'mapfusion_console')
    assert console.level == logging.DEBUG
    assert LOGGING_CONFIG['handlers']['mapfusion_console']['level'] == 'INFO'
