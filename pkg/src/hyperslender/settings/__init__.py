"""Settings modules, selected with HYPERSLENDER_SETTINGS"""
import importlib
import logging.config
import os

SETTINGS_VARIABLE = 'HYPERSLENDER_SETTINGS'
THREADS_VARIABLE = 'HYPERSLENDER_THREADS'
DEFAULT_SETTINGS = 'base'

__all__ = ['SettingsError', 'load', 'configure_logging', 'worker_count']


class SettingsError(ImportError):
    pass


def load(name=None):
    name = name or os.environ.get(SETTINGS_VARIABLE) or DEFAULT_SETTINGS
    try:
        return importlib.import_module('%s.%s' % (__name__, name))
    except ImportError:
        raise SettingsError('Unknown settings module %r' % name)


def configure_logging(module=None):
    logging.config.dictConfig((module or load()).LOGGING)


def worker_count():
    try:
        count = int(os.environ.get(THREADS_VARIABLE, '1'))
    except ValueError:
        return 1
    return max(count, 1)
