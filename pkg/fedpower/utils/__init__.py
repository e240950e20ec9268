import importlib
import logging
import os

from fedpower import hooks

_ROOT = "fedpower"


def logger(module=None):
    """Package logger, or the child logger for `module`."""
    name = _ROOT if not module else f"{_ROOT}.{module}"
    return logging.getLogger(name)


def log_error(message, title=None):
    """Log `message` with the active traceback, if any."""
    log = logger(title)
    log.error(message, exc_info=True)


def debug_enabled(flag=None):
    if flag is not None:
        return bool(flag)
    return os.environ.get(hooks.debug_env, "").strip().lower() in ("1", "true", "yes")


def output_root():
    return os.environ.get(hooks.output_root_env) or hooks.default_output_root


def get_attr(path):
    """Resolve a dotted `module.attribute` path."""
    module_name, _, attr = path.rpartition(".")
    if not module_name:
        raise ValueError(f"{path!r} is not a dotted path")
    return getattr(importlib.import_module(module_name), attr)
