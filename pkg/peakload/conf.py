"""
Run configuration resolution.

Precedence, lowest first: settings.PEAKLOAD, the key=value config file
(--config or PEAKLOAD_CONFIG), PEAKLOAD_<KEY> environment variables,
command-line flags.
"""

import os

from django.conf import settings

from .exceptions import UsageError
from .forms import RunConfigForm

ENV_PREFIX = "PEAKLOAD_"
CONFIG_FILE_ENV = "PEAKLOAD_CONFIG"


def config_keys():
    return [key.lower() for key in settings.PEAKLOAD]


def read_config_file(path):
    """
    Parse ``key = value`` lines. ``#`` starts a comment; keys are
    case-insensitive and must be known PEAKLOAD keys.
    """
    known = set(config_keys())
    values = {}

    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as e:
        raise UsageError(f"Cannot read config file {path}: {e}") from e

    for number, line in enumerate(lines, start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{number}: expected 'key = value'.")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.lower()
        if key not in known:
            raise UsageError(f"{path}:{number}: unknown key {key!r}.")
        values[key] = value

    return values


def resolve_config(overrides=None, config_path=None, environ=None):
    environ = os.environ if environ is None else environ

    merged = {key.lower(): value for key, value in settings.PEAKLOAD.items()}

    path = config_path or environ.get(CONFIG_FILE_ENV)
    if path:
        merged.update(read_config_file(path))

    for key in list(merged):
        env_value = environ.get(ENV_PREFIX + key.upper())
        if env_value is not None:
            merged[key] = env_value

    for key, value in (overrides or {}).items():
        if value is not None:
            merged[key] = value

    form = RunConfigForm(data=merged)
    if not form.is_valid():
        problems = "; ".join(
            f"{name}: {' '.join(errors)}" for name, errors in form.errors.items()
        )
        raise UsageError(f"Invalid configuration: {problems}")

    return {key: form.cleaned_data[key] for key in merged}
