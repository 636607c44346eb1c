"""
Django settings for the peakload project.

The project has no web surface: Django supplies settings, logging,
management commands, forms and the test runner.
"""

import os
from pathlib import Path

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

# SECURITY
SECRET_KEY = os.environ.get("PEAKLOAD_SECRET_KEY", "peakload-cli-only-not-a-secret")

DEBUG = False

ALLOWED_HOSTS = []

# APPLICATIONS
INSTALLED_APPS = [
    'peakload',
]

# DATABASE
# Nothing is persisted; reports are files.
DATABASES = {}

# INTERNATIONALIZATION
LANGUAGE_CODE = 'en-us'

# Local civil time used for hourly/daily/weekly/monthly peak buckets.
TIME_ZONE = os.environ.get("PEAKLOAD_TIME_ZONE", "America/New_York")

USE_I18N = False
USE_TZ = True

# =========================
# PEAKLOAD DEFAULTS
# =========================
# Lowest precedence. Overridden by the key=value config file,
# then PEAKLOAD_<KEY> environment variables, then command flags.
PEAKLOAD = {
    "SEED": 12345,
    "REPLICATES": 2500,
    "SIGNIFICANCE": 0.10,
    "CI_LEVEL": 0.95,
    "MIN_TAIL": 10,
    "CANDIDATE_RULE": "all_unique",
    "QUANTILE_CANDIDATES": 512,
    "WORKERS": 1,
    "MIN_COVERAGE": 0.9,
    "WINDOW_DAYS": 730,
    "FORMAT": "json",
}

# =========================
# LOGGING
# =========================
# Logs go to stderr; stdout is reserved for reports.
LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "plain": {
            "format": "%(asctime)s %(levelname)s %(name)s: %(message)s",
        },
    },
    "handlers": {
        "console": {
            "class": "logging.StreamHandler",
            "stream": "ext://sys.stderr",
            "formatter": "plain",
        },
    },
    "loggers": {
        "peakload": {
            "handlers": ["console"],
            "level": os.environ.get("PEAKLOAD_LOG_LEVEL", "INFO"),
            "propagate": False,
        },
    },
}
