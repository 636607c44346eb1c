"""pytest wiring: configure Django settings before tests are collected."""
import os

import django

os.environ.setdefault("DJANGO_SETTINGS_MODULE", "config.settings")
django.setup()
