from django.apps import AppConfig


class PeakloadConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'peakload'
    verbose_name = "Peak-load tail statistics"
