from django.apps import AppConfig


class MetricsConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'Metrics'
    verbose_name = 'SSIMuse-B and SSIMuse-V'
