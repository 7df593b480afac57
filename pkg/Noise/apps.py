from django.apps import AppConfig


class NoiseAppConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "Noise"
    verbose_name = "ASR noise"
