from django.apps import AppConfig


class HetlabConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'hetlab'
