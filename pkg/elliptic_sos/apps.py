from django.apps import AppConfig

import elliptic_sos.checks  # noqa: F401 - register checks


class EllipticSOSConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'elliptic_sos'
    verbose_name = 'Elliptic SOS partition functions'
