import os

import django

os.environ.setdefault("DJANGO_SETTINGS_MODULE", "hetlab_portal.settings")
django.setup()
