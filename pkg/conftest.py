# Test collection wiring: the suite is written for `manage.py test`, so point
# Django at the project settings and load the app registry before collection.
import os

import django

os.environ.setdefault("DJANGO_SETTINGS_MODULE", "contextcost.settings")
django.setup()
