"""
Django settings for the contextcost project.

Only what the management commands and the test runner need: one app, no
database, logging to standard error. Run-time defaults for the engine come
from the environment (or a .env file next to manage.py).
"""
import os
from pathlib import Path
from dotenv import load_dotenv

# Take environment variables from .env
load_dotenv()

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent
load_dotenv(BASE_DIR / ".env")

# Management commands only; nothing is served.
SECRET_KEY = os.getenv("DJANGO_SECRET_KEY", "contextcost-local-only")

DEBUG = False

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    "engine",
]

DATABASES = {}


# Internationalization

LANGUAGE_CODE = "en-us"

TIME_ZONE = "UTC"

USE_I18N = False

USE_TZ = True


# Engine run-time defaults. Unset variables fall back to engine.defaults.DEFAULTS;
# command-line flags override both.
def _env(name, cast):
    value = os.getenv(name)
    return cast(value) if value not in (None, "") else None


CONTEXTCOST = {
    "SEED": 20240917 if _env("CONTEXTCOST_SEED", int) is None else _env("CONTEXTCOST_SEED", int),
    "MODE": _env("CONTEXTCOST_MODE", str),
    "TOL": _env("CONTEXTCOST_TOL", float),
    "CAP": _env("CONTEXTCOST_CAP", int),
    "FORMAT": _env("CONTEXTCOST_FORMAT", str),
    "LOG_LEVEL": _env("CONTEXTCOST_LOG_LEVEL", str) or "WARNING",
}


# Logging: reports go to stdout, diagnostics to stderr.

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "plain": {"format": "%(levelname)s %(name)s: %(message)s"},
    },
    "handlers": {
        "stderr": {
            "class": "logging.StreamHandler",
            "stream": "ext://sys.stderr",
            "formatter": "plain",
        },
    },
    "loggers": {
        "engine": {
            "handlers": ["stderr"],
            "level": CONTEXTCOST["LOG_LEVEL"],
            "propagate": False,
        },
    },
}
