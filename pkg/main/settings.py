"""
Django settings for the herding toolkit project.

The project has no web surface: Django provides the app registry, the
settings layer and the management-command runner for the simulation and
control apps.

For more information on this file, see
https://docs.djangoproject.com/en/5.2/topics/settings/
"""

from pathlib import Path
import os
from dotenv import load_dotenv
from django.core.exceptions import ImproperlyConfigured

# Load environment variables from .env file
load_dotenv()

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

SECRET_KEY = os.getenv('SECRET_KEY', 'herding-toolkit-local-key')

DEBUG = os.getenv('DEBUG', 'True') == 'True'

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    # Local apps
    'kernels',
    'dynamics',
    'controls',
    'diagnostics',
    'controllability',
    'optimal_control',
    'feedback',
    'scenarios',  # Scenario files, trajectory I/O and the command surface
]

# Nothing is persisted in a database; Django still expects a default alias.
DATABASES = {
    'default': {
        'ENGINE': 'django.db.backends.sqlite3',
        'NAME': ':memory:',
    }
}

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = False

USE_TZ = True

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'


def _env_float(name, default):
    raw = os.getenv(name, str(default))
    try:
        return float(raw)
    except ValueError:
        raise ImproperlyConfigured(f"{name} must be a number, got {raw!r}.")


def _env_int(name, default):
    raw = os.getenv(name, str(default))
    try:
        return int(raw)
    except ValueError:
        raise ImproperlyConfigured(f"{name} must be an integer, got {raw!r}.")


def _env_float_list(name, default):
    raw = os.getenv(name, default)
    try:
        return [float(item) for item in raw.split(',') if item.strip()]
    except ValueError:
        raise ImproperlyConfigured(f"{name} must be a comma separated list of numbers, got {raw!r}.")


# Toolkit configuration
HERDING = {
    # Integrator
    'N_STEPS': _env_int('HERDING_N_STEPS', 1000),
    'SINGULARITY_DISTANCE': _env_float('HERDING_SINGULARITY_DISTANCE', 1e-6),

    # Kernels
    'ROOT_BRACKET_MIN': _env_float('HERDING_ROOT_BRACKET_MIN', 1e-3),
    'ROOT_BRACKET_MAX': _env_float('HERDING_ROOT_BRACKET_MAX', 1e3),
    'ROOT_TOL': _env_float('HERDING_ROOT_TOL', 1e-12),
    'POTENTIAL_SATURATION': _env_float('HERDING_POTENTIAL_SATURATION', 1e12),

    # Diagnostics
    'TAIL_FRACTION': _env_float('HERDING_TAIL_FRACTION', 0.3),
    'DISSIPATION_TOLERANCE': _env_float('HERDING_DISSIPATION_TOLERANCE', 1e-6),

    # Controllability
    'REACH_GRID': _env_int('HERDING_REACH_GRID', 25),
    'REACH_BUDGET': _env_int('HERDING_REACH_BUDGET', 200),
    'REACH_TOLERANCE': _env_float('HERDING_REACH_TOLERANCE', 0.05),
    'REACH_T1': _env_float('HERDING_REACH_T1', 2.0),
    'REACH_T1_RETRIES': _env_float_list('HERDING_REACH_T1_RETRIES', '4,6,8,10'),

    # Optimal control
    'OCP_MAX_ITER': _env_int('HERDING_OCP_MAX_ITER', 500),
    'OCP_ARMIJO': _env_float('HERDING_OCP_ARMIJO', 1e-4),
    'OCP_INITIAL_STEP': _env_float('HERDING_OCP_INITIAL_STEP', 1.0),
    'OCP_MAX_HALVINGS': _env_int('HERDING_OCP_MAX_HALVINGS', 20),
    'OCP_REL_TOL': _env_float('HERDING_OCP_REL_TOL', 1e-8),
    'OCP_GRAD_TOL': _env_float('HERDING_OCP_GRAD_TOL', 1e-6),
    'FD_STEP': _env_float('HERDING_FD_STEP', 1e-5),
    'GRADIENT_TOLERANCE': _env_float('HERDING_GRADIENT_TOLERANCE', 1e-4),
    'STABILIZATION_FRICTION': _env_float('HERDING_STABILIZATION_FRICTION', 10.0),

    # Feedback
    'FEEDBACK_KAPPA_BAR': _env_float('HERDING_FEEDBACK_KAPPA_BAR', 3.0),
    'GATHER_ON': _env_float('HERDING_GATHER_ON', 0.3),
    'GATHER_OFF': _env_float('HERDING_GATHER_OFF', 0.27),
    'FEEDBACK_STOP_RADIUS': _env_float('HERDING_FEEDBACK_STOP_RADIUS', 0.05),

    # Scenario files
    'SCENARIO_DIR': Path(os.getenv('HERDING_SCENARIO_DIR', BASE_DIR / 'scenarios' / 'data')),
}

if HERDING['N_STEPS'] < 1:
    raise ImproperlyConfigured("HERDING_N_STEPS must be at least 1.")

if HERDING['GATHER_OFF'] >= HERDING['GATHER_ON']:
    raise ImproperlyConfigured("HERDING_GATHER_OFF must be below HERDING_GATHER_ON.")

if HERDING['ROOT_BRACKET_MIN'] <= 0 or HERDING['ROOT_BRACKET_MIN'] >= HERDING['ROOT_BRACKET_MAX']:
    raise ImproperlyConfigured("Root bracket must satisfy 0 < HERDING_ROOT_BRACKET_MIN < HERDING_ROOT_BRACKET_MAX.")


# Logging
LOG_LEVEL = os.getenv('HERDING_LOG_LEVEL', 'INFO').upper()

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'simple': {
            'format': '{levelname} {name}: {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'simple',
        },
    },
    'root': {
        'handlers': ['console'],
        'level': LOG_LEVEL,
    },
}
