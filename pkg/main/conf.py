"""
Access to the toolkit defaults held in ``settings.HERDING``.

The numeric apps are usable without a configured Django project (plain
scripts, notebooks); in that case the built-in defaults below apply.
"""
from pathlib import Path

from django.conf import settings
from django.core.exceptions import ImproperlyConfigured


DEFAULTS = {
    'N_STEPS': 1000,
    'SINGULARITY_DISTANCE': 1e-6,
    'ROOT_BRACKET_MIN': 1e-3,
    'ROOT_BRACKET_MAX': 1e3,
    'ROOT_TOL': 1e-12,
    'POTENTIAL_SATURATION': 1e12,
    'TAIL_FRACTION': 0.3,
    'DISSIPATION_TOLERANCE': 1e-6,
    'REACH_GRID': 25,
    'REACH_BUDGET': 200,
    'REACH_TOLERANCE': 0.05,
    'REACH_T1': 2.0,
    'REACH_T1_RETRIES': [4.0, 6.0, 8.0, 10.0],
    'OCP_MAX_ITER': 500,
    'OCP_ARMIJO': 1e-4,
    'OCP_INITIAL_STEP': 1.0,
    'OCP_MAX_HALVINGS': 20,
    'OCP_REL_TOL': 1e-8,
    'OCP_GRAD_TOL': 1e-6,
    'FD_STEP': 1e-5,
    'GRADIENT_TOLERANCE': 1e-4,
    'STABILIZATION_FRICTION': 10.0,
    'FEEDBACK_KAPPA_BAR': 3.0,
    'GATHER_ON': 0.3,
    'GATHER_OFF': 0.27,
    'FEEDBACK_STOP_RADIUS': 0.05,
    'SCENARIO_DIR': Path(__file__).resolve().parent.parent / 'scenarios' / 'data',
}


def herding_setting(name):
    """
    Return a toolkit setting, preferring ``settings.HERDING`` over the defaults.

    Args:
        name: Key of the setting, e.g. ``'N_STEPS'``

    Returns:
        The configured value

    Raises:
        KeyError: If the key is unknown
    """
    if name not in DEFAULTS:
        raise KeyError(f"Unknown herding setting: {name}")
    try:
        overrides = getattr(settings, 'HERDING', {})
    except ImproperlyConfigured:
        overrides = {}
    return overrides.get(name, DEFAULTS[name])
