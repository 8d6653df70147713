#!/usr/bin/env python
"""Command-line entry point of the herding toolkit: ``python herd.py <subcommand> ...``."""
import os
import sys


def main():
    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'main.settings')
    try:
        import django
    except ImportError as exc:
        raise ImportError(
            "Couldn't import Django. Are you sure it's installed and "
            "available on your PYTHONPATH environment variable? Did you "
            "forget to activate a virtual environment?"
        ) from exc
    django.setup()

    from scenarios.cli import cli_dispatch

    sys.exit(cli_dispatch(sys.argv[1:]))


if __name__ == '__main__':
    main()
