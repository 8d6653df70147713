"""
Single entry point for the herding commands.

``herd <subcommand> [options]`` runs the management command of the same name
(``validate-gradient`` maps to ``validate_gradient``) and returns its exit
code instead of exiting the interpreter.
"""
import sys
from importlib import import_module

from django.core.management.base import CommandError

SUBCOMMANDS = {
    'simulate': 'simulate',
    'reach': 'reach',
    'waypoints': 'waypoints',
    'optimize': 'optimize',
    'feedback': 'feedback',
    'diagnose': 'diagnose',
    'validate-gradient': 'validate_gradient',
}

USAGE = (
    "usage: herd <subcommand> --scenario PATH [options]\n"
    f"subcommands: {', '.join(SUBCOMMANDS)}\n"
    "run 'herd <subcommand> --help' for the options of one subcommand\n"
)


def cli_dispatch(argv, stdout=None, stderr=None):
    """
    Run one subcommand.

    Args:
        argv: Arguments after the program name, subcommand first
        stdout, stderr: Streams for the command output (default: sys streams)

    Returns:
        Exit code: 0 success, 1 not reached / stagnation / failed check,
        2 usage or validation error
    """
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    if not argv or argv[0] not in SUBCOMMANDS:
        if argv and argv[0] not in ('-h', '--help'):
            stderr.write(f"herd: unknown subcommand {argv[0]!r}\n")
        stderr.write(USAGE)
        return 0 if argv and argv[0] in ('-h', '--help') else 2

    name = SUBCOMMANDS[argv[0]]
    module = import_module(f"scenarios.management.commands.{name}")
    command = module.Command(stdout=stdout, stderr=stderr)
    try:
        command.run_from_argv(['herd', name, *argv[1:]])
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1
    except CommandError as exc:
        stderr.write(f"{exc}\n")
        return exc.returncode
    return 0
