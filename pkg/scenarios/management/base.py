"""
Shared options, error mapping and report output of the herding commands.

Exit codes: 0 success, 1 not reached / stagnation / failed check /
singularity or divergence, 2 usage and validation errors.
"""
import argparse
import json

from django.core.management.base import BaseCommand, CommandError

from main.exceptions import DivergenceError, HerdingError, SingularityError
from scenarios.loaders import resolve_scenario, scenario_hash
from scenarios.trajectory_io import write_trajectory

REPORT_SCHEMA = 1
FAILED_STATUSES = ('not_reached', 'stagnation', 'failed')


def parse_point(value):
    """argparse type for 'x,y'."""
    try:
        x, y = (float(part) for part in value.split(','))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected x,y, got {value!r}")
    return (x, y)


def parse_points(value):
    """argparse type for 'x,y;x,y;...'."""
    return [parse_point(part) for part in value.split(';') if part.strip()]


def _plain(value):
    if hasattr(value, 'tolist'):
        return value.tolist()
    if isinstance(value, dict):
        return {key: _plain(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(item) for item in value]
    return value


class HerdingCommand(BaseCommand):
    """
    Base class of the herding commands.

    Subclasses implement ``run(scenario, options)`` returning
    ``(report dict, trajectory or None)``; the report's ``status`` decides the
    exit code.
    """

    requires_system_checks = []
    uses_target = False

    def add_arguments(self, parser):
        parser.add_argument(
            '--scenario',
            required=True,
            help='Scenario file, or the name of a bundled scenario',
        )
        parser.add_argument('--out', help='Write the trajectory to this CSV file')
        parser.add_argument('--steps', type=int, help='Number of RK4 steps (overrides the scenario)')
        parser.add_argument('--tf', type=float, help='Final time or horizon (overrides the scenario)')
        parser.add_argument('--seed', type=int, help='Seed of the random evader placement')
        parser.add_argument('--json', action='store_true', help='Print a machine-readable report')
        if self.uses_target:
            parser.add_argument('--target', type=parse_point, help='Target point x,y (overrides the scenario)')
            parser.add_argument('--tol', type=float, help='Success radius around the target')
        self.add_command_arguments(parser)

    def add_command_arguments(self, parser):
        pass

    def run(self, scenario, options):
        raise NotImplementedError

    def target(self, scenario, options):
        target = options.get('target') or scenario.target
        if target is None:
            raise CommandError('This command needs a target (--target x,y or a scenario target)', returncode=2)
        return target

    def handle(self, *args, **options):
        try:
            scenario = resolve_scenario(options['scenario']).with_seed(options['seed'])
            report, traj = self.run(scenario, options)
            if traj is not None and options['out']:
                write_trajectory(traj, options['out'], scenario_hash=scenario_hash(scenario), seed=scenario.seed)
                report['trajectory'] = options['out']
        except (SingularityError, DivergenceError) as exc:
            raise CommandError(str(exc), returncode=1)
        except HerdingError as exc:
            raise CommandError(str(exc), returncode=2)

        report = {'schema': REPORT_SCHEMA, 'command': self.command_name, 'scenario': scenario.name, **report}
        self.emit(report, options['json'])
        if report.get('status') in FAILED_STATUSES:
            raise CommandError(f"{self.command_name}: {report['status']}", returncode=1)

    @property
    def command_name(self):
        return self.__module__.rsplit('.', 1)[-1]

    def emit(self, report, as_json):
        if as_json:
            self.stdout.write(json.dumps(_plain(report), indent=2))
            return
        status = report.get('status', 'completed')
        style = self.style.WARNING if status in FAILED_STATUSES else self.style.SUCCESS
        self.stdout.write(style(f"{self.command_name} [{report['scenario']}]: {status}"))
        for key, value in report.items():
            if key in ('schema', 'command', 'scenario', 'status'):
                continue
            self.stdout.write(f"  {key}: {_plain(value)}")
