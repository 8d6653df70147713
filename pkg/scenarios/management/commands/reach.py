"""
Management command to search an off-bang-off control that brings the evader to a target
"""
from controllability.models import ReachSpec
from controllability.utils import constant_control_reach, reach_point
from scenarios.management.base import HerdingCommand


class Command(HerdingCommand):
    help = 'Find an off-bang-off (or constant) control steering the evader to the target'
    uses_target = True

    def add_command_arguments(self, parser):
        parser.add_argument('--t1', type=float, help='Switch-on time of the circumvention control')
        parser.add_argument('--kappa-c', type=float, help='Circumvention value between t1 and t2')
        parser.add_argument(
            '--mode',
            default='off_bang_off',
            choices=['off_bang_off', 'constant', 'pursuit'],
            help='Control family to search (default: off_bang_off)',
        )

    def run(self, scenario, options):
        target = self.target(scenario, options)
        block = scenario.reach
        tolerance = options['tol'] or block.tolerance
        if options['mode'] == 'constant':
            result = constant_control_reach(scenario, target, tol=tolerance, tf_range=block.tf_range, n_steps=options['steps'])
        else:
            spec = ReachSpec(
                target=target,
                kappa_c=options['kappa_c'] if options['kappa_c'] is not None else block.kappa_c,
                t1=options['t1'] if options['t1'] is not None else block.t1,
                tolerance=tolerance,
                t2_max=block.t2_max,
                tf_range=block.tf_range,
                pursuit_only=options['mode'] == 'pursuit',
                n_steps=options['steps'],
            )
            result = reach_point(scenario, spec)
        return result.to_dict(), result.trajectory
