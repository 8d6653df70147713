"""
Management command to steer the evader through a list of waypoints
"""
from controllability.models import ReachSpec, WaypointsResult
from controllability.utils import reach_waypoints
from scenarios.management.base import HerdingCommand, parse_points


class Command(HerdingCommand):
    help = 'Reach a sequence of waypoints with concatenated off-bang-off controls'

    def add_command_arguments(self, parser):
        parser.add_argument('--points', type=parse_points, help="Waypoints 'x,y;x,y;...' (overrides the scenario)")
        parser.add_argument('--tol', type=float, help='Success radius around each waypoint')

    def run(self, scenario, options):
        block = scenario.reach
        points = options['points'] if options['points'] is not None else block.waypoints
        if not points:
            return WaypointsResult().to_dict(), None
        spec = ReachSpec(
            target=points[0],
            kappa_c=block.kappa_c,
            t1=block.t1,
            tolerance=options['tol'] or block.tolerance,
            t2_max=block.t2_max,
            tf_range=block.tf_range,
            n_steps=options['steps'],
        )
        result = reach_waypoints(scenario, points, spec)
        return result.to_dict(), result.trajectory
