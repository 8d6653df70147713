"""
Management command to integrate a scenario under its own control schedule
"""
import numpy as np

from dynamics.utils import gathering_radius, min_driver_evader_distance
from scenarios.management.base import HerdingCommand
from scenarios.trajectory_io import PLOT_SERIES, export_plot_data
from scenarios.utils import simulate_scenario


class Command(HerdingCommand):
    help = 'Integrate a scenario with its control schedule and write the trajectory'

    def add_command_arguments(self, parser):
        parser.add_argument('--plot', help='Also write gnuplot blocks to this file')
        parser.add_argument(
            '--series',
            default='tracks,markers,controls,gathering_radius',
            help=f"Comma-separated plot series out of {', '.join(PLOT_SERIES)}",
        )

    def run(self, scenario, options):
        traj = simulate_scenario(scenario, options['tf'], options['steps'])
        final = traj.final_state
        report = {
            'status': 'completed',
            't_f': traj.t_f,
            'steps': traj.n_steps,
            'final_barycenter': traj.barycenters()[-1],
            'final_gathering_radius': gathering_radius(final),
            'min_driver_evader_distance': min(
                min_driver_evader_distance(dp, ep) for dp, ep in zip(traj.driver_pos, traj.evader_pos)
            ),
            'seed': scenario.seed,
        }
        if scenario.target is not None:
            report['final_error'] = float(np.linalg.norm(traj.barycenters()[-1] - np.asarray(scenario.target)))
        if options['plot']:
            series = [name.strip() for name in options['series'].split(',') if name.strip()]
            export_plot_data(traj, options['plot'], series)
            report['plot'] = options['plot']
        return report, traj
