"""
Management command to check the energy and Lyapunov identities and fit the asymptotic motions
"""
from diagnostics.fitting import fit_circumvention, fit_pursuit
from diagnostics.utils import check_dissipation
from scenarios.management.base import HerdingCommand
from scenarios.utils import simulate_scenario

FITS = {'pursuit': fit_pursuit, 'circumvention': fit_circumvention}


class Command(HerdingCommand):
    help = 'Check energy/Lyapunov dissipation and fit the asymptotic motion of a one-on-one run'

    def add_command_arguments(self, parser):
        parser.add_argument(
            '--mode',
            default='pursuit',
            choices=['pursuit', 'circumvention', 'release'],
            help='Which dissipation identity to check (default: pursuit)',
        )
        parser.add_argument('--fit', choices=sorted(FITS), help='Also fit the asymptotic motion to the tail')
        parser.add_argument('--tail', type=float, help='Share of the run used by the fit')
        parser.add_argument('--tolerance', type=float, help='Allowed upward step of the dissipated quantity')

    def run(self, scenario, options):
        traj = simulate_scenario(scenario, options['tf'], options['steps'])
        dissipation = check_dissipation(traj, options['mode'], options['tolerance'])
        report = {
            'status': 'passed' if dissipation.passed else 'failed',
            'dissipation': dissipation.to_dict(),
        }
        if options['fit']:
            report['fit'] = FITS[options['fit']](traj, options['tail']).to_dict()
        return report, traj
