"""
Management command to compare the adjoint gradient with finite differences
"""
from optimal_control.adjoint import validate_gradient
from optimal_control.solver import initial_iterate, problem_from_scenario
from scenarios.management.base import HerdingCommand

DEFAULT_STEPS = 40


class Command(HerdingCommand):
    help = 'Check the adjoint gradient of the scenario cost against central finite differences'
    uses_target = True

    def add_command_arguments(self, parser):
        parser.add_argument('--fd-step', type=float, help='Finite-difference step')
        parser.add_argument('--tolerance', type=float, help='Largest accepted relative error')

    def run(self, scenario, options):
        if options['target'] is not None:
            scenario = scenario.model_copy(update={'target': options['target']})
        # the scenario's own open-loop schedule is the evaluation point
        problem = problem_from_scenario(
            scenario,
            guess=scenario.control_schedule(),
            t_f=options['tf'] or scenario.integrator.t_f,
            n_steps=options['steps'] or DEFAULT_STEPS,
        )
        check = validate_gradient(problem, initial_iterate(problem), options['fd_step'], options['tolerance'])
        return check.to_dict(), None
