"""
Management command to solve the optimal-control problem of a scenario
"""
import numpy as np

from optimal_control.solver import GUESS_KINDS, problem_from_scenario, solve_ocp
from scenarios.management.base import HerdingCommand
from scenarios.trajectory_io import atomic_write


class Command(HerdingCommand):
    help = 'Optimize the controls of a scenario by projected gradient descent'
    uses_target = True

    def add_command_arguments(self, parser):
        parser.add_argument('--max-iter', type=int, help='Iteration cap (overrides the scenario)')
        parser.add_argument('--guess', choices=GUESS_KINDS, help='Initial-guess kind (overrides the scenario)')
        parser.add_argument('--history', help='Write the cost of every accepted iterate to this CSV file')

    def run(self, scenario, options):
        if options['target'] is not None:
            scenario = scenario.model_copy(update={'target': options['target']})
        if options['guess']:
            block = scenario.optimization.model_copy(update={'initial_guess': options['guess']})
            scenario = scenario.model_copy(update={'optimization': block})
        problem = problem_from_scenario(scenario, t_f=options['tf'], n_steps=options['steps'], max_iter=options['max_iter'])
        solution = solve_ocp(problem)

        if options['history']:
            rows = np.column_stack([np.arange(len(solution.history)), solution.history])
            with atomic_write(options['history']) as handle:
                np.savetxt(handle, rows, fmt=['%d', '%.17g'], delimiter=',', header='iteration,cost', comments='# ')
        return solution.to_dict(), solution.trajectory
