"""
Management command to run the closed-loop feedback laws on a scenario
"""
from feedback.runner import run_closed_loop
from scenarios.management.base import HerdingCommand


class Command(HerdingCommand):
    help = 'Simulate the steering and stopping feedback laws in closed loop'
    uses_target = True

    def add_command_arguments(self, parser):
        parser.add_argument('--stop-rule', choices=['target', 'horizon'], help='Stop at the target or run to the horizon')
        parser.add_argument('--gathering', action='store_true', help='Enable the hysteresis stopping law')

    def run(self, scenario, options):
        target = self.target(scenario, options)
        updates = {'target': target}
        if options['tol']:
            updates['feedback'] = scenario.feedback.model_copy(update={'stop_radius': options['tol']})
        scenario = scenario.model_copy(update=updates)
        block = scenario.feedback
        traj, report = run_closed_loop(
            scenario,
            scenario.feedback_params(),
            options['tf'] or scenario.integrator.t_f,
            options['steps'] or scenario.integrator.n_steps,
            stop_rule=options['stop_rule'] or block.stop_rule,
            gathering=options['gathering'] or block.gathering,
            bounds=scenario.control_bounds(),
            seed=scenario.seed,
        )
        return report.to_dict(), traj
