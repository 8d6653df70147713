"""
Running a scenario under its own control schedule.
"""
import logging

from controls.models import FeedbackRef
from dynamics.integrators import integrate
from feedback.runner import run_closed_loop

logger = logging.getLogger(__name__)


def simulate_scenario(scenario, t_f=None, n_steps=None):
    """
    Integrate a scenario with the schedule it declares.

    Open-loop schedules go through the RK4 integrator. A feedback schedule is
    handed to the closed-loop runner with the scenario's stop rule, so the
    gathering hysteresis is carried from step to step.

    Args:
        scenario: Scenario
        t_f: Horizon (defaults to the scenario's integrator block)
        n_steps: Number of steps (defaults to the scenario's integrator block)

    Returns:
        Trajectory
    """
    t_f = t_f or scenario.integrator.t_f
    n_steps = n_steps or scenario.integrator.n_steps
    schedule = scenario.control_schedule()
    if isinstance(schedule, FeedbackRef):
        logger.info(f"Running {scenario.name} in closed loop")
        traj, _ = run_closed_loop(
            scenario,
            schedule.params,
            t_f,
            n_steps,
            stop_rule=scenario.feedback.stop_rule,
            gathering=schedule.gathering,
            bounds=scenario.control_bounds(),
            seed=scenario.seed,
        )
        return traj
    return integrate(
        scenario.initial_state(),
        schedule,
        scenario.kernel_set(),
        scenario.friction_params(),
        t_f,
        n_steps,
        bounds=scenario.control_bounds(),
    )
