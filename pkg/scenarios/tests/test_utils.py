"""
Tests for running scenarios under their own schedules.
"""

import numpy as np
from django.test import SimpleTestCase

from dynamics.integrators import integrate
from dynamics.utils import gathering_radius
from feedback.runner import run_closed_loop
from main.exceptions import UsageError
from scenarios.loaders import bundled_names, load_bundled
from scenarios.models import Scenario
from scenarios.utils import simulate_scenario


def spread_pair(spread):
    return Scenario.model_validate({
        'name': 'spread_pair',
        'drivers': [{'position': [-3.0, 0.0]}],
        'evaders': [{'position': [0.0, spread]}, {'position': [0.0, -spread]}],
        'target': [4.0, 1.0],
        'integrator': {'t_f': 20.0, 'n_steps': 2000},
        'schedule': {'kind': 'feedback'},
        'feedback': {'gathering': True, 'stop_rule': 'horizon'},
    })


class GatheringScenarioTest(SimpleTestCase):
    """Test that a gathering feedback scenario runs through the closed-loop runner."""

    def setUp(self):
        self.scenario = spread_pair(0.32)

    def test_same_run_as_closed_loop(self):
        """Test that simulating the scenario gives the closed-loop trajectory node for node"""
        traj = simulate_scenario(self.scenario)
        expected, _ = run_closed_loop(
            self.scenario, self.scenario.feedback_params(), 20.0, 2000, stop_rule='horizon', gathering=True,
        )
        np.testing.assert_array_equal(traj.times, expected.times)
        np.testing.assert_array_equal(traj.state_vectors(), expected.state_vectors())
        np.testing.assert_array_equal(traj.kp, expected.kp)

    def test_pursuit_stays_off_inside_the_band(self):
        """Test that pursuit stays suspended while the radius shrinks from gather_on to gather_off"""
        traj = simulate_scenario(self.scenario)
        radius = np.array([gathering_radius(traj.state_at(i)) for i in range(traj.n_steps + 1)])
        self.assertEqual(traj.kp[0, 0], 0.0)
        held = (radius > 0.27) & (radius <= 0.3) & (traj.kp[:, 0] == 0.0)
        self.assertGreater(np.count_nonzero(held), 0)

    def test_plain_integration_refused(self):
        """Test that integrating the gathering schedule without the runner is an error"""
        with self.assertRaises(UsageError):
            integrate(
                self.scenario.initial_state(),
                self.scenario.control_schedule(),
                self.scenario.kernel_set(),
                self.scenario.friction_params(),
                1.0,
                10,
            )


class OpenLoopScenarioTest(SimpleTestCase):
    """Test open-loop scenarios and the grid overrides."""

    def test_matches_integrate(self):
        """Test that an open-loop scenario goes through the integrator unchanged"""
        scenario = load_bundled('off_bang_off_reach')
        traj = simulate_scenario(scenario, t_f=2.0, n_steps=40)
        expected = integrate(
            scenario.initial_state(),
            scenario.control_schedule(),
            scenario.kernel_set(),
            scenario.friction_params(),
            2.0,
            40,
            bounds=scenario.control_bounds(),
        )
        np.testing.assert_array_equal(traj.state_vectors(), expected.state_vectors())
        np.testing.assert_array_equal(traj.kc, expected.kc)

    def test_defaults_from_integrator_block(self):
        """Test that the scenario's own horizon and step count are used by default"""
        scenario = load_bundled('off_bang_off_reach')
        traj = simulate_scenario(scenario.model_copy(update={
            'integrator': scenario.integrator.model_copy(update={'t_f': 1.0, 'n_steps': 25}),
        }))
        self.assertEqual(traj.n_steps, 25)
        self.assertAlmostEqual(traj.t_f, 1.0)


class BundledScenarioRunTest(SimpleTestCase):
    """Test that every shipped scenario starts and integrates a few steps."""

    def test_every_bundled_scenario_runs(self):
        """Test a short run of each bundled scenario"""
        for name in bundled_names():
            with self.subTest(name=name):
                scenario = load_bundled(name)
                state = scenario.initial_state()
                self.assertEqual(state.evader_pos.shape, (scenario.n_evaders, 2))
                traj = simulate_scenario(scenario, t_f=0.05, n_steps=5)
                self.assertEqual(traj.n_steps, 5)
                self.assertTrue(np.all(np.isfinite(traj.state_vectors())))
