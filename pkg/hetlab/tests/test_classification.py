import math

from django.test import SimpleTestCase

from classification import (
    OUTCOMES,
    ClassifierConfig,
    LoopRecord,
    Outcome,
    _decide,
    _stopped,
    classify_trajectory,
    exit_angle,
)
from conditions import check_hypotheses
from errors import ConfigError
from integrator import IntegratorConfig, RadiusInPlane, SectionEvent, TerminationReason, integrate_to_section

from hetlab.tests.helpers import EIG_XI_B, X_A, X_B, ref


def loops_with(phis, dist_a=None, dist_b=None):
    dist_a = dist_a or [1e-2] * len(phis)
    dist_b = dist_b or [1e-2] * len(phis)
    return [LoopRecord(i, p, a, b, 5.0) for i, (p, a, b) in enumerate(zip(phis, dist_a, dist_b))]


class DecisionTests(SimpleTestCase):
    cfg = ClassifierConfig()

    def test_p13(self):
        self.assertEqual(_decide(loops_with([0.2, 0.001, 0.0005, 0.0001]), self.cfg), Outcome.AttractedP13)

    def test_p14(self):
        near = 0.5 * math.pi - 0.001
        self.assertEqual(_decide(loops_with([near] * 3), self.cfg), Outcome.AttractedP14)

    def test_needs_enough_loops(self):
        self.assertIsNone(_decide(loops_with([0.0, 0.0]), self.cfg))

    def test_needs_shrinking_distances(self):
        loops = loops_with([0.0] * 3, dist_a=[1e-3, 1e-2, 1e-4])
        self.assertIsNone(_decide(loops, self.cfg))

    def test_mixed_angles(self):
        self.assertIsNone(_decide(loops_with([0.0, 1.5, 0.0]), self.cfg))

    def test_stop_reasons(self):
        self.assertEqual(_stopped(TerminationReason.Blowup), Outcome.Escaped)
        self.assertEqual(_stopped(TerminationReason.ConvergedToPoint), Outcome.OtherAttractor)
        self.assertEqual(_stopped(TerminationReason.TimeLimit), Outcome.OtherAttractor)
        self.assertEqual(_stopped(TerminationReason.StepLimit), Outcome.Undecided)

    def test_stationary_end_on_the_cycle_is_undecided(self):
        balls = (([X_A, 0, 0, 0], 0.1), ([X_B, 0, 0, 0], 0.1))
        at_xi_a = [X_A + 1e-9, 0, 0, 0]
        elsewhere = [1.0, 0.5, 0.5, 0.0]
        self.assertEqual(_stopped(TerminationReason.ConvergedToPoint, at_xi_a, balls), Outcome.Undecided)
        self.assertEqual(_stopped(TerminationReason.ConvergedToPoint, elsewhere, balls), Outcome.OtherAttractor)
        self.assertEqual(_stopped(TerminationReason.TimeLimit, at_xi_a, balls), Outcome.OtherAttractor)

    def test_exit_angle(self):
        self.assertEqual(exit_angle([0, 0, 0.5, 0.0]), 0.0)
        self.assertAlmostEqual(exit_angle([0, 0, 0.0, -0.5]), 0.5 * math.pi)
        self.assertAlmostEqual(exit_angle([0, 0, -0.3, 0.3]), 0.25 * math.pi)


class ClassifierConfigTests(SimpleTestCase):
    def test_cutoff_range(self):
        with self.assertRaises(ConfigError):
            ClassifierConfig(phi_cutoff=1.0)

    def test_radius_positive(self):
        with self.assertRaises(ConfigError):
            ClassifierConfig(r_b=0.0)

    def test_loops_max_argument(self):
        with self.assertRaises(ConfigError):
            classify_trajectory(ref(), [X_B, 0, 1e-6, 0], loops_max=0)


class ClassifyTrajectoryTests(SimpleTestCase):
    def test_l1_start_settles_on_xi_b(self):
        outcome, loops = classify_trajectory(ref(), [0.1, 0, 0, 0])
        self.assertEqual(outcome, Outcome.Undecided)
        self.assertEqual(loops, [])

    def test_p13_start_settles_on_xi_a(self):
        # x2 stays exactly zero, so nothing carries the orbit back along C_ab
        cfg = ClassifierConfig(section_timeout=1000.0)
        outcome, loops = classify_trajectory(ref(), [X_B, 0, 1e-6, 0], cfg=cfg)
        self.assertEqual(outcome, Outcome.Undecided)
        self.assertTrue(all(rec.phi == 0.0 for rec in loops))

    def test_off_plane_start_leaves_along_p14(self):
        s = 1e-6 / math.sqrt(3.0)
        outcome, loops = classify_trajectory(ref(), [X_B, s, s, s], loops_max=1)
        self.assertIn(outcome.value, OUTCOMES)
        self.assertLessEqual(len(loops), 1)
        for rec in loops:
            self.assertGreater(rec.phi, 0.25 * math.pi)

    def test_always_terminates(self):
        cfg = ClassifierConfig(section_timeout=20.0, integrator=IntegratorConfig(max_steps=200_000))
        outcome, loops = classify_trajectory(ref(), [1e4, 1e4, 1e4, 1e4], loops_max=2, cfg=cfg)
        self.assertIn(outcome.value, OUTCOMES)
        self.assertLessEqual(len(loops), 2)

    def test_attracting_p13_cycle_off_plane_start(self):
        # strong x3 transverse growth at xi_b and contraction at xi_a: rho3 > 1
        coeffs = ref().with_changes(b31=-4.5, d3=15.0)
        self.assertGreater(check_hypotheses(coeffs).rho3, 1.0)
        # stationarity test off so the tightening passages are not cut short
        cfg = ClassifierConfig(integrator=IntegratorConfig(convergence_tol=0.0))
        outcome, loops = classify_trajectory(coeffs, [X_B, 1e-3, 1e-4, 0.0], loops_max=6, cfg=cfg)
        self.assertEqual(outcome, Outcome.AttractedP13)
        self.assertEqual(len(loops), cfg.confirm_loops)
        phis = [rec.phi for rec in loops]
        self.assertEqual(phis, sorted(phis, reverse=True))
        self.assertTrue(all(phi == 0.0 for phi in phis))
        dists = [rec.min_dist_b for rec in loops]
        self.assertEqual(dists, sorted(dists, reverse=True))


class ExitAngleGrowthTests(SimpleTestCase):
    def test_tan_phi_grows_with_eigenvalue_gap(self):
        s = 1e-6 / math.sqrt(2.0)
        _, inner = integrate_to_section(ref(), [X_B, 0.0, s, s], RadiusInPlane(1e-4))
        self.assertIsInstance(inner, SectionEvent)
        _, outer = integrate_to_section(ref(), inner.state, RadiusInPlane(1e-3))
        self.assertIsInstance(outer, SectionEvent)

        def tan_phi(x):
            return abs(x[3]) / abs(x[2])

        expected = math.exp((EIG_XI_B[3] - EIG_XI_B[2]) * outer.time)
        self.assertAlmostEqual(tan_phi(outer.state) / tan_phi(inner.state) / expected, 1.0, delta=1e-3)
