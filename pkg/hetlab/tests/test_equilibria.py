import math

import numpy as np
from django.test import SimpleTestCase

from equilibria import (
    SADDLE,
    SINK,
    PrincipalPlane,
    compute_equilibria,
    l1_roots,
    p12_interior_equilibria,
    principal_plane,
    z_set_slice,
)
from errors import DegenerateCoefficient, NoRealEquilibria, NotASaddleInS134, SignPatternViolation
from vector_field import SubspaceId, eval_field, eval_jacobian

from hetlab.tests.helpers import EIG_XI_A, EIG_XI_B, X_A, X_B, random_valid_sets, ref


class L1RootTests(SimpleTestCase):
    def test_reference_roots(self):
        xa, xb = l1_roots(ref())
        self.assertAlmostEqual(xa, X_A, places=12)
        self.assertAlmostEqual(xb, X_B, places=12)

    def test_vieta(self):
        c = ref()
        xa, xb = l1_roots(c)
        self.assertAlmostEqual(xa + xb, -c.b11 / c.c1, places=12)
        self.assertAlmostEqual(xa * xb, 1.0 / c.c1, places=12)

    def test_roots_are_stationary_for_random_sets(self):
        for c in random_valid_sets(50, seed=2):
            a, b = compute_equilibria(c)
            for rec in (a, b):
                self.assertLessEqual(np.linalg.norm(eval_field(c, rec.point)), 1e-10 * (1 + abs(rec.x1_value) ** 3))

    def test_no_real_roots(self):
        with self.assertRaises(NoRealEquilibria):
            l1_roots(ref().with_changes(c1=3.0))

    def test_c1_zero(self):
        with self.assertRaises(DegenerateCoefficient):
            l1_roots(ref().with_changes(c1=0.0))

    def test_same_sign_roots(self):
        # c1 > 0 with a positive discriminant puts both roots below zero
        with self.assertRaises(SignPatternViolation):
            compute_equilibria(ref().with_changes(c1=1.0))


class EigenvalueTests(SimpleTestCase):
    def test_reference_values(self):
        a, b = compute_equilibria(ref())
        np.testing.assert_allclose(a.eigenvalues, EIG_XI_A, atol=1e-6)
        np.testing.assert_allclose(b.eigenvalues, EIG_XI_B, atol=1e-6)

    def test_agree_with_numerical_eigenvalues(self):
        for c in random_valid_sets(30, seed=9):
            for rec in compute_equilibria(c):
                numeric = np.sort(np.linalg.eigvals(eval_jacobian(c, rec.point)).real)
                closed = np.sort(rec.eigenvalues)
                np.testing.assert_allclose(closed, numeric, rtol=1e-8, atol=1e-10)

    def test_transverse_eigenvalues_after_substitution(self):
        # x^2 = -(1 + b11 x) / c1 on L1 turns 1 + bk1 x^2 + dk x into a linear function of x
        for c in random_valid_sets(30, seed=4):
            for rec in compute_equilibria(c):
                x = rec.x1_value
                numeric = np.linalg.eigvals(eval_jacobian(c, rec.point)).real
                for k, (bk1, dk) in enumerate(((c.b21, c.d2), (c.b31, c.d3), (c.b41, c.d4)), start=1):
                    lam = 1.0 - bk1 / c.c1 + (dk - bk1 / c.c1 * c.b11) * x
                    self.assertAlmostEqual(lam, rec.eigenvalues[k], delta=1e-9 * (1 + abs(lam)))
                    self.assertLess(np.min(np.abs(numeric - lam)), 1e-8 * (1 + abs(lam)))

    def test_lambda1_in_terms_of_discriminant(self):
        c = ref()
        a, b = compute_equilibria(c)
        root = math.sqrt(c.discriminant)
        self.assertAlmostEqual(a.eigenvalues[0], a.x1_value * root, places=10)
        self.assertAlmostEqual(b.eigenvalues[0], -b.x1_value * root, places=10)

    def test_roles(self):
        a, b = compute_equilibria(ref())
        self.assertEqual(a.role_in(SubspaceId.P12), SADDLE)
        self.assertEqual(b.role_in(SubspaceId.P12), SINK)
        self.assertEqual(a.role_in(SubspaceId.S134), SINK)
        self.assertEqual(b.role_in(SubspaceId.S134), SADDLE)
        self.assertEqual(a.to_dict()["roles"], {"P12": SADDLE, "S134": SINK})


class PrincipalPlaneTests(SimpleTestCase):
    def test_reference_is_p14(self):
        self.assertIs(principal_plane(ref()), PrincipalPlane.P14)

    def test_swapped_is_p13(self):
        c = ref().with_changes(b31=1.2, b41=1.0, d3=5.0, d4=4.0)
        self.assertIs(principal_plane(c), PrincipalPlane.P13)

    def test_tie(self):
        c = ref().with_changes(b41=1.0, d4=4.0)
        self.assertIs(principal_plane(c), PrincipalPlane.Tie)

    def test_not_a_saddle(self):
        with self.assertRaises(NotASaddleInS134):
            principal_plane(ref().with_changes(d3=-4.0))


class P12EquilibriumTests(SimpleTestCase):
    def test_reference_solutions_lie_outside_d(self):
        found = p12_interior_equilibria(ref())
        self.assertEqual(len(found), 2)
        self.assertTrue(all(f.inside_D is False for f in found))
        np.testing.assert_allclose(sorted(f.x1 for f in found), [4.118, 8.600], atol=1e-2)

    def test_solutions_are_stationary(self):
        c = ref()
        for f in p12_interior_equilibria(c):
            residual = eval_field(c, [f.x1, f.x2, 0.0, 0.0])
            self.assertLess(np.linalg.norm(residual), 1e-6 * (1 + f.x1 ** 3))

    def test_b12_zero(self):
        with self.assertRaises(DegenerateCoefficient):
            p12_interior_equilibria(ref().with_changes(b12=0.0))

    def test_root_on_a_grid_point(self):
        # d2 = -3.95 puts an exact root at x1 = 4, which is a scan grid point
        found = p12_interior_equilibria(ref().with_changes(d2=-3.95))
        x1s = sorted(f.x1 for f in found)
        self.assertEqual(len(x1s), 2)
        self.assertAlmostEqual(x1s[0], 4.0, places=8)
        self.assertAlmostEqual(x1s[1], 4.5 + math.sqrt(71.0) / 2.0, places=8)
        self.assertAlmostEqual(found[0].x2, math.sqrt(12.0), places=6)


class ZSetTests(SimpleTestCase):
    def test_slice_at_midpoint(self):
        # q = x + 3x^2 - x^3 at x = 1.5
        a3, a4 = z_set_slice(ref(), 1.5)
        self.assertAlmostEqual(a3, math.sqrt(4.875))
        self.assertAlmostEqual(a4, math.sqrt(4.875))

    def test_empty_between_xi_a_and_origin(self):
        self.assertIsNone(z_set_slice(ref(), -0.1))
