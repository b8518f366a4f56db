import math

from django.test import SimpleTestCase

from conditions import (
    check_construction,
    check_hypotheses,
    check_table1,
    full_report,
    isotropy_of,
)
from equilibria import compute_equilibria
from vector_field import SubspaceId

from hetlab.tests.helpers import random_valid_sets, ref

# one edit per C-row, with every row the edit breaks
SINGLE_ROW_MUTATIONS = {
    "C1": ({"b13": 1.0}, {"C1"}),
    "C2": ({"b14": 1.0}, {"C2"}),
    "C3": ({"b12": -1.0}, {"C3"}),
    "C4": ({"b22": 0.1}, {"C4"}),
    "C5": ({"b33": 1.0}, {"C5"}),
    "C6": ({"b44": 1.0}, {"C6"}),
    "C7": ({"c3": 1.0}, {"C7"}),
    "C8": ({"c4": 1.0}, {"C8"}),
    "C9": ({"c1": 2.0}, {"C9"}),
    "C10": ({"b21": -1.0}, {"C10"}),
    "C11": ({"d2": -2.0}, {"C11"}),
    "C12": ({"d3": -3.5}, {"C12"}),
    "C13": ({"b41": -2.0}, {"C13", "C15"}),
    "C14": ({"d3": -1.0, "d4": -1.1}, {"C14"}),
    "C15": ({"b41": 0.9}, {"C15"}),
    "C16": ({"b41": 2.0}, {"C16"}),
    "C17": ({"b31": -1.5}, {"C12", "C16", "C17"}),
    "C18": ({"b11": -0.5}, {"C18"}),
}


class CoefficientConditionTests(SimpleTestCase):
    def test_reference_passes_every_row(self):
        report = check_table1(ref())
        self.assertEqual([r.id for r in report.table1], [f"C{i}" for i in range(1, 19)])
        self.assertTrue(report.table1_passed())
        self.assertEqual(report.failed_rows(), [])

    def test_single_row_mutations(self):
        for row, (changes, expected) in SINGLE_ROW_MUTATIONS.items():
            with self.subTest(row=row):
                report = check_table1(ref().with_changes(**changes))
                self.assertEqual(set(report.failed_rows()), expected)

    def test_c16_with_swapped_d(self):
        report = check_table1(ref().with_changes(d3=5.0, d4=4.0))
        self.assertFalse(report.row("C16").passed)
        self.assertEqual(report.row("C16").lhs, 6.0 - 4.0)
        # d4 > d3 is broken by the same edit
        self.assertFalse(report.row("C14").passed)

    def test_c17_reference_values(self):
        row = check_table1(ref()).row("C17")
        self.assertAlmostEqual(row.lhs, -2.0)
        self.assertAlmostEqual(row.rhs, 14.0)
        self.assertEqual(row.sense, "<")

    def test_ratio_rows_nan_when_c1_zero(self):
        report = check_table1(ref().with_changes(c1=0.0))
        for row in ("C11", "C12", "C13"):
            self.assertTrue(math.isnan(report.row(row).lhs))
            self.assertFalse(report.row(row).passed)

    def test_informational_rows(self):
        report = check_table1(ref())
        self.assertAlmostEqual(report.row("C13_minus_C12").lhs, 1.6)
        self.assertTrue(report.row("C17_sufficient").passed)

    def test_row_json_shape(self):
        row = check_table1(ref()).to_dict()["conditions"][15]
        self.assertEqual(row["id"], "C16")
        self.assertEqual(set(row), {"id", "lhs", "rhs", "sense", "pass"})

    def test_deterministic(self):
        self.assertEqual(full_report(ref()).to_dict(), full_report(ref()).to_dict())


class ConstructionTests(SimpleTestCase):
    def test_reference_items(self):
        report = check_construction(ref())
        self.assertTrue(report.item("i").passed)
        self.assertTrue(report.item("ii").passed)
        self.assertTrue(report.item("iii").passed)
        self.assertTrue(report.sign_patterns_hold())
        self.assertEqual(report.principal_plane, "P14")

    def test_item_iv_flags_p14(self):
        iv = check_construction(ref()).item("iv")
        self.assertFalse(iv.passed)
        self.assertTrue(any("P14" in f for f in iv.flags))
        self.assertAlmostEqual(iv.evidence["printed_threshold"], -5.0)
        self.assertTrue(iv.evidence["printed_inequality_holds"])
        self.assertFalse(iv.evidence["printed_agrees_with_direct"])

    def test_item_iv_passes_in_p13(self):
        report = check_construction(ref().with_changes(b31=1.2, b41=1.0, d3=5.0, d4=4.0))
        self.assertTrue(report.item("iv").passed)
        self.assertEqual(report.principal_plane, "P13")

    def test_no_real_roots_skips_the_rest(self):
        report = check_construction(ref().with_changes(c1=3.0))
        self.assertFalse(report.item("i").passed)
        self.assertEqual(report.item("i").evidence["error"], "NoRealEquilibria")
        for name in ("ii", "iii", "iv"):
            self.assertFalse(report.item(name).passed)
            self.assertTrue(report.item(name).flags[0].startswith("skipped"))

    def test_same_sign_roots_fail_item_i(self):
        report = check_construction(ref().with_changes(c1=1.0))
        self.assertFalse(report.item("i").passed)
        self.assertIn("roots have the same sign", report.item("i").flags)

    def test_nonpositive_b12_flagged(self):
        ii = check_construction(ref().with_changes(b12=-1.0)).item("ii")
        self.assertTrue(any(f.startswith("b12 <= 0") for f in ii.flags))


class HypothesisTests(SimpleTestCase):
    def setUp(self):
        self.report = check_hypotheses(ref())

    def test_isotropy(self):
        self.assertEqual([g.name for g in isotropy_of(SubspaceId.P12)], ["Id", "Kappa34"])
        self.assertEqual([g.name for g in isotropy_of(SubspaceId.S134)], ["Id", "Kappa2"])
        self.assertTrue(self.report.row("Ha").passed)
        self.assertTrue(self.report.row("Hb").passed)
        self.assertTrue(self.report.row("Hd").passed)

    def test_hc_deferred_without_connections(self):
        hc = self.report.row("Hc")
        self.assertIsNone(hc.passed)
        self.assertEqual(hc.evidence["status"], "deferred")

    def test_condition3_direct_fails_for_reference(self):
        row = self.report.condition3_direct
        self.assertAlmostEqual(row.lhs, 0.15559, places=4)
        self.assertAlmostEqual(row.rhs, 70.474, places=2)
        self.assertFalse(row.passed)

    def test_condition3_printed_branches_pass(self):
        self.assertTrue(self.report.condition3_printed_branch3.passed)
        self.assertAlmostEqual(self.report.condition3_printed_branch3.lhs, -2.0)
        self.assertAlmostEqual(self.report.condition3_printed_branch4.lhs, -2.2)
        self.assertAlmostEqual(self.report.condition3_printed_branch4.rhs, 17.2)

    def test_stability_quantities_match_condition3_evidence(self):
        for c in random_valid_sets(50, seed=8):
            rep = check_hypotheses(c)
            evidence = rep.condition3_direct.evidence
            self.assertEqual(rep.c_bar_a, evidence["c_bar_a"])
            self.assertEqual(rep.c_bar_b, evidence["c_bar_b"])
            a, _ = compute_equilibria(c)
            self.assertEqual(rep.c_bar_a_x3, abs(a.eigenvalues[2]))
            self.assertEqual(rep.c_bar_a_x4, abs(a.eigenvalues[3]))
            for lam in a.eigenvalues:
                if lam < 0.0:
                    self.assertLessEqual(rep.c_bar_a, abs(lam))

    def test_delta(self):
        self.assertAlmostEqual(self.report.delta_linear, 1.8)
        self.assertAlmostEqual(self.report.delta_product, math.sqrt(13.0) * 1.8, places=9)

    def test_delta_identity_for_random_sets(self):
        for c in random_valid_sets(1000, seed=4):
            rep = check_hypotheses(c)
            a, b = compute_equilibria(c)
            scale = (abs(a.eigenvalues[2] * b.eigenvalues[3]) + abs(b.eigenvalues[2] * a.eigenvalues[3]))
            diff = rep.delta_product - (b.x1_value - a.x1_value) * rep.delta_linear
            self.assertLessEqual(abs(diff), 1e-9 * max(scale, 1.0))

    def test_rho(self):
        self.assertAlmostEqual(self.report.rho3, 0.00269, places=5)
        self.assertAlmostEqual(self.report.rho4, 0.00747, places=5)

    def test_hc_with_connections(self):
        class Shot:
            def __init__(self, verified):
                self.verified = verified

        good = check_hypotheses(ref(), connections=[Shot(True)] * 3)
        self.assertTrue(good.row("Hc").passed)
        bad = check_hypotheses(ref(), connections=[Shot(True), Shot(False), Shot(True)])
        self.assertFalse(bad.row("Hc").passed)

    def test_full_report_skips_without_equilibria(self):
        report = full_report(ref().with_changes(c1=1.0))
        self.assertEqual(report.failed_rows(), ["C9", "C17"])
        self.assertTrue(report.skipped.startswith("SignPatternViolation"))
        self.assertEqual(report.hypotheses, [])
