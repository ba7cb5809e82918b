from fractions import Fraction

from django.test import SimpleTestCase

from engine.exceptions import ValidationError
from engine.infotheory import FLOAT, JointTable
from engine.models import EmpiricalModel, Scenario, context_key, outcome_key
from engine.scenario import BINARY, product_example, require_consistent, triangle_example, validate


def codes(report):
    return [alert["code"] for alert in report["alerts"]]


class TestScenario(SimpleTestCase):
    def setUp(self):
        # a-b and b-c share b
        self.scenario = Scenario(
            observables=(("a", BINARY), ("b", BINARY), ("c", BINARY)),
            contexts=(("a", "b"), ("b", "c")),
        )

    def table(self, context, cells, mode="exact"):
        return JointTable(self.scenario.context_variables(context), cells, mode)

    def test_keys(self):
        self.assertEqual(context_key(("o1", "o2")), "o1|o2")
        self.assertEqual(outcome_key(("0", "1")), "0,1")

    def test_scenario_rejects_bad_declarations(self):
        with self.assertRaises(ValidationError):
            Scenario(observables=(("a", BINARY), ("a", BINARY)), contexts=())
        with self.assertRaises(ValidationError):
            Scenario(observables=(("a", BINARY),), contexts=(("a", "z"),))
        with self.assertRaises(ValidationError):
            Scenario(observables=(("a", BINARY), ("b", BINARY)), contexts=(("a", "b"), ("b", "a")))
        with self.assertRaises(ValidationError):
            Scenario(observables=(("a", ()),), contexts=())

    def test_stray_table_rejected(self):
        other = JointTable((("a", BINARY),), {("0",): 1})
        with self.assertRaises(ValidationError):
            EmpiricalModel(self.scenario, {("a",): other})

    def test_triangle_is_pairwise_consistent(self):
        report = validate(triangle_example())
        self.assertTrue(report["consistent"])
        self.assertEqual(report["alerts"], [])
        self.assertEqual(report["checked_pairs"], 3)

    def test_triangle_breaks_when_any_cell_moves(self):
        triangle = triangle_example()
        step = Fraction(1, 10)
        for c, table in triangle.tables.items():
            for o in table.outcomes():
                for delta in (step, -step):
                    cells = {x: table.cell(x) for x in table.outcomes()}
                    cells[o] += delta
                    if cells[o] < 0:
                        with self.assertRaises(ValidationError):
                            JointTable(table.variables, cells)
                        continue
                    tables = dict(triangle.tables)
                    tables[c] = JointTable(table.variables, cells)
                    report = validate(EmpiricalModel(triangle.scenario, tables))
                    self.assertFalse(report["consistent"], (c, o, delta))
                    self.assertIn("NORMALIZATION", codes(report))

    def test_product_example(self):
        report = validate(product_example())
        self.assertTrue(report["consistent"])
        self.assertEqual(report["checked_pairs"], 0)

    def test_missing_table(self):
        half = Fraction(1, 2)
        em = EmpiricalModel(self.scenario, {("a", "b"): self.table(("a", "b"), {("0", "0"): half, ("1", "1"): half})})
        report = validate(em)
        self.assertFalse(report["consistent"])
        self.assertEqual(codes(report), ["MISSING_TABLE"])
        self.assertEqual(report["alerts"][0]["context"], "b|c")

    def test_table_over_wrong_variables(self):
        wrong = JointTable((("b", BINARY), ("a", BINARY)), {("0", "0"): 1})
        em = EmpiricalModel(self.scenario, {
            ("a", "b"): wrong,
            ("b", "c"): self.table(("b", "c"), {("0", "0"): 1}),
        })
        self.assertIn("TABLE_VARIABLES", codes(validate(em)))

    def test_normalization_alert_reports_the_total(self):
        em = EmpiricalModel(self.scenario, {
            ("a", "b"): self.table(("a", "b"), {("0", "0"): Fraction(1, 2)}),
            ("b", "c"): self.table(("b", "c"), {("0", "0"): 1}),
        })
        report = validate(em)
        alert = next(a for a in report["alerts"] if a["code"] == "NORMALIZATION")
        self.assertEqual(alert["total"], Fraction(1, 2))
        self.assertEqual(alert["context"], "a|b")

    def test_disturbance_detected(self):
        """p(b) is 1/2-1/2 in one context and certain in the other."""
        half = Fraction(1, 2)
        em = EmpiricalModel(self.scenario, {
            ("a", "b"): self.table(("a", "b"), {("0", "0"): half, ("1", "1"): half}),
            ("b", "c"): self.table(("b", "c"), {("0", "0"): 1}),
        })
        report = validate(em)
        self.assertEqual(codes(report), ["NO_DISTURBANCE"])
        self.assertEqual(report["alerts"][0]["shared"], ["b"])
        self.assertEqual(report["alerts"][0]["deviation"], half)
        with self.assertRaises(ValidationError):
            require_consistent(em)

    def test_float_disturbance_within_tolerance(self):
        def model(eps):
            return EmpiricalModel(self.scenario, {
                ("a", "b"): self.table(("a", "b"), {("0", "0"): 0.5, ("1", "1"): 0.5}, FLOAT),
                ("b", "c"): self.table(("b", "c"), {("0", "0"): 0.5 + eps, ("1", "1"): 0.5 - eps}, FLOAT),
            })

        self.assertTrue(validate(model(1e-12))["consistent"])
        self.assertEqual(codes(validate(model(1e-6))), ["NO_DISTURBANCE"])
