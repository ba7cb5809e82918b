from fractions import Fraction

from django.test import SimpleTestCase

from engine.exceptions import CapacityError, ScenarioMismatchError, ValidationError
from engine.infotheory import FLOAT, Dist, JointTable
from engine.marginal_solver import (
    FEASIBLE,
    INFEASIBLE,
    PhaseOneSimplex,
    check_certificate,
    clears_snap_margin,
    constraint_system,
    enumerate_assignments,
    farkas_check,
    global_joint_exists,
    hidden_variable_model,
    rationalize,
    verify_witness,
)
from engine.models import EmpiricalModel, Scenario
from engine.ontmodel import empirical_model
from engine.scenario import BINARY, product_example, triangle_example, validate
from engine.tests.factories import random_binary_model, seeded_rng
from engine.tests.oracles import feasible_by_elimination


class TestAssignments(SimpleTestCase):
    def test_lexicographic_order(self):
        labels = [g.label() for g in enumerate_assignments(product_example().scenario)]
        self.assertEqual(labels, ["a=0,b=0", "a=0,b=1", "a=1,b=0", "a=1,b=1"])

    def test_cap(self):
        with self.assertRaisesMessage(CapacityError, "--cap"):
            enumerate_assignments(triangle_example().scenario, cap=7)
        self.assertEqual(len(enumerate_assignments(triangle_example().scenario, cap=8)), 8)


class TestSimplex(SimpleTestCase):
    def test_feasible_system(self):
        # w0 + w1 = 1, w1 = 1/3
        lp = PhaseOneSimplex([[1, 1], [0, 1]], [Fraction(1), Fraction(1, 3)]).run()
        self.assertEqual(lp.objective(), 0)
        self.assertEqual(lp.primal(), [Fraction(2, 3), Fraction(1, 3)])

    def test_infeasible_system_certificate(self):
        # w0 + w1 = 1, w0 + w1 = 2
        rows, rhs = [[1, 1], [1, 1]], [Fraction(1), Fraction(2)]
        lp = PhaseOneSimplex(rows, rhs).run()
        self.assertGreater(lp.objective(), 0)
        self.assertTrue(farkas_check(rows, rhs, lp.farkas_certificate()))

    def test_farkas_check_rejects_wrong_vectors(self):
        rows, rhs = [[1, 1], [1, 1]], [Fraction(1), Fraction(2)]
        self.assertFalse(farkas_check(rows, rhs, (Fraction(1), Fraction(1))))
        self.assertFalse(farkas_check(rows, rhs, (Fraction(1),)))


class TestGlobalJoint(SimpleTestCase):
    def test_triangle_is_infeasible_with_certificate(self):
        em = triangle_example()
        result = global_joint_exists(em)
        self.assertEqual(result.status, INFEASIBLE)
        self.assertFalse(result.feasible)
        self.assertIsNone(result.witness)
        self.assertEqual(result.assignment_count, 8)
        self.assertEqual(len(result.certificate), 13)
        self.assertEqual(result.constraint_labels[0], "normalization")
        self.assertIn("o1|o2:0,1", result.constraint_labels)
        self.assertTrue(check_certificate(em, result))

    def test_product_has_the_product_witness(self):
        em = product_example()
        result = global_joint_exists(em)
        self.assertEqual(result.status, FEASIBLE)
        self.assertEqual({g.label(): w for g, w in result.witness.items()}, {
            "a=0,b=0": Fraction(1, 4), "a=0,b=1": Fraction(1, 4),
            "a=1,b=0": Fraction(1, 4), "a=1,b=1": Fraction(1, 4),
        })
        self.assertTrue(verify_witness(em, result.witness))
        self.assertFalse(check_certificate(em, result))

    def test_inconsistent_model_is_refused(self):
        scenario = Scenario((("a", BINARY), ("b", BINARY)), (("a",), ("a", "b")))
        em = EmpiricalModel(scenario, {
            ("a",): JointTable(scenario.context_variables(("a",)), {("0",): 1}),
            ("a", "b"): JointTable(scenario.context_variables(("a", "b")), {("1", "1"): 1}),
        })
        with self.assertRaises(ValidationError):
            global_joint_exists(em)

    def test_verify_witness_rejects_foreign_entries(self):
        with self.assertRaises(ScenarioMismatchError):
            verify_witness(product_example(), Dist.uniform(("x", "y")))

    def test_wrong_witness_fails(self):
        em = triangle_example()
        assignments = enumerate_assignments(em.scenario)
        self.assertFalse(verify_witness(em, Dist.uniform(assignments)))

    def test_hidden_variable_model_reproduces_tables(self):
        em = product_example()
        result = global_joint_exists(em)
        model = hidden_variable_model(em, result.witness)
        reproduced = empirical_model(model)
        for c in em.scenario.contexts:
            for o in em.table(c).outcomes():
                self.assertEqual(reproduced.table(c).cell(o), em.table(c).cell(o))

    def test_solver_agrees_with_elimination_oracle(self):
        rng = seeded_rng(1)
        verdicts = set()
        for _ in range(150):
            em = random_binary_model(rng)
            result = global_joint_exists(em)
            _, rows, rhs = constraint_system(em, enumerate_assignments(em.scenario))
            self.assertEqual(result.feasible, feasible_by_elimination(rows, rhs))
            if result.feasible:
                self.assertTrue(verify_witness(em, result.witness))
            else:
                self.assertTrue(check_certificate(em, result))
            verdicts.add(result.status)
        self.assertEqual(verdicts, {FEASIBLE, INFEASIBLE})


class TestRationalize(SimpleTestCase):
    def test_exact_models_pass_through(self):
        em = product_example()
        self.assertEqual(rationalize(em), (em, 0.0))

    def test_snapped_tables_sum_to_one(self):
        scenario = Scenario((("a", ("0", "1", "2")),), (("a",),))
        third = 1 / 3
        em = EmpiricalModel(scenario, {
            ("a",): JointTable(scenario.context_variables(("a",)), {("0",): third, ("1",): third, ("2",): third}, FLOAT),
        })
        snapped, distance = rationalize(em, denominator=10)
        table = snapped.table(("a",))
        self.assertEqual(table.total(), 1)
        self.assertEqual(sorted(table.cells.values()), [Fraction(3, 10), Fraction(3, 10), Fraction(4, 10)])
        self.assertAlmostEqual(distance, 0.4 - third, places=12)

    def test_shared_marginals_agree_after_snapping(self):
        ternary = ("0", "1", "2")
        scenario = Scenario(
            (("a", BINARY), ("b", ternary), ("c", ("0",))),
            (("a", "b"), ("b", "c")),
        )
        sixth = 1 / 6
        ab = {(x, y): sixth for x in BINARY for y in ("0", "1")}
        ab.update({("0", "2"): 0.3, ("1", "2"): 1 / 30})
        em = EmpiricalModel(scenario, {
            ("a", "b"): JointTable(scenario.context_variables(("a", "b")), ab, FLOAT),
            ("b", "c"): JointTable(scenario.context_variables(("b", "c")), {(y, "0"): 1 / 3 for y in ternary}, FLOAT),
        })
        self.assertTrue(validate(em)["consistent"])

        snapped, distance = rationalize(em)
        self.assertTrue(validate(snapped)["consistent"])
        self.assertLess(distance, 1e-5)

        result = global_joint_exists(em)
        self.assertEqual(result.status, FEASIBLE)
        self.assertTrue(verify_witness(em, result.witness, em.tol + result.snap_distance))

    def test_float_triangle_stays_contextual(self):
        exact = triangle_example()
        em = EmpiricalModel(exact.scenario, {c: t.to_float() for c, t in exact.tables.items()})
        result = global_joint_exists(em)
        self.assertEqual(result.status, INFEASIBLE)
        self.assertTrue(check_certificate(em, result))

    def test_certificate_margin(self):
        self.assertTrue(clears_snap_margin([Fraction(1)], [Fraction(-1, 2)], 10))
        self.assertFalse(clears_snap_margin([Fraction(1)], [Fraction(-1, 20)], 10))
        self.assertFalse(clears_snap_margin([Fraction(2), Fraction(-1)], [Fraction(1, 2), Fraction(1)], 1000))
