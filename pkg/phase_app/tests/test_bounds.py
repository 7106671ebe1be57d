import json
import math

import numpy as np
from django.test import SimpleTestCase

from phase_app.bounds import (
    BoundReport,
    PhaseVector,
    analytic_K,
    bound_report,
    bound_table,
    c1_constant,
    c2_constant,
    heisenberg_floor,
    heisenberg_lower,
    max_entanglement,
    qfi_matrix,
    resource_optima,
    rho,
    sql_floor,
    sql_lower,
    uub,
    wbb,
)
from phase_app.exceptions import PreconditionError
from phase_app.function_model import SmoothnessClass, satisfies_holder
from phase_app.records import Regime

TWO_PI = 2 * math.pi


class ScalarBoundTests(SimpleTestCase):
    def test_unbiased_bound(self):
        self.assertAlmostEqual(uub(8, 1), 1.0)
        self.assertAlmostEqual(uub(2, 4), 0.25)
        with self.assertRaises(PreconditionError):
            uub(0, 10)

    def test_worst_case_bound_combines_reciprocals(self):
        self.assertAlmostEqual(wbb(1.0, 1.0), 0.5)
        self.assertAlmostEqual(wbb(0.05, 0.1), 1 / 30)
        self.assertEqual(wbb(0.2, math.inf), 0.2)
        with self.assertRaises(PreconditionError):
            wbb(0.0, 1.0)

    def test_radius_shrinks_with_modes(self):
        self.assertAlmostEqual(rho(1.0, TWO_PI, 1), 1.0, delta=1e-9)
        self.assertAlmostEqual(rho(1.0, TWO_PI, 4) * 4, rho(1.0, TWO_PI, 1))

    def test_floor_constants_are_positive(self):
        for q in (0.5, 1.0, 1.5, 2.0):
            self.assertGreater(c1_constant(q), 0.0)
            self.assertGreater(c2_constant(q), 0.0)

    def test_floor_exponents(self):
        for q in (0.5, 1.0, 2.0):
            ratio = sql_floor(q, TWO_PI, 2**20) / sql_floor(q, TWO_PI, 2**10)
            self.assertAlmostEqual(math.log2(ratio) / 10, -q / (2 * q + 1), places=12)
            ratio = heisenberg_floor(q, TWO_PI, 2**20) / heisenberg_floor(q, TWO_PI, 2**10)
            self.assertAlmostEqual(math.log2(ratio) / 10, -q / (q + 1), places=12)

    def test_heisenberg_floor_eventually_beats_sql(self):
        self.assertLess(heisenberg_floor(1.0, TWO_PI, 1e12), sql_floor(1.0, TWO_PI, 1e12))


class SineFamilyTests(SimpleTestCase):
    def test_vectors_inside_radius_are_in_class(self):
        rng = np.random.default_rng(2)
        cls = SmoothnessClass(1.0, TWO_PI)
        for K in (1, 3, 8):
            radius = rho(1.0, TWO_PI, K)
            u = rng.normal(size=K)
            u *= 0.95 * radius / np.linalg.norm(u)
            vector = PhaseVector(u, radius)
            self.assertTrue(vector.in_class)
            self.assertTrue(satisfies_holder(vector.function(1024), cls), K)

    def test_empty_vector_is_rejected(self):
        with self.assertRaises(PreconditionError):
            PhaseVector([], 1.0)


class FisherInformationTests(SimpleTestCase):
    def test_origin_gives_twice_identity(self):
        J = qfi_matrix(PhaseVector(np.zeros(8), 1.0), 512)
        np.testing.assert_allclose(J, 2 * np.eye(8), atol=1e-12)

    def test_analytic_matches_finite_difference(self):
        u = PhaseVector(np.random.default_rng(7).normal(scale=0.3, size=5), 1.0)
        analytic = qfi_matrix(u, 256)
        numeric = qfi_matrix(u, 256, finite_difference=True)
        np.testing.assert_allclose(analytic, numeric, atol=1e-6)

    def test_diagonal_never_exceeds_origin(self):
        u = PhaseVector(np.random.default_rng(8).normal(size=6), 1.0)
        J = qfi_matrix(u, 512)
        self.assertLessEqual(np.diag(J).max(), 2.0 + 1e-12)
        self.assertGreaterEqual(np.linalg.eigvalsh(J).min(), -1e-12)

    def test_coarse_grid_is_rejected(self):
        with self.assertRaises(PreconditionError):
            qfi_matrix(PhaseVector(np.zeros(8), 1.0), 63)


class OptimisedBoundTests(SimpleTestCase):
    def test_sql_lower_picks_best_scanned_mode_count(self):
        q, M, N = 1.0, TWO_PI, 4096
        result = sql_lower(q, M, N)
        k_a = analytic_K(q, M, N)
        self.assertTrue(result.K_star == 1 or k_a / 4 - 1 <= result.K_star <= 4 * k_a + 1)
        for K in (1, math.floor(k_a), math.ceil(k_a)):
            self.assertGreaterEqual(result.bound, wbb(uub(K, N), rho(q, M, K)))

    def test_heisenberg_lower_uses_floor_when_entanglement_helps(self):
        result = heisenberg_lower(1.0, TWO_PI, 2**16)
        self.assertGreaterEqual(result.np_star, 1)
        self.assertAlmostEqual(result.bound, heisenberg_floor(1.0, TWO_PI, 2**16))

    def test_heisenberg_lower_falls_back_to_sql(self):
        q, M = 1.0, 1e6
        self.assertLess(max_entanglement(q, M, 1), 1)
        result = heisenberg_lower(q, M, 1)
        self.assertEqual(result.np_star, 1)
        self.assertEqual(result.bound, sql_lower(q, M, 1).bound)

    def test_invalid_arguments_raise(self):
        with self.assertRaises(PreconditionError):
            sql_lower(0.0, 1.0, 10)
        with self.assertRaises(PreconditionError):
            heisenberg_lower(1.0, -1.0, 10)


class ResourceOptimaTests(SimpleTestCase):
    def test_sql_split(self):
        N = 4096
        plan = resource_optima(1.0, TWO_PI, N, Regime.SQL)
        self.assertEqual(plan.n_p, 1)
        self.assertEqual(plan.K, round(analytic_K(1.0, TWO_PI, N)))
        self.assertLessEqual(plan.n1 * plan.n2, N)

    def test_heisenberg_split(self):
        N = 2**16
        plan = resource_optima(1.0, TWO_PI, N, "Heisenberg")
        self.assertEqual(plan.n_p, math.floor(max_entanglement(1.0, TWO_PI, N)))
        self.assertEqual(plan.n2, plan.n_p)
        self.assertEqual(plan.n_c, plan.n1)

    def test_overhead_shrinks_entanglement(self):
        N = 2**16
        plain = resource_optima(1.0, TWO_PI, N, Regime.HEISENBERG)
        costly = resource_optima(1.0, TWO_PI, N, Regime.HEISENBERG, overhead=3.0)
        self.assertLess(costly.n_p, plain.n_p)


class BoundReportTests(SimpleTestCase):
    def test_report_fields_agree(self):
        report = bound_report(1.0, TWO_PI, 4096)
        self.assertAlmostEqual(report.c0, TWO_PI, delta=1e-9)
        self.assertAlmostEqual(report.delta_wbb, report.sql_lower)
        self.assertEqual(report.floor(Regime.SQL), report.sql_floor)
        self.assertEqual(report.floor("Heisenberg"), report.hl_lower)

    def test_report_serialises_to_json(self):
        payload = json.loads(bound_report(0.5, 1.0, 1024).to_json())
        self.assertEqual(payload["N"], 1024)
        self.assertEqual(set(payload), {f for f in BoundReport.__dataclass_fields__})

    def test_table_covers_every_combination(self):
        rows = bound_table([0.5, 1.0], [TWO_PI], [256, 1024, 4096])
        self.assertEqual(len(rows), 6)
        self.assertEqual({row["N"] for row in rows}, {256, 1024, 4096})
