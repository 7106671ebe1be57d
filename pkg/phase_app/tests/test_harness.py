import math
import tempfile
from dataclasses import replace
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase

from phase_app.acceptance import QUICK, SCALING_SWEEPS, Scale, run_acceptance
from phase_app.bounds import resource_optima
from phase_app.exceptions import ConfigurationError, InsufficientDataError
from phase_app.harness import (
    ExperimentConfig,
    bound_reports_for,
    cascade_weight,
    check_bounds,
    entanglement_depth,
    fit_scaling,
    ps_budget,
    read_fits,
    run_sweep,
    run_trial,
    scaled_records,
    write_fit_points,
    write_fits,
    ws_budget,
)
from phase_app.probe_sim import KitaevConstants, kitaev_depth, kitaev_particles
from phase_app.records import (
    BUDGET_EXCEEDED,
    PRECONDITION_FAILED,
    EstimationRecord,
    Method,
    Regime,
    read_records,
    write_records,
)
from phase_app.ps_estimator import SMALL_PHASE_CAP
from phase_app.ws_estimator import COPIES_PER_MODE


def make_config(**overrides) -> ExperimentConfig:
    data = {"sweep": {"seed": 42}}
    config = ExperimentConfig.from_dict(data, defaults={})
    return replace(config, **overrides)


def synthetic_records(n_values, delta, trials=30, flagged=None) -> list[EstimationRecord]:
    """Records whose per-trial delta is delta(N) exactly; ``flagged`` maps N to a flagged-trial count."""
    flagged = flagged or {}
    records = []
    for N in n_values:
        for trial in range(trials):
            bad = trial < flagged.get(N, 0)
            records.append(EstimationRecord(
                method=Method.PS,
                regime=Regime.SQL,
                q=1.0,
                M=2 * math.pi,
                N=N,
                trial=trial,
                seed=trial,
                mspe=float("nan") if bad else delta(N) ** 2,
                err_a_sq=0.0,
                err_b_sq=0.0,
                particles_used=N,
                flags=(PRECONDITION_FAILED,) if bad else (),
            ))
    return records


class ExperimentConfigTests(SimpleTestCase):
    def test_defaults_fill_missing_sections(self):
        config = make_config()
        self.assertIs(config.method, Method.PS)
        self.assertIs(config.regime, Regime.SQL)
        self.assertEqual(config.trials, 200)
        self.assertEqual(config.n_list[0], 1024)
        self.assertAlmostEqual(config.amplitude_cap, SMALL_PHASE_CAP)
        self.assertEqual(config.kernel_m, 0)

    def test_settings_style_defaults_are_used(self):
        config = ExperimentConfig.from_dict(
            {"regime": "Heisenberg", "sweep": {"seed": 1}},
            defaults={"TRIALS_HEISENBERG": 12, "GRID_SIZE": 512, "KITAEV_C6": 5},
        )
        self.assertEqual(config.trials, 12)
        self.assertEqual(config.grid_size, 512)
        self.assertEqual(config.constants, KitaevConstants(c6=5.0))

    def test_json_round_trip(self):
        config = make_config(regime=Regime.HEISENBERG, q=0.5, n_list=(256, 512), trials=7)
        self.assertEqual(ExperimentConfig.from_json(config.to_json(), defaults={}), config)

    def test_missing_seed_is_rejected(self):
        with self.assertRaises(ConfigurationError):
            ExperimentConfig.from_dict({}, defaults={})

    def test_invalid_documents_are_rejected(self):
        cases = [
            {"method": "XX", "sweep": {"seed": 1}},
            {"method": "WS", "smoothness": {"q": 2.0}, "sweep": {"seed": 1}},
            {"sweep": {"seed": 1, "N_list": [512, 256]}},
            {"sweep": {"seed": 1, "target_mode": "sometimes"}},
            {"smoothness": {"M": -1.0}, "sweep": {"seed": 1}},
            {"sweep": {"seed": 1, "heisenberg_sites": 0}},
        ]
        for data in cases:
            with self.subTest(data=data), self.assertRaises(ConfigurationError):
                ExperimentConfig.from_dict(data, defaults={})

    def test_invalid_json_is_rejected(self):
        with self.assertRaises(ConfigurationError):
            ExperimentConfig.from_json("{not json", defaults={})


class BudgetTests(SimpleTestCase):
    def test_ps_sql_split_follows_analytic_optimum(self):
        config = make_config(grid_size=1024)
        budget = ps_budget(config, 4096)
        self.assertEqual(budget.n1, resource_optima(1.0, 2 * math.pi, 4096, Regime.SQL).n1)
        self.assertLessEqual(budget.N, 4096)

    def test_ps_heisenberg_gives_each_site_a_full_cascade_level(self):
        config = make_config(regime=Regime.HEISENBERG, grid_size=1024)
        n0 = entanglement_depth(config, 2**14)
        budget = ps_budget(config, 2**14)
        self.assertEqual(n0, 2)
        self.assertEqual(budget.n2, kitaev_particles(n0))
        self.assertEqual(kitaev_depth(budget.n2), n0)
        self.assertLessEqual(budget.n1, 1024 // 4)

    def test_entanglement_depth_is_anchored_at_heisenberg_sites(self):
        config = make_config(regime=Regime.HEISENBERG)
        anchor = 16 * kitaev_particles(0)
        self.assertEqual(entanglement_depth(config, anchor - 1), 0)
        self.assertEqual(entanglement_depth(config, 4 * anchor + 1), 1)
        wider = make_config(regime=Regime.HEISENBERG, heisenberg_sites=64)
        self.assertEqual(entanglement_depth(wider, 4 * anchor + 1), 0)

    def test_heisenberg_depth_follows_entanglement_law(self):
        n_values = [2**e for e in range(10, 21)]
        for q, M, deepest in ((1.0, 2 * math.pi, 5), (0.5, 1.0, 3)):
            with self.subTest(q=q):
                ps = make_config(regime=Regime.HEISENBERG, q=q, M=M)
                ws = replace(ps, method=Method.WS)
                ps_depths = [kitaev_depth(ps_budget(ps, N).n2) for N in n_values]
                ws_depths = [int(math.log2(ws_budget(ws, N).n_p)) for N in n_values]
                self.assertEqual(ps_depths, ws_depths)
                self.assertEqual(ps_depths[0], 0)
                self.assertEqual(ps_depths[-1], deepest)
                slope = np.polyfit(np.log(n_values), np.log(2.0 ** np.array(ps_depths)), 1)[0]
                self.assertAlmostEqual(slope, q / (q + 1), delta=0.05)

    def test_ws_sql_split(self):
        config = make_config(method=Method.WS, grid_size=1024)
        budget = ws_budget(config, 4096)
        self.assertEqual(budget.n_p, 1)
        self.assertEqual(budget.n_c, 4096)
        self.assertGreaterEqual(4096, 8 * (2 * budget.K + 1))

    def test_ws_heisenberg_split(self):
        config = make_config(method=Method.WS, regime=Regime.HEISENBERG, grid_size=1024)
        for N in (2**12, 2**16, 2**20):
            budget = ws_budget(config, N)
            n0 = int(math.log2(budget.n_p))
            self.assertEqual(2**n0, budget.n_p)
            self.assertEqual(n0, entanglement_depth(config, N))
            self.assertGreaterEqual(budget.K, 2 * budget.n_p)
            self.assertGreaterEqual(budget.n_c, COPIES_PER_MODE * (2 * budget.K + 1))
            self.assertLessEqual(budget.n_c * cascade_weight(n0, config.constants), N)

    def test_cascade_weight(self):
        self.assertEqual(cascade_weight(0, KitaevConstants()), 3)
        self.assertEqual(cascade_weight(1, KitaevConstants()), 6 + 2 * 3)


class SweepTests(SimpleTestCase):
    def small_config(self, **overrides) -> ExperimentConfig:
        return make_config(n_list=(256, 1024), trials=3, grid_size=256, **overrides)

    def test_records_are_in_n_major_order(self):
        records = run_sweep(self.small_config())
        self.assertEqual([(r.N, r.trial) for r in records],
                         [(N, t) for N in (256, 1024) for t in range(3)])
        self.assertTrue(all(r.estimate is None for r in records))

    def test_worker_count_does_not_change_records(self):
        serial = run_sweep(self.small_config())
        parallel = run_sweep(self.small_config(workers=2))
        self.assertEqual(serial, parallel)

    def test_fixed_target_mode_shares_targets_across_trials(self):
        from phase_app.harness import draw_target

        config = self.small_config(target_mode="fixed")
        np.testing.assert_array_equal(draw_target(config, 256, 0).values, draw_target(config, 256, 2).values)
        fresh = self.small_config()
        self.assertFalse(np.array_equal(draw_target(fresh, 256, 0).values, draw_target(fresh, 256, 2).values))

    def test_real_records_respect_sql_floor(self):
        records = run_sweep(self.small_config())
        report = check_bounds(records, bound_reports_for(records))
        self.assertTrue(report.passed, report.table())
        self.assertIn("PASS", report.table())

    def test_records_over_the_particle_limit_are_flagged(self):
        # c4 = 0.01 puts the limit 2*c4*c5*c6*N below the N particles a Ramsey split spends
        config = self.small_config(constants=KitaevConstants(c4=0.01))
        record = run_trial(config, 256, 0)
        self.assertGreater(record.particles_used, 0.24 * 256)
        self.assertIn(BUDGET_EXCEEDED, record.flags)
        self.assertTrue(record.flagged)
        self.assertNotIn(BUDGET_EXCEEDED, run_trial(self.small_config(), 256, 0).flags)


class ScalingFitTests(SimpleTestCase):
    N_VALUES = (1024, 2048, 4096, 8192, 16384)

    def test_exact_power_law_is_recovered(self):
        fit = fit_scaling(synthetic_records(self.N_VALUES, lambda N: 2.0 * N ** (-1 / 3)), label="exact")
        self.assertAlmostEqual(fit.exponent, -1 / 3, places=10)
        self.assertAlmostEqual(fit.exponent_sq, -2 / 3, places=10)
        self.assertAlmostEqual(fit.intercept, math.log(2.0), places=10)
        self.assertAlmostEqual(fit.standard_error, 0.0, places=12)
        self.assertEqual(fit.n_window, self.N_VALUES)

    def test_heavily_flagged_n_is_excluded(self):
        records = synthetic_records(self.N_VALUES, lambda N: N ** -0.5, flagged={2048: 2, 4096: 0})
        fit = fit_scaling(records)
        self.assertEqual(fit.excluded, (2048,))
        self.assertNotIn(2048, fit.n_window)
        self.assertAlmostEqual(fit.exponent, -0.5, places=10)

    def test_too_few_n_values_raise(self):
        with self.assertRaises(InsufficientDataError):
            fit_scaling(synthetic_records(self.N_VALUES[:3], lambda N: N ** -0.5))

    def test_fewer_than_thirty_trials_per_n_raise(self):
        records = synthetic_records(self.N_VALUES, lambda N: N ** -0.5, trials=29)
        with self.assertRaises(InsufficientDataError):
            fit_scaling(records)
        self.assertAlmostEqual(fit_scaling(records, min_trials=29).exponent, -0.5, places=10)

    def test_flagged_trials_count_towards_the_minimum(self):
        records = synthetic_records(self.N_VALUES, lambda N: N ** -0.5, flagged={4096: 1})
        fit = fit_scaling(records)
        self.assertIn(4096, fit.n_window)
        self.assertEqual(dict((p.N, p.trials) for p in fit.points)[4096], 29)

    def test_group_selects_matching_records(self):
        records = synthetic_records(self.N_VALUES, lambda N: N ** -0.5)
        with self.assertRaises(InsufficientDataError):
            fit_scaling(records, group={"method": Method.WS})

    def test_fits_round_trip_through_json(self):
        fit = fit_scaling(synthetic_records(self.N_VALUES, lambda N: N ** -0.25), label="quarter")
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "fits.json"
            write_fits([fit], path)
            self.assertEqual(read_fits(path), [fit])
            points = Path(tmp) / "points.csv"
            write_fit_points([fit], points)
            self.assertEqual(len(points.read_text().strip().splitlines()), 1 + len(self.N_VALUES))


class BoundCheckTests(SimpleTestCase):
    N_VALUES = (1024, 2048, 4096, 8192)

    def test_large_errors_pass_and_shrunken_errors_fail(self):
        records = synthetic_records(self.N_VALUES, lambda N: 1.0)
        reports = bound_reports_for(records)
        self.assertTrue(check_bounds(records, reports).passed)
        shrunk = check_bounds(scaled_records(records, 1000.0), reports)
        self.assertFalse(shrunk.passed)
        self.assertTrue(all(not row.passed for row in shrunk.rows))

    def test_single_report_checks_one_n(self):
        records = synthetic_records(self.N_VALUES, lambda N: 1.0)
        report = bound_reports_for(records)[2048]
        self.assertEqual([row.N for row in check_bounds(records, report).rows], [2048])


class RecordFileTests(SimpleTestCase):
    def test_csv_round_trip(self):
        records = synthetic_records((256, 512), lambda N: 0.1, trials=2, flagged={512: 1})
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "records.csv"
            write_records(records, path)
            loaded = read_records(path)
        self.assertEqual(loaded[:2], records[:2])
        self.assertEqual(loaded[3], records[3])
        self.assertEqual(loaded[2].flags, (PRECONDITION_FAILED,))
        self.assertTrue(math.isnan(loaded[2].mspe))


class QuickAcceptanceTests(SimpleTestCase):
    def test_static_checks_pass(self):
        results = run_acceptance(QUICK, only=["kernels", "qfi", "sufficiency"])
        self.assertEqual(len(results), 8)
        for result in results:
            self.assertTrue(result.passed, f"{result.name}: {result.detail}")

    def test_bounds_check_runs_its_own_sweeps(self):
        tiny = Scale("tiny", 256, (1024, 2048, 4096, 8192), 3, 3, 1, 1, 1, 1, 0.10, 0.14)
        results = run_acceptance(tiny, only=["bounds"])
        sweep_rows = [r for r in results if r.name.startswith("bounds hold for")]
        self.assertEqual(len(sweep_rows), len(SCALING_SWEEPS))
        self.assertIn("bounds hold for PS-Heisenberg q=0.5", [r.name for r in sweep_rows])
        for result in results:
            self.assertTrue(result.passed, f"{result.name}: {result.detail}")

    def test_quick_scaling_checks_pass(self):
        results = run_acceptance(QUICK, only=["ps-sql", "ps-heisenberg", "ws-ps"])
        names = [r.name for r in results]
        self.assertIn("PS-Heisenberg scaling, q=0.5", names)
        self.assertIn("WS/PS Heisenberg exponents agree, q=0.5", names)
        self.assertEqual(len(results), 1 + 3 + 4)
        for result in results:
            self.assertTrue(result.passed, f"{result.name}: {result.detail}")
