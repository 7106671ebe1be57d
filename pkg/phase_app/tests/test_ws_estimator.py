import math

import numpy as np
from django.test import SimpleTestCase

from phase_app.exceptions import PreconditionError, RestrictionError, TomographyError
from phase_app.function_model import GridFunction, SmoothnessClass, sample_target
from phase_app.probe_sim import KitaevConstants, ProbeBudget, repeats_at_level
from phase_app.records import INFIDELITY_CHAIN_VIOLATED, KITAEV_DEGRADED, Method, Regime
from phase_app.ws_estimator import (
    COPIES_PER_MODE,
    WavefunctionState,
    full_band,
    grid_overlap,
    infidelity_chain,
    output_state,
    project_low_wavenumber,
    readout_phase,
    simulate_tomography,
    state_overlap,
    ws_estimate,
)

Q1 = SmoothnessClass(1.0, 2 * math.pi)


def smooth_target(seed: int, G: int = 512) -> GridFunction:
    return sample_target(Q1, G, amplitude_cap=1.0, seed=seed)


class OutputStateTests(SimpleTestCase):
    def test_full_band_state_is_normalised(self):
        target = smooth_target(1)
        state = output_state(target, 1, full_band(target.grid_size))
        self.assertAlmostEqual(state.norm, 1.0, delta=1e-10)
        self.assertAlmostEqual(abs(state.vacuum_reference) ** 2, 0.5)

    def test_self_overlap_matches_grid_overlap(self):
        target = smooth_target(2)
        state = output_state(target, 2, full_band(target.grid_size))
        self.assertAlmostEqual(abs(state_overlap(state, state)), 1.0, delta=1e-10)
        self.assertAlmostEqual(grid_overlap(target, target, 2), 1.0)

    def test_readout_recovers_phase_from_exact_state(self):
        target = smooth_target(3)
        state = output_state(target, 1, full_band(target.grid_size))
        phase = readout_phase(state, target.grid_size)
        np.testing.assert_allclose(np.angle(np.exp(1j * (phase - target.values))), 0.0, atol=1e-8)

    def test_mismatched_branches_are_rejected(self):
        with self.assertRaises(PreconditionError):
            WavefunctionState(np.zeros(3), np.zeros(5), 1)


class ProjectionTests(SimpleTestCase):
    def test_postselection_error_follows_probability(self):
        target = smooth_target(4)
        state = output_state(target, 1, full_band(target.grid_size))
        projection = project_low_wavenumber(state, 6)
        self.assertGreaterEqual(projection.probability, 0.5)
        self.assertAlmostEqual(projection.state.norm, 1.0, places=12)
        self.assertAlmostEqual(projection.delta_ps_sq, np.pi**2 * (1 - projection.probability), delta=1e-9)

    def test_wider_cutoff_loses_less(self):
        target = smooth_target(5)
        state = output_state(target, 1, full_band(target.grid_size))
        _, narrow = project_low_wavenumber(state, 2)
        _, wide = project_low_wavenumber(state, 20)
        self.assertLessEqual(wide, narrow)

    def test_cutoff_beyond_band_raises(self):
        state = output_state(smooth_target(6, 64), 1, 8)
        with self.assertRaises(PreconditionError):
            project_low_wavenumber(state, 9)


class TomographyTests(SimpleTestCase):
    def test_many_copies_give_high_fidelity(self):
        target = smooth_target(7)
        state = output_state(target, 1, full_band(target.grid_size))
        postselected, _ = project_low_wavenumber(state, 4)
        reconstructed = simulate_tomography(postselected, 4, 400_000, seed=1)
        self.assertAlmostEqual(reconstructed.norm, 1.0, places=12)
        self.assertGreater(abs(state_overlap(postselected, reconstructed)) ** 2, 0.999)

    def test_infidelity_grows_with_cutoff(self):
        target = smooth_target(8)
        state = output_state(target, 1, full_band(target.grid_size))

        def infidelity(K):
            postselected, _ = project_low_wavenumber(state, K)
            losses = [1 - abs(state_overlap(postselected, simulate_tomography(postselected, K, 20_000, seed=s))) ** 2
                      for s in range(8)]
            return np.mean(losses)

        self.assertLess(infidelity(2), infidelity(40))

    def test_too_few_copies_raise(self):
        state = output_state(smooth_target(9, 64), 1, 8)
        postselected, _ = project_low_wavenumber(state, 4)
        with self.assertRaises(TomographyError):
            simulate_tomography(postselected, 4, COPIES_PER_MODE * 9 - 1)

    def test_same_seed_same_reconstruction(self):
        state = output_state(smooth_target(10, 128), 1, 20)
        postselected, _ = project_low_wavenumber(state, 5)
        a = simulate_tomography(postselected, 5, 5000, seed=3)
        b = simulate_tomography(postselected, 5, 5000, seed=3)
        np.testing.assert_array_equal(a.amp_excited, b.amp_excited)


class InfidelityChainTests(SimpleTestCase):
    def test_chain_holds_on_random_triples(self):
        rng = np.random.default_rng(0)
        G = 256
        for _ in range(30):
            phi = sample_target(Q1, G, seed=rng)
            phi_tilde = GridFunction(phi.values + rng.normal(0.0, rng.uniform(0.0, 2.0), G))
            n_p = int(rng.choice([1, 2, 4]))
            projection = project_low_wavenumber(output_state(phi, n_p, full_band(G)), int(rng.integers(1, 32)))
            chain = infidelity_chain(phi, phi_tilde, projection, n_p)
            self.assertTrue(chain.holds, (chain.first_slack, chain.second_slack))

    def test_exact_estimate_has_no_error(self):
        phi = smooth_target(11, 256)
        projection = project_low_wavenumber(output_state(phi, 1, full_band(256)), full_band(256))
        chain = infidelity_chain(phi, phi, projection, 1)
        self.assertAlmostEqual(chain.delta_sq, 0.0)
        self.assertAlmostEqual(chain.fidelity_bound, 0.0, places=12)


class WSEstimateTests(SimpleTestCase):
    def test_sql_record(self):
        target = smooth_target(12)
        budget = ProbeBudget.wavenumber_state(1, 8192, 10)
        record = ws_estimate(target, budget, Q1, 5)
        self.assertIs(record.method, Method.WS)
        self.assertIs(record.regime, Regime.SQL)
        self.assertEqual(record.particles_used, 8192)
        self.assertGreater(record.err_a_sq, 0.0)
        self.assertNotIn(INFIDELITY_CHAIN_VIOLATED, record.flags)
        self.assertLess(record.mspe, 0.5)

    def test_entangled_cascade_accounting(self):
        target = smooth_target(13)
        budget = ProbeBudget.wavenumber_state(2, 2048, 8)
        record = ws_estimate(target, budget, Q1, 5)
        constants = KitaevConstants()
        expected = sum(2**n * 2048 * repeats_at_level(n, 1, constants) for n in range(2))
        self.assertIs(record.regime, Regime.HEISENBERG)
        self.assertEqual(record.particles_used, expected)

    def test_entangled_regime_at_depth_zero_takes_repeated_readouts(self):
        target = smooth_target(14)
        budget = ProbeBudget.wavenumber_state(1, 1024, 6)
        record = ws_estimate(target, budget, Q1, 5, regime=Regime.HEISENBERG)
        self.assertIs(record.regime, Regime.HEISENBERG)
        self.assertEqual(record.particles_used, 1024 * repeats_at_level(0, 0, KitaevConstants()))
        self.assertNotIn(KITAEV_DEGRADED, record.flags)
        self.assertEqual(ws_estimate(target, budget, Q1, 5).particles_used, 1024)

    def test_smoother_classes_are_refused(self):
        cls = SmoothnessClass(2.0, 2 * math.pi)
        target = sample_target(cls, 256, seed=1)
        with self.assertRaises(RestrictionError):
            ws_estimate(target, ProbeBudget.wavenumber_state(1, 1024, 4), cls, 0)

    def test_entanglement_must_be_power_of_two(self):
        with self.assertRaises(PreconditionError):
            ws_estimate(smooth_target(14), ProbeBudget.wavenumber_state(3, 1024, 4), Q1, 0)

    def test_position_budget_is_rejected(self):
        with self.assertRaises(PreconditionError):
            ws_estimate(smooth_target(14), ProbeBudget.position_state(4, 256), Q1, 0)
