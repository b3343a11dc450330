# test_field_solver.py - Grid setup, seeding, stepping and diagnostics of the potential solver
import math
import os
import sys
import unittest
from dataclasses import replace

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from fields.errors import (
    BadResolution,
    InsufficientHistory,
    PeriodMismatch,
    StabilityViolation,
    ZeroAcceleration,
)
from fields.field_solver import (
    bulk_growth_rates,
    cfl_max_dt,
    diagnostics,
    init_grid,
    quad_energy,
    reconstruct_fields,
    seed_analytic_mode,
    seed_pulse,
    step,
    surface_trace,
)
from fields.model_core import ModelParams, steady_A, steady_B
from fields.wave_analysis import build_mode, evaluate_fields, growth_profile, surface_elevation

G = 1.0 / (2.0 * math.sqrt(1.4))
MATCHED = ModelParams(A0=1, B0=2, a1=6, a2=-0.5, b=1, d=-1, X=8, g_y=G, h_y=4 * G)
TWO_PI = 2.0 * math.pi


def seeded(n=64, amplitude=1e-3):
    state = init_grid(MATCHED, n, n, TWO_PI)
    mode = build_mode(MATCHED, 1.0, 1.0)
    return seed_analytic_mode(state, mode, amplitude), mode


def advance(state, dt, n_steps):
    for _ in range(n_steps):
        state = step(state, dt)
    return state


class GridSetupTests(unittest.TestCase):
    """Zeroed grids, resolution checks and seeding"""

    def test_zeroed_state(self):
        state = init_grid(MATCHED, 16, 16, MATCHED.X)
        self.assertEqual(state.t, 0.0)
        self.assertEqual(state.steps, 0)
        self.assertEqual(state.phi.shape, (17, 17))
        self.assertFalse(state.stacked.any())
        self.assertEqual(state.h, (0.5, 0.5))

    def test_spacing_per_axis(self):
        state = init_grid(MATCHED, 32, 16, TWO_PI)
        self.assertAlmostEqual(state.h_x, TWO_PI / 32, places=15)
        self.assertEqual(state.h_y, 0.5)

    def test_bad_resolution(self):
        with self.assertRaises(BadResolution):
            init_grid(MATCHED, 4, 16, MATCHED.X)
        with self.assertRaises(BadResolution):
            init_grid(MATCHED, 16, 16, 0.0)
        with self.assertRaises(BadResolution):
            init_grid(MATCHED, 16, 16, MATCHED.X, sponge_cells=16)

    def test_surface_needs_acceleration(self):
        with self.assertRaises(ZeroAcceleration):
            init_grid(MATCHED.with_updates(g_y=0.0), 16, 16, MATCHED.X)

    def test_zero_amplitude_seed(self):
        state, _ = seeded(n=16, amplitude=0.0)
        self.assertFalse(state.stacked.any())

    def test_seed_on_the_border(self):
        state, mode = seeded(n=16, amplitude=0.5)
        x, _ = state.nodes()
        np.testing.assert_allclose(state.phi[:, -1], 0.5 * np.cos(x[:, -1]), rtol=0, atol=1e-15)
        np.testing.assert_allclose(state.psi, state.phi, rtol=1e-12, atol=1e-18)
        np.testing.assert_allclose(state.phi_t[:, -1], 0.5 * mode.omega * np.sin(x[:, -1]), rtol=0, atol=1e-15)

    def test_period_mismatch(self):
        state = init_grid(MATCHED, 16, 16, 5.0)
        with self.assertRaises(PeriodMismatch):
            seed_analytic_mode(state, build_mode(MATCHED, 1.0, 1.0), 1.0)

    def test_pulse_is_at_rest_and_clamped(self):
        state = seed_pulse(init_grid(MATCHED, 32, 32, TWO_PI), (0.0, 4.0), 0.5, 1e-3)
        self.assertFalse(state.phi_t.any())
        self.assertFalse(state.phi[:, 0].any())
        np.testing.assert_array_equal(state.phi, state.psi)
        self.assertAlmostEqual(state.phi[0, 16], 1e-3, places=15)
        self.assertAlmostEqual(state.phi[1, 16], state.phi[31, 16], places=15)
        with self.assertRaises(BadResolution):
            seed_pulse(state, (0.0, 4.0), 0.0, 1.0)


class StabilityBoundTests(unittest.TestCase):

    def test_symmetric_speed(self):
        sigma = 3.0
        params = ModelParams(A0=1, B0=1, a1=sigma, a2=-sigma, b=1, d=-1)
        spectrum = bulk_growth_rates(params)
        self.assertAlmostEqual(spectrum.c_max, (sigma ** 2 + 1) ** 0.25, places=12)
        self.assertFalse(spectrum.is_hyperbolic)

    def test_matched_speed(self):
        self.assertAlmostEqual(bulk_growth_rates(MATCHED).c_max, math.sqrt(2.5), places=12)

    def test_doubling_h_doubles_dt(self):
        fine = init_grid(MATCHED, 32, 32, MATCHED.X)
        coarse = init_grid(MATCHED, 16, 16, MATCHED.X)
        self.assertAlmostEqual(cfl_max_dt(coarse) / cfl_max_dt(fine), 2.0, places=12)

    @settings(max_examples=1000, deadline=None)
    @given(
        A0=st.floats(0.05, 20), B0=st.floats(0.05, 20), a1=st.floats(0.05, 20),
        a2=st.floats(0.05, 20), b=st.floats(0.05, 20), d=st.floats(0.05, 20),
    )
    def test_speed_is_positive(self, A0, B0, a1, a2, b, d):
        params = ModelParams(A0=A0, B0=B0, a1=a1, a2=-a2, b=b, d=-d)
        self.assertGreater(bulk_growth_rates(params).c_max, 0.0)

    def test_step_above_bound(self):
        state, _ = seeded(n=16)
        with self.assertRaises(StabilityViolation):
            step(state, 2.0 * cfl_max_dt(state))


class SteppingTests(unittest.TestCase):

    def test_zero_is_a_fixed_point(self):
        state = init_grid(MATCHED, 16, 16, TWO_PI)
        state = advance(state, cfl_max_dt(state), 5)
        self.assertFalse(state.stacked.any())
        self.assertEqual(state.steps, 5)

    def test_linearity(self):
        mode_state, _ = seeded(n=32, amplitude=1e-3)
        pulse_state = seed_pulse(init_grid(MATCHED, 32, 32, TWO_PI), (math.pi, 4.0), 0.7, 2e-3)
        combined = mode_state.with_arrays(*(2.0 * mode_state.stacked - 3.0 * pulse_state.stacked))
        dt = 0.5 * cfl_max_dt(mode_state)
        expected = 2.0 * step(mode_state, dt).stacked - 3.0 * step(pulse_state, dt).stacked
        result = step(combined, dt).stacked
        np.testing.assert_allclose(result, expected, rtol=0, atol=1e-12 * np.max(np.abs(expected)))

    def test_short_horizon_tracks_travelling_wave(self):
        amplitude = 1e-3
        state, mode = seeded(n=64, amplitude=amplitude)
        initial = state
        final = advance(state, 0.1 * cfl_max_dt(state), 20)
        exact = seed_analytic_mode(replace(initial, t=final.t), mode, amplitude)
        error = np.max(np.abs(final.phi - exact.phi))
        moved = np.max(np.abs(exact.phi - initial.phi))
        self.assertGreater(moved, 2e-2 * amplitude)
        self.assertLess(error, 5e-3 * amplitude)
        self.assertLess(np.max(np.abs(final.psi - exact.psi)), 5e-3 * amplitude)

    def test_reversal_returns_to_start(self):
        amplitude = 1e-3
        initial, mode = seeded(n=64, amplitude=amplitude)
        dt = 0.1 * cfl_max_dt(initial)
        forward = advance(initial, dt, 20)
        exact = seed_analytic_mode(replace(initial, t=forward.t), mode, amplitude)
        one_way = np.max(np.abs(forward.stacked - exact.stacked))
        back = advance(forward, -dt, 20)
        self.assertAlmostEqual(back.t, 0.0, places=12)
        self.assertLess(np.max(np.abs(back.stacked - initial.stacked)), 10.0 * one_way)

    def test_sponge_damps_rates_near_bottom(self):
        state = seed_pulse(init_grid(MATCHED, 16, 16, TWO_PI, sponge_cells=8, sponge_strength=5.0),
                           (math.pi, 2.0), 0.5, 1e-3)
        free = seed_pulse(init_grid(MATCHED, 16, 16, TWO_PI), (math.pi, 2.0), 0.5, 1e-3)
        dt = 0.5 * cfl_max_dt(state)
        damped, undamped = advance(state, dt, 3), advance(free, dt, 3)
        self.assertFalse(np.array_equal(damped.phi_t[:, 1:8], undamped.phi_t[:, 1:8]))
        np.testing.assert_array_equal(damped.phi[:, 0], 0.0)


class ReconstructionTests(unittest.TestCase):

    def test_zero_state_is_steady(self):
        params = MATCHED.with_updates(h_x=0.1, g_x=-0.3)
        state = init_grid(params, 16, 16, params.X)
        a, b = reconstruct_fields(state)
        x, y = state.nodes()
        np.testing.assert_array_equal(a, steady_A(params, x, y))
        np.testing.assert_array_equal(b, steady_B(params, x, y))

    def test_seed_matches_closed_form(self):
        state, mode = seeded(n=32, amplitude=1.0)
        a, b = reconstruct_fields(state)
        x, y = state.nodes()
        exact_a, exact_b = evaluate_fields(mode, MATCHED, 0.0, x, y, check_domain=False)
        np.testing.assert_allclose(a, exact_a, rtol=0, atol=1e-12)
        np.testing.assert_allclose(b, exact_b, rtol=0, atol=1e-12)

    def test_growth_pair_interior_amplification(self):
        s1 = 2.4390508
        params = ModelParams(A0=1, B0=1, a1=10, a2=-0.1, b=1, d=-1, X=8)
        roots_params = params.with_updates(g_y=2.0 / s1, h_y=2.0 / s1)
        mode = build_mode(roots_params, 1.0, 1.0, 'growth_pair')
        state = seed_analytic_mode(init_grid(roots_params, 32, 128, TWO_PI), mode, 1e-3)
        a, _ = reconstruct_fields(state)
        x, y = state.nodes()
        wave = np.abs(a - steady_A(roots_params, x, y))
        ratio = np.max(wave[:, 112]) / np.max(wave[:, 128])
        self.assertEqual(y[0, 112], 7.0)
        expected = growth_profile(mode, [1.0])[0]
        self.assertLess(abs(ratio - expected) / expected, 0.01)
        self.assertAlmostEqual(ratio, 2.932, delta=0.03)


class SurfaceTraceTests(unittest.TestCase):

    def test_undisturbed_border(self):
        state = init_grid(MATCHED, 16, 16, TWO_PI)
        np.testing.assert_array_equal(surface_trace(state), MATCHED.X)

    def test_seeded_trace_matches_sinusoid(self):
        state, mode = seeded(n=32, amplitude=1.0)
        x, _ = state.nodes()
        expected = surface_elevation(mode, MATCHED, 0.0, x[:, -1])
        np.testing.assert_allclose(surface_trace(state), expected, rtol=0, atol=1e-9)

    def test_zero_acceleration(self):
        state = init_grid(MATCHED.with_updates(h_y=0.0, g_y=0.5), 16, 16, TWO_PI)
        with self.assertRaises(ZeroAcceleration):
            surface_trace(state)


class DiagnosticsTests(unittest.TestCase):

    def test_needs_two_steps(self):
        state, _ = seeded(n=16)
        dt = 0.5 * cfl_max_dt(state)
        with self.assertRaises(InsufficientHistory):
            diagnostics(state)
        with self.assertRaises(InsufficientHistory):
            diagnostics(step(state, dt))
        self.assertEqual(len(advance(state, dt, 2).history), 2)

    def test_zero_state(self):
        state = init_grid(MATCHED, 16, 16, TWO_PI)
        report = diagnostics(advance(state, cfl_max_dt(state), 3))
        self.assertEqual(report.residual_A, 0.0)
        self.assertEqual(report.residual_B, 0.0)
        self.assertEqual(report.quad_energy, 0.0)
        self.assertEqual(report.max_amplitude, 0.0)

    def test_seeded_residuals_are_small(self):
        amplitude = 1e-3
        state, _ = seeded(n=64, amplitude=amplitude)
        dt = 0.1 * cfl_max_dt(state)
        report = diagnostics(advance(state, dt, 10))
        self.assertAlmostEqual(report.t, 9 * dt, places=12)
        self.assertGreaterEqual(report.residual_A, 0.0)
        self.assertLess(report.residual_A, 1e-3 * amplitude)
        self.assertLess(report.residual_B, 1e-3 * amplitude)
        self.assertGreater(report.max_amplitude, 0.5 * amplitude)

    def test_energy_is_positive_for_seeded_mode(self):
        state, _ = seeded(n=32)
        self.assertGreater(quad_energy(state), 0.0)


if __name__ == '__main__':
    unittest.main()
