import math
import os
import sys
import unittest
from dataclasses import replace

import numpy as np

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '../src')))

from tcsl import analysis
from tcsl.core import FieldState, MediumParams, builtin_scenario, default_scenario
from tcsl.errors import ComparisonError, ContainmentError


def short_ramp(s, ramp_time=0.001):
    return s.replace(schedule=replace(s.schedule, ramp_time=ramp_time))


class TestEnvelopeGeometry(unittest.TestCase):

    def setUp(self):
        self.s = default_scenario()

    def test_separation(self):
        d = analysis.separation_D(self.s.medium)
        self.assertAlmostEqual(d.real, 0.2)
        self.assertAlmostEqual(d.imag, 0.0)

    def test_offsets_differ_by_separation(self):
        for t in (6.0, 8.0):
            z_plus = analysis.centroid_offset(t, self.s, "+")
            z_minus = analysis.centroid_offset(t, self.s, "-")
            self.assertAlmostEqual(z_plus - z_minus, analysis.separation_D(self.s.medium))

    def test_no_offset_before_trap(self):
        self.assertEqual(analysis.centroid_offset(self.s.t_o, self.s, "+"), 0)

    def test_symmetric_trap_offsets(self):
        self.assertAlmostEqual(analysis.centroid_offset(8.0, self.s, "+").real, 0.1)
        self.assertAlmostEqual(analysis.centroid_offset(8.0, self.s, "-").real, -0.1)

    def test_transport_during_ramp(self):
        # v falls from 1 to 0 over the ramp; the mean of (1 − sin⁴) over it is 5/8
        self.assertAlmostEqual(analysis.transport_distance(7.5, self.s), 0.25 * 5.0 / 8.0, places=6)

    def test_transport_before_t_o(self):
        self.assertAlmostEqual(analysis.transport_distance(3.0, self.s), -2.0, places=9)

    def test_centroid_is_stationary_in_trap(self):
        self.assertAlmostEqual(analysis.centroid_z(7.0, self.s, "+"), analysis.centroid_z(9.0, self.s, "+"))


class TestWidth(unittest.TestCase):

    def test_closed_form_symmetric_width(self):
        self.assertAlmostEqual(analysis.width_l(10.0, default_scenario(), closed_form=True),
                               math.sqrt(3.0))

    def test_width_before_trap(self):
        s = default_scenario()
        self.assertEqual(analysis.width_l(4.0, s), s.l_o)

    def test_quadrature_matches_closed_form_with_short_ramp(self):
        s = short_ramp(default_scenario())
        self.assertAlmostEqual(analysis.width_l(10.0, s), math.sqrt(3.0), delta=1e-2)

    def test_ramps_slow_the_broadening(self):
        s = default_scenario()
        self.assertLess(analysis.width_l(10.0, s), analysis.width_l(10.0, s, closed_form=True))

    def test_asymmetric_detuning_broadens_more(self):
        s = short_ramp(default_scenario())
        medium = MediumParams.with_detuning(1000.0, "equal", gamma3=1000.0, gamma2=0.0, ng2=1.0e7,
                                            c=1000.0, k_o=0.01, length_L=10.0)
        asymmetric = s.replace(medium=medium)
        self.assertGreater(analysis.width_l(10.0, asymmetric), analysis.width_l(10.0, s))
        self.assertAlmostEqual(analysis.complex_width_squared(10.0, asymmetric), 3.0 - 2.0j, delta=0.02)

    def test_measured_width_of_real_l_squared(self):
        s = short_ramp(default_scenario())
        self.assertAlmostEqual(analysis.measured_width(10.0, s), analysis.width_l(10.0, s), places=6)

    def test_envelope_at_t_o(self):
        s = default_scenario()
        z = s.grid.z(s.medium.length_L)
        envelope = analysis.gaussian_envelope(s.t_o, z, s, "+")
        np.testing.assert_allclose(envelope, np.exp(-0.5 * (z - 5.0) ** 2), atol=1e-12)
        self.assertFalse(np.any(analysis.gaussian_envelope(s.t_o, z, s, "-")))


class TestConversion(unittest.TestCase):

    def test_symmetric_probability(self):
        s = default_scenario()
        self.assertAlmostEqual(analysis.conversion_probability(10.0, 5.0, s), 3.0 ** -0.5)

    def test_no_trap_no_loss(self):
        s = default_scenario()
        self.assertAlmostEqual(analysis.conversion_probability(5.0, 5.0, s), 1.0)

    def test_ground_decay_rate_variant(self):
        s = builtin_scenario("fig3-decay")
        p = analysis.conversion_probability(10.0, 5.0, s, rate="gamma2")
        self.assertAlmostEqual(p, 1.0 / math.sqrt(1.0 + 4.0 * 0.01 * 5.0 / 10.0))
        with self.assertRaises(ValueError):
            analysis.conversion_probability(10.0, 5.0, s, rate="other")

    def test_long_decay_warns(self):
        s = builtin_scenario("fig3-decay")
        with self.assertLogs("tcsl.analysis", level="WARNING"):
            analysis.conversion_probability(20.0, 5.0, s)


class TestPulseAreas(unittest.TestCase):

    def setUp(self):
        self.z = np.linspace(0.0, 20.0, 2001)

    def test_gaussian_area(self):
        values = 0.5 * np.exp(-0.5 * ((self.z - 10.0) / 1.5) ** 2)
        theta = analysis.pulse_area(values, self.z, 2.0)
        self.assertAlmostEqual(theta.real, 0.5 * math.sqrt(2 * math.pi) * 1.5 / 2.0, places=8)

    def test_zero_field(self):
        self.assertEqual(analysis.pulse_area(np.zeros(self.z.size), self.z, 1.0), 0)

    def test_clipped_pulse(self):
        values = np.exp(-0.5 * (self.z - 1.0) ** 2)
        with self.assertRaises(ContainmentError):
            analysis.pulse_area(values, self.z, 1.0)

    def test_plane_and_snapshot_routes_agree(self):
        v = 1.0
        times = np.linspace(0.0, 20.0, 4001)
        series = np.exp(-0.5 * (v * (times - 10.0)) ** 2)
        snapshot = np.exp(-0.5 * ((self.z - 10.0) / 1.0) ** 2)
        self.assertAlmostEqual(abs(analysis.pulse_area_at_plane(series, times)),
                               abs(analysis.pulse_area(snapshot, self.z, v)), places=6)

    def test_conserved_area_without_decay(self):
        s = builtin_scenario("fig3")
        self.assertAlmostEqual(abs(analysis.area_ratio_prediction(12.0, s)), 1.0)

    def test_decayed_area(self):
        s = builtin_scenario("fig3-decay")
        ratio = abs(analysis.area_ratio_prediction(15.0, s))
        self.assertAlmostEqual(ratio / math.exp(-0.1), 1.0, delta=1e-3)

    def test_no_decay_before_loading(self):
        s = builtin_scenario("fig3-decay")
        early = abs(analysis.area_ratio_prediction(s.t_o - 2.0, s))
        self.assertEqual(early, abs(analysis.area_ratio_prediction(s.t_o, s)))
        self.assertAlmostEqual(early, 1.0, delta=1e-3)

    def test_trap_phase_routes_agree(self):
        s = short_ramp(default_scenario())
        for branch in ("+", "-"):
            with self.subTest(branch=branch):
                closed = analysis.trap_phase_closed_form(s, branch)
                quad = analysis.trap_phase_quadrature(s, branch)
                self.assertAlmostEqual(abs(quad - closed) / abs(closed), 0.0, delta=1e-3)

    def test_trap_phase_magnitude(self):
        eps = analysis.trap_phase_closed_form(default_scenario(), "+")
        # −2·k_o·v_o·(t_1 − t_o) for balanced controls
        self.assertAlmostEqual(eps.real, -0.1, delta=1e-3)


class TestObservables(unittest.TestCase):

    def test_correlation_identities(self):
        a = np.array([1.0 + 2.0j, -0.5j])
        b = np.array([0.3 - 1.0j, 2.0])
        np.testing.assert_allclose(analysis.first_order_correlation(a, a), np.abs(a) ** 2)
        np.testing.assert_allclose(analysis.first_order_correlation(a, b),
                                   np.conj(analysis.first_order_correlation(b, a)))

    def test_intensity_moments(self):
        z = np.linspace(0.0, 20.0, 4001)
        centroid, width = analysis.intensity_moments(np.exp(-((z - 8.0) / 1.3) ** 2), z)
        self.assertAlmostEqual(centroid, 8.0, places=9)
        self.assertAlmostEqual(width, 1.3, places=6)

    def test_empty_profile(self):
        centroid, width = analysis.intensity_moments(np.zeros(5), np.arange(5.0))
        self.assertTrue(math.isnan(centroid) and math.isnan(width))

    def test_measure_pulse(self):
        z = np.linspace(0.0, 20.0, 2001)
        a = np.exp(-0.5 * (z - 8.0) ** 2)
        metrics = analysis.measure_pulse(3.0, FieldState(a, 0.5 * a), z, 1.0)
        self.assertEqual(metrics.t, 3.0)
        self.assertAlmostEqual(metrics.conversion, 0.2)
        self.assertAlmostEqual(metrics.centroid, 8.0, places=9)
        self.assertAlmostEqual(abs(metrics.area_minus), 0.5 * math.sqrt(2 * math.pi), places=8)

    def test_measure_pulse_atomic_norm(self):
        z = np.linspace(0.0, 20.0, 2001)
        a = np.exp(-0.5 * (z - 8.0) ** 2)
        fields = FieldState(a, np.zeros(z.size))
        self.assertTrue(math.isnan(analysis.measure_pulse(3.0, fields, z, 1.0).atomic_norm))
        metrics = analysis.measure_pulse(3.0, fields, z, 1.0, p12=-0.1j * a)
        self.assertAlmostEqual(metrics.atomic_norm, 0.01 * math.sqrt(math.pi), places=8)

    def test_measure_clipped_pulse(self):
        z = np.linspace(0.0, 10.0, 1001)
        a = np.exp(-0.5 * z ** 2)
        metrics = analysis.measure_pulse(0.0, FieldState(a, np.zeros(z.size)), z, 1.0)
        self.assertTrue(math.isnan(metrics.area_plus.real))
        with self.assertRaises(ContainmentError):
            analysis.measure_pulse(0.0, FieldState(a, np.zeros(z.size)), z, 1.0, strict=True)

    def test_velocity_from_centroids(self):
        self.assertAlmostEqual(analysis.velocity_from_centroids([0, 1, 2, 3], [1.0, 1.5, 2.0, 2.5]), 0.5)


class TestCompareRuns(unittest.TestCase):

    def setUp(self):
        self.z = np.linspace(0.0, 10.0, 201)
        profile = np.exp(-0.5 * (self.z - 5.0) ** 2)
        self.times = np.array([1.0, 2.0])
        self.run = analysis.SpaceTimeData(self.times, self.z, np.array([profile, profile]),
                                          np.array([0.5 * profile, 0.5 * profile]), label="ref")

    def test_identical_runs(self):
        report = analysis.compare_runs(self.run, self.run)
        self.assertEqual(report.max_error, 0.0)
        self.assertIn("ref_b", report.trajectories)

    def test_scaled_run(self):
        scaled = replace(self.run, a_plus=1.1 * self.run.a_plus, a_minus=1.1 * self.run.a_minus,
                         label="scaled")
        report = analysis.compare_runs(scaled, self.run)
        self.assertAlmostEqual(report.overall["+"], 0.1)
        self.assertAlmostEqual(report.max_error, 0.1)
        text = report.render()
        self.assertIn("run_a=scaled", text)
        self.assertIn("max_rel_l2=0.1", text)

    def test_mismatched_grids(self):
        other = replace(self.run, z=self.run.z + 0.1)
        with self.assertRaises(ComparisonError):
            analysis.compare_runs(other, self.run)
        shorter = replace(self.run, a_plus=self.run.a_plus[:1], a_minus=self.run.a_minus[:1],
                          times=self.times[:1])
        with self.assertRaises(ComparisonError):
            analysis.compare_runs(shorter, self.run)


if __name__ == '__main__':
    unittest.main()
