import math
import os
import sys
import unittest
from dataclasses import replace

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '../src')))

from tcsl.core import (BUILTIN_ALIASES, DESK_LIGHT_SPEED, ControlProfile, ControlSchedule, Grid,
                       MediumParams, PASS_MARGIN, ProbePulse, builtin_scenario, builtin_scenarios,
                       default_scenario, derive_parameters, validate_scenario)
from tcsl.errors import ConfigError, GridError, ParameterError, ScenarioError


def desk_medium(**overrides):
    params = dict(gamma3=1000.0, gamma2=0.0, ng2=1.0e7, c=1000.0, k_o=0.01, length_L=10.0)
    params.update(overrides)
    return MediumParams.with_detuning(0.0, "symmetric", **params)


class TestDeriveParameters(unittest.TestCase):

    def test_desk_scale_values(self):
        derived = derive_parameters(desk_medium(), 100.0)
        self.assertAlmostEqual(derived.xi, 10.0)
        self.assertAlmostEqual(derived.v_o, 1.0)
        self.assertAlmostEqual(derived.l_cor, 0.1)
        self.assertEqual(derived.gamma_plus, complex(1000.0, 0.0))

    def test_correlation_length_grows_with_detuning(self):
        medium = MediumParams.with_detuning(1000.0, "symmetric", gamma3=1000.0, gamma2=0.0,
                                            ng2=1.0e7, c=1000.0, k_o=0.01, length_L=10.0)
        derived = derive_parameters(medium, 100.0)
        self.assertAlmostEqual(derived.l_cor, math.sqrt(2.0) / 10.0)

    def test_velocity_identity(self):
        medium = desk_medium()
        for omega in (10.0, 50.0, 100.0, 300.0):
            derived = derive_parameters(medium, omega)
            self.assertAlmostEqual(derived.v_o * derived.xi * medium.gamma3 / omega ** 2, 1.0)

    def test_gamma_signs(self):
        medium = MediumParams.with_detuning(50.0, "symmetric", gamma3=1000.0, gamma2=0.0,
                                            ng2=1.0e7, c=1000.0, k_o=0.01, length_L=10.0)
        self.assertEqual(medium.gamma_plus, complex(1000.0, -50.0))
        self.assertEqual(medium.gamma_minus, complex(1000.0, 50.0))

    def test_negative_rabi_rejected(self):
        with self.assertRaises(ParameterError):
            derive_parameters(desk_medium(), -1.0)


class TestMediumParams(unittest.TestCase):

    def test_detuning_modes(self):
        self.assertEqual(MediumParams.with_detuning(5.0, "symmetric", **self._base()).delta_minus, -5.0)
        self.assertEqual(MediumParams.with_detuning(5.0, "equal", **self._base()).delta_minus, 5.0)
        explicit = MediumParams.with_detuning(5.0, "explicit", delta_minus=2.0, **self._base())
        self.assertEqual(explicit.delta_minus, 2.0)

    def test_explicit_mode_needs_delta_minus(self):
        with self.assertRaises(ParameterError):
            MediumParams.with_detuning(5.0, "explicit", **self._base())

    def test_invalid_values(self):
        for key, value in (("gamma3", 0.0), ("gamma2", -0.1), ("c", -1.0), ("k_o", -0.5),
                           ("ng2", float("nan"))):
            params = self._base()
            params[key] = value
            with self.subTest(key=key), self.assertRaises(ParameterError):
                MediumParams.with_detuning(0.0, "symmetric", **params)

    def test_parameter_error_is_config_error(self):
        self.assertTrue(issubclass(ParameterError, ConfigError))

    @staticmethod
    def _base():
        return dict(gamma3=1000.0, gamma2=0.0, ng2=1.0e7, c=1000.0, k_o=0.01, length_L=10.0)


class TestControlProfile(unittest.TestCase):

    def test_plateaus_and_ramp(self):
        profile = ControlProfile(0.0, ((5.0, 100.0), (10.0, 0.0)))
        self.assertEqual(profile.value(4.0, 0.25), 0.0)
        self.assertAlmostEqual(profile.value(5.125, 0.25), 50.0)
        self.assertAlmostEqual(profile.value(7.0, 0.25), 100.0)
        self.assertAlmostEqual(profile.value(12.0, 0.25), 0.0)

    def test_vectorised_value(self):
        profile = ControlProfile(100.0, ((10.0, 0.0),))
        values = profile.value([0.0, 10.0, 11.0], 0.25)
        self.assertEqual(values.shape, (3,))
        self.assertAlmostEqual(values[0], 100.0)
        self.assertAlmostEqual(values[2], 0.0)

    def test_level_after(self):
        profile = ControlProfile(0.0, ((5.0, 100.0), (10.0, 0.0)))
        self.assertEqual(profile.level_after(4.9), 0.0)
        self.assertEqual(profile.level_after(5.0), 100.0)
        self.assertEqual(profile.level_after(10.0), 0.0)

    def test_text_form(self):
        profile = ControlProfile(0.0, ((5.0, 100.0), (10.0, 0.0)))
        self.assertEqual(profile.to_text(), "0; 100@5; 0@10")
        self.assertEqual(ControlProfile.from_text(profile.to_text()), profile)

    def test_bad_text(self):
        for text in ("", "abc", "1; 2@x"):
            with self.subTest(text=text), self.assertRaises(ScenarioError):
                ControlProfile.from_text(text)

    def test_invalid_profiles(self):
        with self.assertRaises(ParameterError):
            ControlProfile(-1.0)
        with self.assertRaises(ParameterError):
            ControlProfile(0.0, ((10.0, 1.0), (5.0, 0.0)))

    def test_schedule_breakpoints(self):
        schedule = ControlSchedule(ControlProfile(100.0),
                                   ControlProfile(0.0, ((5.0, 100.0), (10.0, 0.0))))
        self.assertEqual(schedule.breakpoints(0.0, 20.0), [5.0, 5.25, 10.0, 10.25])
        self.assertEqual(schedule.breakpoints(5.0, 10.0), [5.25])

    def test_ramp_time_must_be_positive(self):
        with self.assertRaises(ParameterError):
            ControlSchedule(ControlProfile(1.0), ControlProfile(0.0), ramp_time=0.0)


class TestScenario(unittest.TestCase):

    def test_default_derived_quantities(self):
        s = default_scenario()
        self.assertAlmostEqual(s.v_o, 1.0)
        self.assertAlmostEqual(s.l_o, 1.0)
        self.assertAlmostEqual(s.entry_time, 0.0)
        self.assertAlmostEqual(s.medium.xi * s.medium.length_L, 100.0)
        self.assertAlmostEqual(s.medium.xi * s.l_o, 10.0)

    def test_pulse_amplitude_is_a_nonnegative_magnitude(self):
        pulse = ProbePulse(0.5, 1.0, center_z=5.0, phase=math.pi)
        self.assertEqual(pulse.amplitude_in, 0.5)
        with self.assertRaisesRegex(ParameterError, "nonnegative"):
            ProbePulse(-0.5, 1.0, center_z=5.0)

    def test_output_times_default_to_key_times(self):
        s = default_scenario().replace(snapshots=())
        self.assertEqual(s.output_times, (5.0, 10.0, 12.0))

    def test_builtins(self):
        names = set(builtin_scenarios())
        self.assertEqual(names, {"default", "fig2ab", "fig2cd", "fig3", "fig3-decay"})
        self.assertEqual(builtin_scenario("fig2cd").release_mode, "backward")
        self.assertEqual(builtin_scenario("fig3-decay").medium.gamma2, 0.01)
        self.assertEqual(builtin_scenario("fig3").medium.k_o, 0.0)
        self.assertIsNone(builtin_scenario("nope"))

    def test_builtin_aliases(self):
        for alias, name in BUILTIN_ALIASES.items():
            with self.subTest(alias=alias):
                self.assertEqual(builtin_scenario(alias), builtin_scenario(name))
                self.assertNotIn(alias, builtin_scenarios())

    def test_builtins_keep_desk_scale_at_reduced_light_speed(self):
        for name, s in builtin_scenarios().items():
            with self.subTest(name=name):
                self.assertEqual(s.medium.c, DESK_LIGHT_SPEED)
                self.assertAlmostEqual(s.medium.xi, 10.0)
                self.assertAlmostEqual(s.v_o, 1.0)
                self.assertAlmostEqual(s.grid.dt, s.grid.dz(s.medium.length_L) / s.medium.c)
                self.assertTrue(validate_scenario(s).passed)

    def test_backward_release_schedule(self):
        s = builtin_scenario("fig2cd")
        self.assertAlmostEqual(s.schedule.omega_plus.value(12.0, s.schedule.ramp_time), 0.0)
        self.assertAlmostEqual(s.schedule.omega_minus.value(12.0, s.schedule.ramp_time), 100.0)


class TestValidateScenario(unittest.TestCase):

    def test_default_passes(self):
        report = validate_scenario(default_scenario())
        self.assertTrue(report.passed)
        for condition in report.conditions:
            self.assertGreaterEqual(condition.margin, PASS_MARGIN, condition.name)
        margins = {c.name: c.margin for c in report.conditions}
        self.assertAlmostEqual(margins["weak_splitting"], 20.0)
        self.assertAlmostEqual(margins["adiabatic_switching"], 2.0e7 / 1.0025e6, places=6)

    def test_short_pulse_fails_optical_adiabaticity(self):
        s = default_scenario()
        s = s.replace(probe=replace(s.probe, duration=0.001),
                      grid=replace(s.grid, k_max=1.0e4))
        with self.assertLogs("tcsl.core", level="WARNING"):
            report = validate_scenario(s)
        self.assertFalse(report.passed)
        optical = next(c for c in report.conditions if c.name == "adiabatic_optical")
        self.assertAlmostEqual(optical.margin, abs(complex(1000.0, 50.0)) * 0.001)
        self.assertFalse(optical.passed)

    def test_cfl_violation(self):
        s = default_scenario()
        s = s.replace(grid=replace(s.grid, dt=2 * s.grid.dt))
        with self.assertRaises(GridError):
            validate_scenario(s)

    def test_time_ordering(self):
        s = default_scenario()
        with self.assertRaises(ScenarioError):
            validate_scenario(s.replace(t_1=4.0))

    def test_unresolved_spectrum(self):
        s = default_scenario()
        with self.assertRaises(GridError):
            validate_scenario(s.replace(grid=replace(s.grid, k_max=5.0)))

    def test_pulse_outside_medium(self):
        s = default_scenario()
        with self.assertRaises(ScenarioError):
            validate_scenario(s.replace(probe=ProbePulse(1.0, 1.0, center_z=9.0)))

    def test_late_injection_start(self):
        s = default_scenario()
        with self.assertRaises(ScenarioError):
            validate_scenario(s.replace(grid=replace(s.grid, t_start=0.0)))

    def test_too_few_k_modes(self):
        s = default_scenario()
        with self.assertRaises(GridError):
            validate_scenario(s.replace(grid=Grid(nz=400, dt=s.grid.dt, t_start=-3.0, t_end=14.0,
                                                  nk=200, k_max=10.0)))

    def test_render(self):
        text = validate_scenario(default_scenario()).render()
        self.assertTrue(text.startswith("scenario=default\n"))
        self.assertIn("weak_splitting=20 pass", text)
        self.assertTrue(text.endswith("overall=pass\n"))


if __name__ == '__main__':
    unittest.main()
