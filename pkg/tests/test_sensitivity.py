"""Transduction fitting and the sensitivity arithmetic chain."""

import math

import numpy as np
import pytest

from echosense import (CoilCalibration, ConfigError, EnsembleConfig,
                       FitMethod, SampleSpec, SpinSystem,
                       concentration_sensitivity, dd_sensitivity_sweep,
                       dipole_field, fit_transduction,
                       minimum_detectable_field, spectral_sensitivity)
from echosense.core import MU_B
from echosense.sequence import SequenceKind


def linear_points(slope, n=11, b_max=1e-3, intercept=0.0, noise=None):
    b = np.linspace(0, b_max, n)
    phi = slope * b + intercept
    if noise is not None:
        phi = phi + noise
    return list(zip(b, phi))


class TestFitTransduction:
    def test_recovers_linear_slope(self):
        fit = fit_transduction(linear_points(1.527e7))
        assert fit.slope == pytest.approx(1.527e7, rel=1e-9)
        assert fit.method is FitMethod.LINEAR_REGRESSION
        assert fit.residual_rms == pytest.approx(0.0, abs=1e-9)

    def test_auto_switches_to_max_derivative_when_nonlinear(self):
        # saturating curve: linear fit residual blows past the threshold
        b = np.linspace(0, 1e-3, 21)
        phi = 80.0 * np.sin(b / 1e-3 * math.pi / 2)  # degrees, saturating
        fit = fit_transduction(list(zip(b, phi)))
        assert fit.method is FitMethod.MAX_DERIVATIVE
        # steepest slope is at the origin: 80 * (pi/2) / 1e-3 deg/T
        assert fit.slope == pytest.approx(80 * math.pi / 2 / 1e-3, rel=0.05)

    def test_forced_linear_keeps_regression(self):
        b = np.linspace(0, 1e-3, 21)
        phi = 80.0 * np.sin(b / 1e-3 * math.pi / 2)
        fit = fit_transduction(list(zip(b, phi)),
                               method=FitMethod.LINEAR_REGRESSION,
                               residual_threshold=math.inf)
        assert fit.method is FitMethod.LINEAR_REGRESSION

    def test_too_few_points_rejected(self):
        with pytest.raises(ConfigError):
            fit_transduction([(0.0, 0.0), (1e-4, 1.0)])

    def test_non_increasing_fields_rejected(self):
        pts = [(0.0, 0.0), (2e-4, 1.0), (1e-4, 2.0)]
        with pytest.raises(ConfigError):
            fit_transduction(pts)

    def test_wrap_jump_rejected(self):
        pts = [(0.0, 80.0), (1e-4, -85.0), (2e-4, 75.0)]
        with pytest.raises(ConfigError, match="unwrap"):
            fit_transduction(pts)


class TestArithmeticChain:
    def test_minimum_detectable_field(self):
        fit = fit_transduction(linear_points(1 / 9.8e-6))  # deg per T
        assert minimum_detectable_field(fit, 1.0) == pytest.approx(9.8e-6,
                                                                   rel=1e-6)

    def test_zero_slope_rejected(self):
        fit = fit_transduction(linear_points(0.0))
        with pytest.raises(ConfigError):
            minimum_detectable_field(fit, 1.0)

    def test_spectral_sensitivity(self):
        assert spectral_sensitivity(9.8e-6, 0.375) == pytest.approx(
            9.8e-6 * math.sqrt(0.375), rel=1e-12)

    def test_spectral_sensitivity_invalid(self):
        with pytest.raises(ConfigError):
            spectral_sensitivity(0.0, 0.375)
        with pytest.raises(ConfigError):
            spectral_sensitivity(1e-6, 0.0)

    def test_concentration_sensitivity_unit_conversion(self):
        # density in m^-3 -> per um^3: 2.3e25 m^-3 = 2.3e7 um^-3
        s = concentration_sensitivity(6.0e-6, 2.3e25)
        assert s == pytest.approx(6.0e-6 / math.sqrt(2.3e7), rel=1e-9)

    def test_dipole_field_single_moment(self):
        # mu0/(4 pi) * mu_B / (5 nm)^3 ~ 7.4e-6 T
        assert dipole_field(MU_B, 5e-9) == pytest.approx(7.42e-6, rel=0.01)

    def test_dipole_inverse_cube(self):
        assert dipole_field(MU_B, 10e-9) == pytest.approx(
            dipole_field(MU_B, 5e-9) / 8, rel=1e-12)

    def test_dipole_invalid_distance(self):
        with pytest.raises(ConfigError):
            dipole_field(MU_B, 0.0)


class TestDdSensitivitySweep:
    SAMPLE = SampleSpec(spin_density=1e21, sensing_volume=1.75e-12)
    SYS = SpinSystem(g=2.0, t_m=1e-4)
    CAL = CoilCalibration(coupling_eta=6.682e-3)
    ENS = EnsembleConfig(n_packets=60, detuning_sigma=2 * math.pi * 0.02e6,
                         rf_amplitude_spread=0.2, seed=77)
    AMPS = np.linspace(0, 0.4e-3, 11)

    def run(self, protocol, n_pi_list):
        return dd_sensitivity_sweep(
            protocol, n_pi_list, 1.7e-6, self.SYS, self.CAL, self.SAMPLE,
            self.AMPS, self.ENS, 80e-9, 160e-9)

    def test_cp_sensitivity_improves_with_pulses(self):
        reports = self.run(SequenceKind.CP, [1, 2, 3])
        s = [r.s_spectral for r in reports]
        assert s[0] > s[1] > s[2]

    def test_pdd1_equals_cp1(self):
        r_pdd = self.run(SequenceKind.PDD, [1])[0]
        r_cp = self.run(SequenceKind.CP, [1])[0]
        assert r_pdd.fit.slope == r_cp.fit.slope
        assert r_pdd.s_spectral == r_cp.s_spectral

    def test_report_chain_consistency(self):
        r = self.run(SequenceKind.CP, [2])[0]
        assert r.b_min == pytest.approx(
            r.phase_resolution / abs(r.fit.slope), rel=1e-12)
        assert r.s_spectral == pytest.approx(
            r.b_min * math.sqrt(r.t_meas), rel=1e-12)
        assert r.s_concentration == pytest.approx(
            r.s_spectral / math.sqrt(self.SAMPLE.spin_density * 1e-18),
            rel=1e-12)

    def test_unknown_protocol_rejected(self):
        with pytest.raises(ConfigError):
            self.run(SequenceKind.HAHN, [1])

    def test_too_few_amplitudes_rejected(self):
        with pytest.raises(ConfigError):
            dd_sensitivity_sweep(
                SequenceKind.CP, [1], 1.7e-6, self.SYS, self.CAL,
                self.SAMPLE, [0.0, 1e-4], self.ENS, 80e-9, 160e-9)
