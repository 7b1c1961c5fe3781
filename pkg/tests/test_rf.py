"""Gated sinusoidal RF waveforms, synchronization, phase resets."""

import math

import numpy as np
import pytest
from scipy.integrate import quad
from hypothesis import given, settings, strategies as st

from echosense import (ConfigError, ResetMode, RFWaveform, build_hahn,
                       build_cp, build_pdd, build_split_interval,
                       build_synchronized, synchronized_frequency, zero_field)

T_PI2 = 80e-9
T_PI = 160e-9


class TestSynchronizedFrequency:
    def test_reference_values(self):
        assert synchronized_frequency(1200e-9, 1) == pytest.approx(0.4167e6,
                                                                   rel=1e-3)
        assert synchronized_frequency(1200e-9, 2) == pytest.approx(0.8333e6,
                                                                   rel=1e-3)
        assert synchronized_frequency(1200e-9, 3) == pytest.approx(1.25e6,
                                                                   rel=1e-3)
        assert synchronized_frequency(1190e-9, 1) == pytest.approx(0.42e6,
                                                                   rel=1e-2)
        assert synchronized_frequency(1e-6, 2) == pytest.approx(1.0e6)

    def test_degenerate_rejected(self):
        with pytest.raises(ConfigError):
            synchronized_frequency(1e-6, 0)
        with pytest.raises(ConfigError):
            synchronized_frequency(0.0, 1)


class TestSample:
    def test_zero_outside_windows(self):
        w = RFWaveform(1.8e-3, 1e6, 0.0, ((1e-6, 2e-6),))
        for t in (0.0, 0.5e-6, 2.5e-6, 1e-3):
            assert w.sample(t) == 0.0

    def test_phase_quarter_at_window_start(self):
        a = 1.3e-3
        w = RFWaveform(a, 1e6, math.pi / 2, ((0.0, 1e-6),))
        assert w.sample(0.0) == pytest.approx(a)

    def test_half_open_convention(self):
        w = RFWaveform(1e-3, 1e6, math.pi / 2, ((1e-6, 2e-6),),
                       ResetMode.PER_WINDOW_RESET)
        assert w.sample(1e-6) == pytest.approx(1e-3)   # t_on inclusive
        assert w.sample(2e-6) == 0.0                   # t_off exclusive
        assert w.sample(np.nextafter(2e-6, 0.0)) != 0.0

    def test_continuous_equals_reset_when_window_at_zero(self):
        kw = dict(amplitude=1e-3, frequency=0.7e6, phase=0.4,
                  windows=((0.0, 3e-6),))
        wc = RFWaveform(**kw, reset_mode=ResetMode.CONTINUOUS)
        wr = RFWaveform(**kw, reset_mode=ResetMode.PER_WINDOW_RESET)
        t = np.linspace(0, 3e-6, 57)
        assert np.allclose(wc.sample(t), wr.sample(t), atol=0)

    @given(st.floats(min_value=0.0, max_value=0.9e-6),
           st.integers(min_value=1, max_value=9))
    def test_periodicity_in_continuous_window(self, t, k):
        nu = 2e6
        w = RFWaveform(1e-3, nu, 0.3, ((0.0, 10e-6),))
        assert w.sample(t + k / nu) == pytest.approx(w.sample(t), abs=1e-12)

    @given(st.floats(min_value=0.0, max_value=3e-6))
    def test_linearity_in_amplitude(self, t):
        base = dict(frequency=0.9e6, phase=1.1, windows=((0.5e-6, 2.5e-6),))
        w1 = RFWaveform(amplitude=0.7e-3, **base)
        w2 = RFWaveform(amplitude=1.4e-3, **base)
        assert w2.sample(t) == pytest.approx(2 * w1.sample(t), abs=1e-15)

    def test_vectorized_matches_scalar(self):
        w = build_split_interval(1e-6, 1e-3, 0.2, 1.3)
        t = np.linspace(0, 2e-6, 41)
        assert np.allclose(w.sample(t), [w.sample(float(x)) for x in t])


class TestIntegral:
    @settings(max_examples=30, deadline=None)
    @given(st.floats(min_value=0.0, max_value=2e-6),
           st.floats(min_value=0.0, max_value=2e-6),
           st.floats(min_value=0.0, max_value=2 * math.pi),
           st.sampled_from([ResetMode.CONTINUOUS, ResetMode.PER_WINDOW_RESET]))
    def test_closed_form_matches_quadrature(self, a, b, phase, mode):
        if b < a:
            a, b = b, a
        w = RFWaveform(1.2e-3, 0.8e6, phase,
                       ((0.2e-6, 0.9e-6), (1.1e-6, 1.9e-6)), mode)
        val, _ = quad(lambda t: w.sample(t), a, b,
                      points=[0.2e-6, 0.9e-6, 1.1e-6, 1.9e-6],
                      epsabs=1e-16, limit=200)
        assert w.integral(a, b) == pytest.approx(val, abs=1e-13)

    def test_half_sine_lobe_area(self):
        # integral of A sin(pi t / tau) over [0, tau] = 2 A tau / pi
        tau, a = 1.2e-6, 1e-3
        w = RFWaveform(a, 1 / (2 * tau), 0.0, ((0.0, tau),))
        assert w.integral(0.0, tau) == pytest.approx(2 * a * tau / math.pi,
                                                     rel=1e-12)

    def test_unit_integral_scales_out_amplitude(self):
        w = RFWaveform(1.8e-3, 1e6, 0.5, ((0.0, 2e-6),))
        assert w.unit_integral(0.0, 1.5e-6) == pytest.approx(
            w.integral(0.0, 1.5e-6) / 1.8e-3, rel=1e-12)

    def test_unit_integral_defined_at_zero_amplitude(self):
        w = RFWaveform(0.0, 1e6, 0.0, ((0.0, 1e-6),))
        assert w.unit_integral(0.0, 0.5e-6) != 0.0

    def test_inverted_bounds_rejected(self):
        w = RFWaveform(1e-3, 1e6, 0.0, ((0.0, 1e-6),))
        with pytest.raises(ConfigError):
            w.integral(1e-6, 0.0)


class TestValidation:
    def test_negative_amplitude_rejected(self):
        with pytest.raises(ConfigError):
            RFWaveform(-1e-3, 1e6)

    def test_nonpositive_frequency_rejected(self):
        with pytest.raises(ConfigError):
            RFWaveform(1e-3, 0.0)

    def test_overlapping_windows_rejected(self):
        with pytest.raises(ConfigError):
            RFWaveform(1e-3, 1e6, 0.0, ((0.0, 1e-6), (0.5e-6, 2e-6)))

    def test_empty_window_rejected(self):
        with pytest.raises(ConfigError):
            RFWaveform(1e-3, 1e6, 0.0, ((1e-6, 1e-6),))

    def test_window_phases_length_checked(self):
        with pytest.raises(ConfigError):
            RFWaveform(1e-3, 1e6, 0.0, ((0.0, 1e-6),), window_phases=(0.0, 1.0))

    def test_zero_field(self):
        w = zero_field()
        assert w.amplitude == 0.0
        assert w.sample(0.5) == 0.0


class TestWithPhase:
    def test_global_phase_set(self):
        w = RFWaveform(1e-3, 1e6, 0.2, ((0.0, 1e-6),))
        assert w.with_phase(1.5).phase == 1.5

    def test_window_phases_shift_rigidly(self):
        w = build_split_interval(1e-6, 1e-3, 0.1, 0.4)
        w2 = w.with_phase(0.1 + 0.7)
        assert w2.window_phases == pytest.approx((0.8, 1.1))


class TestBuildSplitInterval:
    def test_windows_per_flags(self):
        tau = 1e-6
        both = build_split_interval(tau, 1e-3, 0.0, 0.0)
        assert both.windows == ((0.0, tau), (tau, 2 * tau))
        first = build_split_interval(tau, 1e-3, 0.0, 0.0, enable_second=False)
        assert first.windows == ((0.0, tau),)
        second = build_split_interval(tau, 1e-3, 0.0, 0.0, enable_first=False)
        assert second.windows == ((tau, 2 * tau),)

    def test_frequency_is_half_period(self):
        tau = 1.3e-6
        w = build_split_interval(tau, 1e-3, 0.0, 0.0)
        assert w.frequency == pytest.approx(1 / (2 * tau))

    def test_both_disabled_warns(self):
        with pytest.warns(UserWarning):
            w = build_split_interval(1e-6, 1e-3, 0.0, 0.0,
                                     enable_first=False, enable_second=False)
        assert w.sample(0.5e-6) == 0.0

    def test_equal_phase_lobes_mirror_full_waveform(self):
        # Per-window restart flips the second lobe's sign relative to the
        # continuous n=1 sinusoid.
        tau = 1e-6
        seq = build_hahn(tau, T_PI2, T_PI)
        split = build_split_interval(tau, 1e-3, 0.0, 0.0)
        full = build_synchronized(seq, 1e-3, 1, 0.0, ResetMode.CONTINUOUS)
        t1 = np.linspace(0, tau, 31, endpoint=False)
        t2 = np.linspace(tau, 2 * tau, 31, endpoint=False)
        assert np.allclose(split.sample(t1), full.sample(t1), atol=1e-18)
        assert np.allclose(split.sample(t2), -full.sample(t2), atol=1e-18)


class TestExcludeIntervals:
    def test_zero_inside_blocked_unchanged_outside(self):
        from echosense import exclude_intervals

        w = RFWaveform(1e-3, 0.6e6, 0.8, ((0.0, 3e-6),))
        g = exclude_intervals(w, [(1e-6, 1.2e-6), (2e-6, 2.1e-6)])
        inside = np.array([1.05e-6, 1.1e-6, 2.05e-6])
        outside = np.array([0.5e-6, 1.5e-6, 1.9e-6, 2.5e-6])
        assert np.all(g.sample(inside) == 0.0)
        assert np.allclose(g.sample(outside), w.sample(outside), atol=1e-18)

    def test_phase_continuity_for_reset_windows(self):
        from echosense import exclude_intervals

        w = build_split_interval(1e-6, 1e-3, 0.3, 1.1)
        g = exclude_intervals(w, [(0.4e-6, 0.6e-6)])
        t = np.array([0.1e-6, 0.7e-6, 1.5e-6])
        assert np.allclose(g.sample(t), w.sample(t), atol=1e-18)

    def test_pulse_gated_matches_sequence_spans(self):
        from echosense import pulse_gated

        seq = build_hahn(1.2e-6, T_PI2, T_PI)
        w = build_synchronized(seq, 1e-3, 1, 0.9)
        g = pulse_gated(w, seq)
        # centered pi pulse at tau: field off in its span
        assert g.sample(1.2e-6) == 0.0
        assert g.sample(1.2e-6 + T_PI / 2 + 1e-12) != 0.0
        # identical elsewhere
        t = np.array([0.5e-6, 1.0e-6, 2.0e-6])
        assert np.allclose(g.sample(t), w.sample(t), atol=1e-18)

    def test_empty_blocked_span_rejected(self):
        from echosense import exclude_intervals

        w = RFWaveform(1e-3, 1e6, 0.0, ((0.0, 1e-6),))
        with pytest.raises(ConfigError):
            exclude_intervals(w, [(0.5e-6, 0.5e-6)])


class TestBuildSynchronized:
    def test_continuous_single_window(self):
        seq = build_hahn(1.2e-6, T_PI2, T_PI)
        w = build_synchronized(seq, 1e-3, 1, 0.3)
        assert w.windows == ((0.0, seq.echo_time),)
        assert w.frequency == pytest.approx(1 / (2 * seq.tau))
        assert w.reset_mode is ResetMode.CONTINUOUS

    def test_reset_tiles_free_evolution(self):
        seq = build_pdd(3, 1e-6, T_PI2, T_PI)
        w = build_synchronized(seq, 1e-3, 1, 0.0,
                               ResetMode.PER_WINDOW_RESET)
        assert len(w.windows) == 4
        assert w.windows[-1][1] == pytest.approx(seq.echo_time)

    def test_reset_phases_advance_by_pi_at_each_refocusing(self):
        seq = build_pdd(3, 1e-6, T_PI2, T_PI)
        w = build_synchronized(seq, 1e-3, 1, 0.2,
                               ResetMode.PER_WINDOW_RESET)
        assert w.window_phases == pytest.approx(
            tuple(0.2 + k * math.pi for k in range(4)))

    def test_cp_reset_phase_pattern(self):
        # CP windows: [0,tau] then pairs straddling each pi pulse; phase
        # flips once per pulse passed.
        seq = build_cp(2, 1e-6, T_PI2, T_PI)
        w = build_synchronized(seq, 1e-3, 1, 0.0,
                               ResetMode.PER_WINDOW_RESET)
        flips = [round((p - 0.0) / math.pi) for p in w.window_phases]
        assert flips == [0, 1, 1, 2]

    def test_pdd_reset_equals_continuous_for_n1(self):
        # phase-flipped restarts re-assemble the continuous sinusoid on
        # the PDD grid
        seq = build_pdd(4, 1e-6, T_PI2, T_PI)
        wr = build_synchronized(seq, 1e-3, 1, 0.0, ResetMode.PER_WINDOW_RESET)
        wc = build_synchronized(seq, 1e-3, 1, 0.0, ResetMode.CONTINUOUS)
        t = np.linspace(0, seq.echo_time, 200, endpoint=False)
        # atol at the rounding floor of amplitude * sin(k*pi) flips
        assert np.allclose(wr.sample(t), wc.sample(t), atol=1e-13 * wr.amplitude)
