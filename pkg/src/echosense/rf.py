"""Gated sinusoidal RF signal fields.

The field is B(t) = A*sin(2*pi*nu*t + phi) inside gating windows and
exactly zero outside.  Windows use a half-open [t_on, t_off) convention
so abutting windows never double-count a boundary sample.

Two synchronization modes:

* Continuous -- one sinusoid of absolute time, gated on/off.
* PerWindowReset -- the phase restarts at each window start, optionally
  with a per-window phase offset.  This is how an AWG re-arms the RF at
  each refocusing interval of a DD sequence.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .core import ConfigError
from .sequence import PulseSequence

TWO_PI = 2 * math.pi


class ResetMode(str, Enum):
    CONTINUOUS = "continuous"
    PER_WINDOW_RESET = "per-window-reset"


def synchronized_frequency(tau: float, n: int) -> float:
    """Frequency n/(2*tau) locking the RF to the free-precession grid."""
    if not tau > 0:
        raise ConfigError(f"tau must be positive, got {tau}")
    if n < 1:
        raise ConfigError(f"harmonic index n must be >= 1, got {n}")
    return n / (2 * tau)


@dataclass(frozen=True)
class RFWaveform:
    """Piecewise-gated sinusoidal field.

    window_phases, when given, overrides the global phase per window
    (same length as windows).  amplitude may be zero (reference runs).
    """

    amplitude: float
    frequency: float
    phase: float = 0.0
    windows: tuple[tuple[float, float], ...] = ()
    reset_mode: ResetMode = ResetMode.CONTINUOUS
    window_phases: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        if self.amplitude < 0:
            raise ConfigError("amplitude must be >= 0")
        if not self.frequency > 0:
            raise ConfigError("frequency must be positive")
        wins = tuple((float(a), float(b)) for a, b in self.windows)
        object.__setattr__(self, "windows", wins)
        for a, b in wins:
            if b <= a:
                raise ConfigError(f"empty or inverted window [{a}, {b})")
        for (_, b), (a2, _) in zip(wins, wins[1:]):
            if a2 < b:
                raise ConfigError("windows must be disjoint and ordered")
        if self.window_phases is not None:
            ph = tuple(float(p) for p in self.window_phases)
            if len(ph) != len(wins):
                raise ConfigError("window_phases length must match windows")
            object.__setattr__(self, "window_phases", ph)

    def _phase_of(self, k: int) -> float:
        return self.window_phases[k] if self.window_phases is not None else self.phase

    def sample(self, t):
        """Field value(s) at time(s) t [T]; zero outside every window."""
        t_arr = np.asarray(t, dtype=float)
        out = np.zeros_like(t_arr)
        for k, (a, b) in enumerate(self.windows):
            inside = (t_arr >= a) & (t_arr < b)
            if not np.any(inside):
                continue
            t0 = 0.0 if self.reset_mode is ResetMode.CONTINUOUS else a
            arg = TWO_PI * self.frequency * (t_arr - t0) + self._phase_of(k)
            out = np.where(inside, self.amplitude * np.sin(arg), out)
        return out if out.ndim else float(out)

    def integral(self, a: float, b: float) -> float:
        """Closed-form integral of the field over [a, b] (antiderivative of sin)."""
        if b < a:
            raise ConfigError("integration bounds must satisfy a <= b")
        w = TWO_PI * self.frequency
        total = 0.0
        for k, (wa, wb) in enumerate(self.windows):
            lo, hi = max(a, wa), min(b, wb)
            if hi <= lo:
                continue
            t0 = 0.0 if self.reset_mode is ResetMode.CONTINUOUS else wa
            ph = self._phase_of(k)
            total += (math.cos(w * (lo - t0) + ph) - math.cos(w * (hi - t0) + ph)) / w
        return self.amplitude * total

    def unit_integral(self, a: float, b: float) -> float:
        """integral(a, b) for unit amplitude (per-packet amplitude scaling)."""
        if self.amplitude == 0.0:
            return replace(self, amplitude=1.0).integral(a, b)
        return self.integral(a, b) / self.amplitude

    def piece(self, k: int) -> tuple[float, float, float, float]:
        """(t_on, t_off, t0, phase) of window k, such that the field inside
        is amplitude * sin(2*pi*frequency*(t - t0) + phase)."""
        a, b = self.windows[k]
        t0 = 0.0 if self.reset_mode is ResetMode.CONTINUOUS else a
        return a, b, t0, self._phase_of(k)

    def with_phase(self, phi: float) -> "RFWaveform":
        """Same waveform with the global phase set to phi (per-window offsets kept)."""
        if self.window_phases is not None:
            shift = phi - self.phase
            ph = tuple(p + shift for p in self.window_phases)
            return replace(self, phase=phi, window_phases=ph)
        return replace(self, phase=phi)

    def end(self) -> float:
        return self.windows[-1][1] if self.windows else 0.0


def zero_field(frequency: float = 1.0) -> RFWaveform:
    """Zero-amplitude waveform for reference (no-RF) runs."""
    return RFWaveform(0.0, frequency)


def build_split_interval(tau: float, amplitude: float,
                         phase_first: float = 0.0, phase_second: float = 0.0,
                         enable_first: bool = True,
                         enable_second: bool = True) -> RFWaveform:
    """Half-period lobes gated on the first and/or second tau interval of a
    Hahn sequence, each restarting at its own phase."""
    if not tau > 0:
        raise ConfigError("tau must be positive")
    windows, phases = [], []
    if enable_first:
        windows.append((0.0, tau))
        phases.append(phase_first)
    if enable_second:
        windows.append((tau, 2 * tau))
        phases.append(phase_second)
    if not windows:
        warnings.warn("split-interval waveform with both halves gated off "
                      "is identically zero", stacklevel=2)
    return RFWaveform(amplitude, synchronized_frequency(tau, 1),
                      phase=phase_first, windows=tuple(windows),
                      reset_mode=ResetMode.PER_WINDOW_RESET,
                      window_phases=tuple(phases))


def exclude_intervals(wave: RFWaveform, blocked) -> RFWaveform:
    """Hard-gate `wave` to zero inside the `blocked` (a, b) spans.

    Each surviving window piece continues the original sinusoid's phase,
    so outside the blocked spans the field is sample-identical to the
    input.  This models switching the RF off while the microwave drive
    is on.
    """
    blocked = sorted((float(a), float(b)) for a, b in blocked)
    for a, b in blocked:
        if b <= a:
            raise ConfigError(f"empty or inverted blocked span [{a}, {b}]")
    w = TWO_PI * wave.frequency
    windows, phases = [], []
    for k, (wa, wb) in enumerate(wave.windows):
        t0 = 0.0 if wave.reset_mode is ResetMode.CONTINUOUS else wa
        ph = wave._phase_of(k)
        cursor = wa
        for a, b in blocked:
            a, b = max(a, wa), min(b, wb)
            if b <= a:
                continue
            if a > cursor:
                windows.append((cursor, a))
                phases.append(ph + w * (cursor - t0))
            cursor = max(cursor, b)
        if wb > cursor:
            windows.append((cursor, wb))
            phases.append(ph + w * (cursor - t0))
    return RFWaveform(wave.amplitude, wave.frequency, wave.phase,
                      tuple(windows), ResetMode.PER_WINDOW_RESET,
                      tuple(phases))


def pulse_gated(wave: RFWaveform, seq: PulseSequence) -> RFWaveform:
    """`wave` with the field gated off during the sequence's pulse spans."""
    blocked = [(p.start - seq.origin, p.end - seq.origin)
               for p in seq.pulses]
    return exclude_intervals(wave, blocked)


def build_synchronized(seq: PulseSequence, amplitude: float, n: int = 1,
                       phase: float = 0.0,
                       reset_mode: ResetMode = ResetMode.CONTINUOUS) -> RFWaveform:
    """RF waveform locked to a pulse sequence, covering [0, echo_time].

    Continuous: one window with a single sinusoid sin(2*pi*nu*t + phase),
    nu = n/(2*tau).

    PerWindowReset: the free precession is tiled in tau-length windows and
    the RF restarts in each one; the per-window phase advances by pi at
    every refocusing pulse.  Restarting in phase with the toggled sensor
    makes every interval add constructively (for n=1 this reproduces the
    continuous sinusoid on a PDD grid and phase-flips it across the
    2*tau gaps of a CP train), which is what "synchronized with every
    spin refocusing" buys.
    """
    nu = synchronized_frequency(seq.tau, n)
    if reset_mode is ResetMode.CONTINUOUS:
        return RFWaveform(amplitude, nu, phase, ((0.0, seq.echo_time),),
                          ResetMode.CONTINUOUS)
    n_windows = int(round(seq.echo_time / seq.tau))
    centers = np.asarray(seq.pi_centers)
    windows, phases = [], []
    for k in range(n_windows):
        a = k * seq.tau
        flips = int(np.count_nonzero(centers <= a + 1e-15 * seq.echo_time))
        windows.append((a, (k + 1) * seq.tau))
        phases.append(phase + flips * math.pi)
    return RFWaveform(amplitude, nu, phase, tuple(windows),
                      ResetMode.PER_WINDOW_RESET, tuple(phases))
