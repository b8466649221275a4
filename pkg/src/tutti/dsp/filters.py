"""Resonant lowpass built on the trapezoidal state-variable topology.

The continuous SVF lowpass H(s) = 1 / (s^2 + k s + 1), prewarped with
g = tan(pi * fc / sr), collapses to one biquad whose coefficients are exact
for the trapezoidal integrator pair.  At zero resonance the damping is
sqrt(2) (Butterworth), so the -3 dB point sits on the cutoff; raising the
resonance lowers the damping towards 0.1 and a visible peak.  The recursion
itself runs in scipy's lfilter with carried state, so block size does not
change the output.
"""

from __future__ import annotations

import numpy as np
from scipy.signal import lfilter

CUTOFF_MIN_HZ = 20.0


class LowpassFilter:
    def __init__(self, sample_rate: int = 44100, cutoff_hz: float = 1000.0,
                 resonance: float = 0.0):
        self.sample_rate = sample_rate
        self._zi = np.zeros(2)
        self.cutoff_hz = 0.0
        self.resonance = 0.0
        self.set(cutoff_hz, resonance)

    def set(self, cutoff_hz: float | None = None,
            resonance: float | None = None) -> None:
        if cutoff_hz is not None:
            hi = 0.45 * self.sample_rate
            self.cutoff_hz = float(min(max(cutoff_hz, CUTOFF_MIN_HZ), hi))
        if resonance is not None:
            self.resonance = float(min(max(resonance, 0.0), 1.0))
        g = np.tan(np.pi * self.cutoff_hz / self.sample_rate)
        k = np.sqrt(2.0) * (1.0 - self.resonance) + 0.1 * self.resonance
        a0 = 1.0 + k * g + g * g
        self._b = np.array([g * g, 2.0 * g * g, g * g]) / a0
        self._a = np.array([1.0, 2.0 * (g * g - 1.0) / a0, (1.0 - k * g + g * g) / a0])

    def process(self, x: np.ndarray) -> np.ndarray:
        y, self._zi = lfilter(self._b, self._a, x, zi=self._zi)
        return y

    def reset(self) -> None:
        self._zi[:] = 0.0
