"""Phase-accumulator oscillators.

Naive (non-bandlimited) shapes; the voices run through a lowpass anyway and
the aliasing at typical playing registers is part of the sound.  Frequency
may vary per sample, which is what the glissando instrument needs.
"""

from __future__ import annotations

import numpy as np

SHAPES = ("sine", "saw", "square", "triangle")


def _shape(phase: np.ndarray, shape: str) -> np.ndarray:
    t = phase % 1.0
    if shape == "sine":
        return np.sin(2.0 * np.pi * t)
    if shape == "saw":
        return 2.0 * t - 1.0
    if shape == "square":
        return np.where(t < 0.5, 1.0, -1.0)
    if shape == "triangle":
        return 4.0 * np.abs(t - 0.5) - 1.0
    raise ValueError(f"unknown oscillator shape {shape!r}")


class Oscillator:
    """One oscillator with persistent phase across render calls."""

    def __init__(self, shape: str = "saw", sample_rate: int = 44100,
                 detune_cents: float = 0.0):
        if shape not in SHAPES:
            raise ValueError(f"unknown oscillator shape {shape!r}")
        self.shape = shape
        self.sample_rate = sample_rate
        self.detune = 2.0 ** (detune_cents / 1200.0)
        self.phase = 0.0

    def render(self, freq_hz, n: int) -> np.ndarray:
        """Render n samples; freq_hz is a scalar or a per-sample array."""
        freq = np.broadcast_to(np.asarray(freq_hz, dtype=np.float64), (n,))
        phases = self.phase + np.cumsum(freq * (self.detune / self.sample_rate))
        self.phase = float(phases[-1] % 1.0)
        return _shape(phases, self.shape)

    def reset(self) -> None:
        self.phase = 0.0
