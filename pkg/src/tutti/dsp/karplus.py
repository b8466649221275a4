"""Plucked-string one-shots: a delay line excited by a noise burst, with a
two-tap averaging feedback loop that darkens and decays the tone.

The excitation is one delay-line period of noise built in the frequency
domain: bin m gets magnitude 1/m and a random phase.  That keeps the pluck
noisy while guaranteeing the fundamental is the strongest partial from the
first period on, so the perceived (and measured) pitch is stable across
seeds.  The averaging tap adds half a sample of delay, giving an effective
pitch of sample_rate / (L + 0.5); L is rounded to keep that within a percent
of the request across the playing range.
"""

from __future__ import annotations

import numpy as np

FEEDBACK_GAIN = 0.992


def pluck(freq_hz: float, duration_s: float, sample_rate: int = 44100,
          velocity: float = 1.0, seed: int | None = None,
          feedback: float = FEEDBACK_GAIN) -> np.ndarray:
    """Render a plucked tone at freq_hz; peak amplitude equals velocity."""
    if freq_hz <= 0:
        raise ValueError("frequency must be positive")
    n = int(round(duration_s * sample_rate))
    if n <= 0:
        return np.zeros(0)
    delay = max(2, int(round(sample_rate / freq_hz)))
    rng = np.random.default_rng(seed)

    bins = delay // 2 + 1
    mags = np.zeros(bins)
    mags[1:] = 1.0 / np.arange(1, bins)
    phases = rng.uniform(0.0, 2.0 * np.pi, bins)
    phases[0] = 0.0
    if delay % 2 == 0:
        phases[-1] = 0.0
    burst = np.fft.irfft(mags * np.exp(1j * phases), n=delay)
    burst *= velocity / np.max(np.abs(burst))

    # buf[0] is a zero guard so the n-L-1 tap is defined for the first sample.
    buf = np.zeros(n + 1)
    head = min(delay, n)
    buf[1:head + 1] = burst[:head]
    half_g = 0.5 * feedback
    pos = delay + 1
    while pos < n + 1:
        end = min(pos + delay, n + 1)
        buf[pos:end] = half_g * (buf[pos - delay:end - delay]
                                 + buf[pos - delay - 1:end - delay - 1])
        pos = end
    return buf[1:]


def pluck_pitch_hz(freq_hz: float, sample_rate: int = 44100) -> float:
    """The pitch the loop actually rings at for a requested frequency."""
    delay = max(2, int(round(sample_rate / freq_hz)))
    return sample_rate / (delay + 0.5)
