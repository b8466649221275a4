"""Synthesized drum one-shots: kick, snare, hat, perc.

Every hit of a voice is the same waveform scaled by velocity.  The noise
voices use fixed per-voice seeds, so renders are bit-identical across calls
and across runs; that keeps offline renders reproducible.
"""

from __future__ import annotations

import numpy as np
from scipy.signal import butter, lfilter

DRUM_VOICES = ("kick", "snare", "hat", "perc")

_SNARE_SEED = 1001
_HAT_SEED = 1002
_PERC_SEED = 1003


def _env(n: int, rate: float, sample_rate: int) -> np.ndarray:
    t = np.arange(n) / sample_rate
    return np.exp(-rate * t)


def _kick(sample_rate: int) -> np.ndarray:
    n = int(0.4 * sample_rate)
    t = np.arange(n) / sample_rate
    freq = 50.0 + 100.0 * np.exp(-26.0 * t)
    phase = 2.0 * np.pi * np.cumsum(freq) / sample_rate
    return np.sin(phase) * _env(n, 18.0, sample_rate)


def _snare(sample_rate: int) -> np.ndarray:
    n = int(0.25 * sample_rate)
    t = np.arange(n) / sample_rate
    tone = 0.35 * np.sin(2.0 * np.pi * 180.0 * t)
    noise = np.random.default_rng(_SNARE_SEED).standard_normal(n)
    b, a = butter(2, [1000.0, 6000.0], btype="bandpass", fs=sample_rate)
    noise = lfilter(b, a, noise)
    noise *= 0.8 / np.max(np.abs(noise))
    return (tone + noise) * _env(n, 28.0, sample_rate)


def _hat(sample_rate: int) -> np.ndarray:
    n = int(0.12 * sample_rate)
    noise = np.random.default_rng(_HAT_SEED).standard_normal(n)
    b, a = butter(4, 6000.0, btype="highpass", fs=sample_rate)
    noise = lfilter(b, a, noise)
    noise *= 1.0 / np.max(np.abs(noise))
    return noise * _env(n, 58.0, sample_rate)


def _perc(sample_rate: int) -> np.ndarray:
    n = int(0.15 * sample_rate)
    t = np.arange(n) / sample_rate
    tone = 0.6 * np.sin(2.0 * np.pi * 820.0 * t)
    noise = np.random.default_rng(_PERC_SEED).standard_normal(n)
    b, a = butter(2, [1800.0, 2600.0], btype="bandpass", fs=sample_rate)
    noise = lfilter(b, a, noise)
    noise *= 0.5 / np.max(np.abs(noise))
    return (tone + noise) * _env(n, 40.0, sample_rate)


_BUILDERS = {"kick": _kick, "snare": _snare, "hat": _hat, "perc": _perc}
_cache: dict[tuple[str, int], np.ndarray] = {}


def render_drum(voice: str, velocity: float = 1.0,
                sample_rate: int = 44100) -> np.ndarray:
    """One drum hit; amplitude scales linearly with velocity in 0..1."""
    if voice not in _BUILDERS:
        raise ValueError(f"unknown drum voice {voice!r}")
    key = (voice, sample_rate)
    if key not in _cache:
        base = _BUILDERS[voice](sample_rate)
        peak = np.max(np.abs(base))
        _cache[key] = base * (0.9 / peak)
    v = min(max(float(velocity), 0.0), 1.0)
    return _cache[key] * v


class DrumKit:
    """Generator for the drum chain: note pitches index the voice table, so
    the sequencer's four tracks land on kick/snare/hat/perc."""

    def __init__(self, sample_rate: int = 44100):
        self.sample_rate = sample_rate
        from .synth import OneShotMixer
        self._mixer = OneShotMixer()

    def note_on(self, pitch: int, velocity: int = 100) -> None:
        voice = DRUM_VOICES[pitch % len(DRUM_VOICES)]
        self._mixer.add(render_drum(voice, velocity / 127.0, self.sample_rate))

    def note_off(self, pitch: int) -> None:
        pass  # one-shots play out on their own

    def render(self, n: int) -> np.ndarray:
        return self._mixer.render(n)
