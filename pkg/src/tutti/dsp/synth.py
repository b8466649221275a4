"""Polyphonic subtractive synth and the monophonic glide voice.

The poly synth runs up to eight voices, each an oscillator stack with a
linear ADSR.  When all voices are busy the oldest releasing voice is stolen
first, then the oldest active one; the stolen envelope retriggers from its
current level so the steal does not click.  Patches may layer a plucked
string one-shot under the oscillators at note-on, mixed at equal power.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..core import midi_to_hz
from .envelope import ADSR
from .karplus import pluck
from .oscillators import Oscillator

MAX_VOICES = 8
PLUCK_TAIL_S = 2.0
EQUAL_POWER = 1.0 / np.sqrt(2.0)


@dataclass(frozen=True)
class SynthPatch:
    """Everything a preset says about the sound of one synth bus."""

    name: str
    oscillators: tuple[tuple[str, float], ...] = (("saw", 0.0),)
    attack_s: float = 0.005
    decay_s: float = 0.08
    sustain: float = 0.7
    release_s: float = 0.25
    cutoff_hz: float = 3000.0
    resonance: float = 0.2
    pluck_layer: bool = False
    reverb_send: float = 0.15
    gain: float = 0.3


class OneShotMixer:
    """Mixes pre-rendered buffers (drum hits, pluck layers) into a stream."""

    def __init__(self) -> None:
        self._live: list[list] = []  # [buffer, position]

    def add(self, buf: np.ndarray) -> None:
        if len(buf):
            self._live.append([buf, 0])

    @property
    def active(self) -> bool:
        return bool(self._live)

    def render(self, n: int) -> np.ndarray:
        out = np.zeros(n)
        keep = []
        for item in self._live:
            buf, pos = item
            take = min(n, len(buf) - pos)
            out[:take] += buf[pos:pos + take]
            item[1] = pos + take
            if item[1] < len(buf):
                keep.append(item)
        self._live = keep
        return out


class _Voice:
    def __init__(self, patch: SynthPatch, sample_rate: int):
        self.patch = patch
        self.sample_rate = sample_rate
        self.env = ADSR(patch.attack_s, patch.decay_s, patch.sustain,
                        patch.release_s, sample_rate)
        self.oscs = [Oscillator(shape, sample_rate, det)
                     for shape, det in patch.oscillators]
        self.note = -1
        self.amp = 0.0
        self.serial = -1

    def start(self, note: int, velocity: int, serial: int,
              patch: SynthPatch) -> None:
        if patch is not self.patch:
            self.patch = patch
            self.oscs = [Oscillator(shape, self.sample_rate, det)
                         for shape, det in patch.oscillators]
            self.env = ADSR(patch.attack_s, patch.decay_s, patch.sustain,
                            patch.release_s, self.sample_rate)
        self.note = note
        self.amp = velocity / 127.0
        self.serial = serial
        self.env.note_on()

    def render(self, n: int) -> np.ndarray:
        env = self.env.render(n)
        freq = midi_to_hz(self.note)
        mix = np.zeros(n)
        for osc in self.oscs:
            mix += osc.render(freq, n)
        mix *= 1.0 / len(self.oscs)
        return mix * env * self.amp


class PolySynth:
    def __init__(self, patch: SynthPatch, sample_rate: int = 44100,
                 max_voices: int = MAX_VOICES, seed: int = 0):
        self.patch = patch
        self.sample_rate = sample_rate
        self.max_voices = max_voices
        self.seed = seed
        self._voices: list[_Voice] = []
        self._serial = 0
        self._plucks = OneShotMixer()
        self._pluck_count = 0

    def set_patch(self, patch: SynthPatch) -> None:
        """Applies to notes started after the call; ringing voices finish
        on their old patch."""
        self.patch = patch

    def note_on(self, note: int, velocity: int = 100) -> None:
        voice = self._claim_voice()
        voice.start(note, velocity, self._serial, self.patch)
        self._serial += 1
        if self.patch.pluck_layer:
            seed = self.seed * 65537 + self._pluck_count
            self._pluck_count += 1
            tone = pluck(midi_to_hz(note), PLUCK_TAIL_S, self.sample_rate,
                         velocity=velocity / 127.0, seed=seed)
            self._plucks.add(tone * EQUAL_POWER)

    def note_off(self, note: int) -> None:
        for voice in self._voices:
            if voice.note == note and voice.env.active and not voice.env.releasing:
                voice.env.note_off()

    def all_notes_off(self) -> None:
        for voice in self._voices:
            voice.env.note_off()

    def _claim_voice(self) -> _Voice:
        for voice in self._voices:
            if not voice.env.active:
                return voice
        if len(self._voices) < self.max_voices:
            voice = _Voice(self.patch, self.sample_rate)
            self._voices.append(voice)
            return voice
        releasing = [v for v in self._voices if v.env.releasing]
        pool = releasing if releasing else self._voices
        return min(pool, key=lambda v: v.serial)

    @property
    def active_voices(self) -> int:
        return sum(1 for v in self._voices if v.env.active)

    def render(self, n: int) -> np.ndarray:
        out = np.zeros(n)
        for voice in self._voices:
            if voice.env.active:
                out += voice.render(n)
        if self.patch.pluck_layer:
            out *= EQUAL_POWER  # equal-power split with the pluck layer
        out += self._plucks.render(n)
        return out * self.patch.gain


class MonoGlideSynth:
    """Single continuously-pitched voice driven by glide values in 0..1.

    0.5 is the root; the span is two octaves (one up, one down).  The gate
    opens on the first glide and releases after half a second without new
    values, so there are no discrete note events to track.
    """

    SPAN_OCTAVES = 2.0
    IDLE_TIMEOUT_S = 0.5
    SMOOTH_TAU_S = 0.015

    def __init__(self, sample_rate: int = 44100, shape: str = "saw",
                 gain: float = 0.25):
        self.sample_rate = sample_rate
        self.gain = gain
        self.osc = Oscillator(shape, sample_rate)
        self.env = ADSR(0.01, 0.01, 1.0, 0.15, sample_rate)
        self.root_hz = midi_to_hz(60)
        self._target_hz = self.root_hz
        self._freq_hz = self.root_hz
        self._idle_n = int(self.IDLE_TIMEOUT_S * sample_rate)
        self._since_event = self._idle_n  # starts silent
        self._decay = float(np.exp(-1.0 / (self.SMOOTH_TAU_S * sample_rate)))

    def set_root(self, root_hz: float) -> None:
        self.root_hz = root_hz

    def glide(self, value: float) -> None:
        value = min(max(float(value), 0.0), 1.0)
        self._target_hz = self.root_hz * 2.0 ** (
            self.SPAN_OCTAVES * (value - 0.5))
        if not self.env.active or self.env.releasing:
            self._freq_hz = self._target_hz  # jump, do not sweep from silence
            self.env.note_on()
        self._since_event = 0

    def silence(self) -> None:
        self.env.note_off()
        self._since_event = self._idle_n

    def render(self, n: int) -> np.ndarray:
        if self.env.active and not self.env.releasing:
            if self._since_event >= self._idle_n:
                self.env.note_off()
        self._since_event += n
        if not self.env.active:
            return np.zeros(n)
        steps = self._decay ** np.arange(1, n + 1)
        freqs = self._target_hz + (self._freq_hz - self._target_hz) * steps
        self._freq_hz = float(freqs[-1])
        return self.osc.render(freqs, n) * self.env.render(n) * self.gain
