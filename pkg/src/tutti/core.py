"""Shared musical state: keys, scales, the in-key quantizer, and engine events.

Everything the ensemble agrees on lives here.  A MusicalContext snapshot
(key + scale + tempo) is immutable; the ContextStore swaps snapshots under a
lock and notifies listeners, so instrument models and the render path always
see a consistent key/scale pair.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

MIDI_MIN = 0
MIDI_MAX = 127
TEMPO_MIN = 20.0
TEMPO_MAX = 300.0

PITCH_CLASS_NAMES = ("C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B")

NOTE_ON = "note_on"
NOTE_OFF = "note_off"
CONTROL = "control"
PITCH_GLIDE = "pitch_glide"
EVENT_KINDS = frozenset((NOTE_ON, NOTE_OFF, CONTROL, PITCH_GLIDE))


class ContextError(ValueError):
    """Rejected context update (unknown scale id, tempo out of range, ...)."""


@dataclass(frozen=True, slots=True)
class PitchClass:
    """Semitone class 0..11, 0 = C."""

    value: int

    def __post_init__(self) -> None:
        if not isinstance(self.value, int) or not MIDI_MIN <= self.value <= 11:
            raise ValueError(f"pitch class must be an int in 0..11, got {self.value!r}")

    @property
    def name(self) -> str:
        return PITCH_CLASS_NAMES[self.value]

    def __int__(self) -> int:
        return self.value


@dataclass(frozen=True, slots=True)
class Scale:
    """Named interval set within one octave, e.g. major = (0,2,4,5,7,9,11)."""

    id: int
    name: str
    intervals: tuple[int, ...]

    def __post_init__(self) -> None:
        iv = tuple(self.intervals)
        object.__setattr__(self, "intervals", iv)
        if not iv:
            raise ValueError(f"scale {self.name!r}: interval list is empty")
        if iv[0] != 0:
            raise ValueError(f"scale {self.name!r}: first interval must be 0")
        if any(b <= a for a, b in zip(iv, iv[1:])):
            raise ValueError(f"scale {self.name!r}: intervals must be strictly increasing")
        if any(not 0 <= i <= 11 for i in iv):
            raise ValueError(f"scale {self.name!r}: intervals must lie in 0..11")

    def pitch_classes(self, key: PitchClass) -> frozenset[int]:
        """Pitch-class set of this scale rooted at `key`."""
        return frozenset((key.value + i) % 12 for i in self.intervals)


# Shipped scale table (ids 0..7).  The engine config may override it; tests
# and defaults use this one.
BUILTIN_SCALES: tuple[Scale, ...] = (
    Scale(0, "major", (0, 2, 4, 5, 7, 9, 11)),
    Scale(1, "natural minor", (0, 2, 3, 5, 7, 8, 10)),
    Scale(2, "major pentatonic", (0, 2, 4, 7, 9)),
    Scale(3, "minor pentatonic", (0, 3, 5, 7, 10)),
    Scale(4, "dorian", (0, 2, 3, 5, 7, 9, 10)),
    Scale(5, "mixolydian", (0, 2, 4, 5, 7, 9, 10)),
    Scale(6, "harmonic minor", (0, 2, 3, 5, 7, 8, 11)),
    Scale(7, "chromatic", tuple(range(12))),
)


class ScaleTable:
    """Scale lookup by id; the one place scale ids are resolved."""

    def __init__(self, scales: Iterable[Scale] = BUILTIN_SCALES):
        self._by_id: dict[int, Scale] = {}
        for s in scales:
            if s.id in self._by_id:
                raise ValueError(f"duplicate scale id {s.id}")
            self._by_id[s.id] = s
        if not self._by_id:
            raise ValueError("scale table is empty")

    def __len__(self) -> int:
        return len(self._by_id)

    def __iter__(self):
        return iter(sorted(self._by_id.values(), key=lambda s: s.id))

    def __contains__(self, scale_id: int) -> bool:
        return scale_id in self._by_id

    def get(self, scale_id: int) -> Scale:
        try:
            return self._by_id[scale_id]
        except KeyError:
            raise ContextError(f"unknown scale id {scale_id}") from None

    def next_id(self, scale_id: int) -> int:
        """Cycle to the next scale id (wraps), for the scale-cycle button."""
        ids = sorted(self._by_id)
        try:
            return ids[(ids.index(scale_id) + 1) % len(ids)]
        except ValueError:
            return ids[0]


@dataclass(frozen=True, slots=True)
class MusicalContext:
    """The ensemble-wide key/scale/tempo snapshot every instrument is locked to."""

    key: PitchClass
    scale: Scale
    tempo_bpm: float = 120.0

    def __post_init__(self) -> None:
        if not TEMPO_MIN <= self.tempo_bpm <= TEMPO_MAX:
            raise ContextError(
                f"tempo {self.tempo_bpm} outside [{TEMPO_MIN:g}, {TEMPO_MAX:g}] BPM"
            )

    def pitch_classes(self) -> frozenset[int]:
        return self.scale.pitch_classes(self.key)


@dataclass(frozen=True, slots=True)
class EngineEvent:
    """Normalized musical event; timestamps count sample frames since engine start."""

    source: str
    kind: str
    timestamp: int
    pitch: int | None = None
    velocity: int | None = None
    controller: str | None = None
    value: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in EVENT_KINDS:
            raise ValueError(f"unknown event kind {self.kind!r}")
        if self.timestamp < 0:
            raise ValueError("timestamp must be >= 0")
        if self.kind in (NOTE_ON, NOTE_OFF):
            if self.pitch is None or not MIDI_MIN <= self.pitch <= MIDI_MAX:
                raise ValueError(f"{self.kind} needs pitch in 0..127, got {self.pitch!r}")
            if self.kind == NOTE_ON:
                v = 100 if self.velocity is None else self.velocity
                object.__setattr__(self, "velocity", v)
                if not MIDI_MIN <= v <= MIDI_MAX:
                    raise ValueError(f"velocity {v} outside 0..127")
        if self.kind in (CONTROL, PITCH_GLIDE):
            if self.value is None or not 0.0 <= self.value <= 1.0:
                raise ValueError(f"{self.kind} needs value in 0..1, got {self.value!r}")
            if self.kind == CONTROL and not self.controller:
                raise ValueError("control event needs a controller id")


def quantize_to_scale(note: int, ctx: MusicalContext) -> int:
    """Snap a MIDI note to the nearest member of the context's scale.

    Ties between an equally distant lower and upper member go to the lower
    note.  Total over 0..127: every pitch class has members in MIDI range,
    so a result always exists.
    """
    note = max(MIDI_MIN, min(MIDI_MAX, note))
    allowed = ctx.pitch_classes()
    for dist in range(12):
        lower = note - dist
        if lower >= MIDI_MIN and lower % 12 in allowed:
            return lower
        upper = note + dist
        if upper <= MIDI_MAX and upper % 12 in allowed:
            return upper
    # Unreachable for any valid scale: some member lies within 11 semitones.
    raise AssertionError("no scale member within an octave")


def degree_to_midi(degree: int, octave: int, ctx: MusicalContext) -> int:
    """MIDI note for a scale-degree index; degree wraps into octaves, 60 = C4.

    Degree 0 at octave 4 in C major is middle C.  Degrees past the interval
    count (or negative) carry into neighbouring octaves, so the mapping is
    strictly monotone in `degree` until it clamps at the MIDI range edges.
    """
    iv = ctx.scale.intervals
    n = len(iv)
    raw = 12 * (octave + 1) + ctx.key.value + iv[degree % n] + 12 * (degree // n)
    return max(MIDI_MIN, min(MIDI_MAX, raw))


def diatonic_harmony(note: int, ctx: MusicalContext) -> int:
    """Scale member two degrees above `note` (a diatonic third), clamped.

    `note` is quantized into the scale first, so the degree lookup is total.
    """
    note = quantize_to_scale(note, ctx)
    iv = ctx.scale.intervals
    rel = (note - ctx.key.value) % 12
    idx = iv.index(rel)  # present by construction after quantize
    above = idx + 2
    base = note - rel
    raw = base + iv[above % len(iv)] + 12 * (above // len(iv))
    return max(MIDI_MIN, min(MIDI_MAX, raw))


ContextListener = Callable[[MusicalContext], None]


class ContextStore:
    """Single-writer, many-reader holder for the active MusicalContext.

    Writers go through set_context(), which validates against the scale
    table, swaps the immutable snapshot, and notifies listeners (sync
    master, UI push, ...).  Readers just grab .context; the snapshot they
    get never mutates under them.
    """

    def __init__(self, scales: ScaleTable | None = None,
                 key: int = 0, scale_id: int = 0, tempo_bpm: float = 120.0):
        self.scales = scales if scales is not None else ScaleTable()
        self._lock = threading.Lock()
        self._listeners: list[ContextListener] = []
        self._ctx = MusicalContext(PitchClass(key), self.scales.get(scale_id), tempo_bpm)

    @property
    def context(self) -> MusicalContext:
        return self._ctx

    def add_listener(self, fn: ContextListener) -> None:
        self._listeners.append(fn)

    def set_context(self, key: int | None = None, scale_id: int | None = None,
                    tempo_bpm: float | None = None) -> MusicalContext:
        """Update any subset of (key, scale, tempo); invalid input raises
        ContextError and leaves the prior context untouched."""
        with self._lock:
            cur = self._ctx
            new_key = cur.key if key is None else PitchClass(key)
            new_scale = cur.scale if scale_id is None else self.scales.get(scale_id)
            new_tempo = cur.tempo_bpm if tempo_bpm is None else float(tempo_bpm)
            ctx = MusicalContext(new_key, new_scale, new_tempo)
            self._ctx = ctx
            listeners = list(self._listeners)
        for fn in listeners:
            fn(ctx)
        return ctx

    def cycle_scale(self) -> MusicalContext:
        return self.set_context(scale_id=self.scales.next_id(self._ctx.scale.id))


def midi_to_hz(pitch: float) -> float:
    """Equal-tempered frequency; accepts fractional pitches for glides."""
    return 440.0 * 2.0 ** ((pitch - 69.0) / 12.0)
