"""The five instrument models: pure state machines from sensor frames to
engine events.

Each model reads the shared musical context at the moment a frame is
processed, so every emitted pitch is in the key/scale active right then.
Held notes remember the pitch they started with; a later context change
never orphans a note_off.  Models never touch audio or network code, which
is what keeps the scale-lock property testable by plain fuzzing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import (
    CONTROL,
    NOTE_OFF,
    NOTE_ON,
    PITCH_GLIDE,
    ContextStore,
    EngineEvent,
    degree_to_midi,
    diatonic_harmony,
)
from .sequencer import NUM_TRACKS

TOUCH_KEY_COUNT = 24
TOUCH_BASE_OCTAVE = 3

HEAD_YAW_SPAN_DEG = 60.0
HEAD_DEGREE_SPAN = 7
HEAD_BASE_OCTAVE = 4
HEAD_PITCH_SPAN_DEG = 30.0
HEAD_ROLL_ON_DEG = 25.0
HEAD_ROLL_OFF_DEG = 20.0

HAND_TILT_SPAN_DEG = 45.0
HAND_DEAD_ZONE_DEG = 3.0
HAND_BASE_OCTAVE = 4

HARP_COLS = 8
HARP_ROWS = 3
HARP_BASE_OCTAVE = 4
HARP_REFRACTORY_S = 0.120
HARP_NOTE_LENGTH_S = 0.400

DRUM_VELOCITY = 100


# --- sensor frames -----------------------------------------------------------

def _wrap_angle(deg: float) -> float:
    """Fold any angle into [-180, 180]."""
    return (float(deg) + 180.0) % 360.0 - 180.0


def _clamp01(x: float) -> float:
    return min(max(float(x), 0.0), 1.0)


@dataclass(frozen=True)
class TouchKey:
    index: int
    on: bool


@dataclass(frozen=True)
class PadPressure:
    pad: int
    pressure: float

    def __post_init__(self):
        object.__setattr__(self, "pressure", _clamp01(self.pressure))


@dataclass(frozen=True)
class Strip:
    position: float

    def __post_init__(self):
        object.__setattr__(self, "position", _clamp01(self.position))


@dataclass(frozen=True)
class Orientation:
    yaw: float
    pitch: float
    roll: float

    def __post_init__(self):
        object.__setattr__(self, "yaw", _wrap_angle(self.yaw))
        object.__setattr__(self, "pitch", _wrap_angle(self.pitch))
        object.__setattr__(self, "roll", _wrap_angle(self.roll))


@dataclass(frozen=True)
class GridPoint:
    x: float
    y: float
    body_point: str = "p0"


@dataclass(frozen=True)
class Button:
    id: int
    pressed: bool


Payload = TouchKey | PadPressure | Strip | Orientation | GridPoint | Button


@dataclass(frozen=True)
class SensorFrame:
    instrument: str
    payload: Payload


class FrameRejected(ValueError):
    """A frame the model refuses: wrong payload class or out-of-range field."""

    def __init__(self, frame: SensorFrame, reason: str):
        super().__init__(f"{frame.instrument}: {reason}")
        self.frame = frame
        self.reason = reason


# --- models ------------------------------------------------------------------

class InstrumentModel:
    """Shared shape: process() turns one frame into events, release_all()
    closes anything still sounding."""

    source = "?"

    def __init__(self, context: ContextStore, sample_rate: int = 44100):
        self.context = context
        self.sample_rate = sample_rate

    def process(self, frame: SensorFrame, now: int) -> list[EngineEvent]:
        raise NotImplementedError

    def release_all(self, now: int) -> list[EngineEvent]:
        return []

    def _reject(self, frame: SensorFrame, reason: str):
        raise FrameRejected(frame, reason)


class TouchSynthModel(InstrumentModel):
    """24 touch keys as direct scale degrees, plus two cycle buttons.

    Key k sounds degree k at the base octave; keys are degrees, so no
    quantization is ever needed.  Button 0 cycles the scale, button 1 cycles
    the preset (reported through the on_cycle_preset hook).
    """

    source = "touch"

    def __init__(self, context: ContextStore, sample_rate: int = 44100,
                 on_cycle_preset=None):
        super().__init__(context, sample_rate)
        self.on_cycle_preset = on_cycle_preset
        self._held: dict[int, int] = {}

    def process(self, frame: SensorFrame, now: int) -> list[EngineEvent]:
        p = frame.payload
        if isinstance(p, Button):
            if p.pressed:
                if p.id == 0:
                    self.context.cycle_scale()
                elif p.id == 1 and self.on_cycle_preset is not None:
                    self.on_cycle_preset()
            return []
        if not isinstance(p, TouchKey):
            self._reject(frame, f"unsupported payload {type(p).__name__}")
        if not 0 <= p.index < TOUCH_KEY_COUNT:
            self._reject(frame, f"key index {p.index} outside 0..{TOUCH_KEY_COUNT - 1}")

        events: list[EngineEvent] = []
        if p.on:
            if p.index not in self._held:
                pitch = degree_to_midi(p.index, TOUCH_BASE_OCTAVE, self.context.context)
                self._held[p.index] = pitch
                events.append(EngineEvent(self.source, NOTE_ON, now, pitch=pitch))
        else:
            pitch = self._held.pop(p.index, None)
            if pitch is not None:
                events.append(EngineEvent(self.source, NOTE_OFF, now, pitch=pitch))
        return events

    def release_all(self, now: int) -> list[EngineEvent]:
        events = [EngineEvent(self.source, NOTE_OFF, now, pitch=pitch)
                  for pitch in self._held.values()]
        self._held.clear()
        return events


class HeadbandModel(InstrumentModel):
    """Head orientation as a stepped melody voice.

    Yaw inside +-60 degrees maps linearly to scale degrees -7..+7; a degree
    change retriggers (off then on), so motion stays in key.  Head pitch
    spans the reverb send; roll beyond 25 degrees adds a diatonic third
    above the sounding note and holds it until roll falls back under 20
    (hysteresis so wobble does not flutter the harmony).
    """

    source = "head"

    def __init__(self, context: ContextStore, sample_rate: int = 44100):
        super().__init__(context, sample_rate)
        self._melody: int | None = None
        self._harmony: int | None = None
        self._harmony_on = False

    def process(self, frame: SensorFrame, now: int) -> list[EngineEvent]:
        p = frame.payload
        if not isinstance(p, Orientation):
            self._reject(frame, f"unsupported payload {type(p).__name__}")
        ctx = self.context.context
        events: list[EngineEvent] = []

        yaw = min(max(p.yaw, -HEAD_YAW_SPAN_DEG), HEAD_YAW_SPAN_DEG)
        degree = round(yaw / HEAD_YAW_SPAN_DEG * HEAD_DEGREE_SPAN)
        pitch = degree_to_midi(degree, HEAD_BASE_OCTAVE, ctx)
        if pitch != self._melody:
            if self._melody is not None:
                events.append(EngineEvent(self.source, NOTE_OFF, now, pitch=self._melody))
            events.append(EngineEvent(self.source, NOTE_ON, now, pitch=pitch))
            self._melody = pitch

        send = _clamp01((p.pitch + HEAD_PITCH_SPAN_DEG) / (2 * HEAD_PITCH_SPAN_DEG))
        events.append(EngineEvent(self.source, CONTROL, now,
                                  controller="reverb_send", value=send))

        if not self._harmony_on and abs(p.roll) >= HEAD_ROLL_ON_DEG:
            self._harmony_on = True
        elif self._harmony_on and abs(p.roll) < HEAD_ROLL_OFF_DEG:
            self._harmony_on = False
        want = diatonic_harmony(self._melody, ctx) if self._harmony_on else None
        if want != self._harmony:
            if self._harmony is not None:
                events.append(EngineEvent(self.source, NOTE_OFF, now, pitch=self._harmony))
            if want is not None:
                events.append(EngineEvent(self.source, NOTE_ON, now, pitch=want))
            self._harmony = want
        return events

    def release_all(self, now: int) -> list[EngineEvent]:
        events = []
        for pitch in (self._melody, self._harmony):
            if pitch is not None:
                events.append(EngineEvent(self.source, NOTE_OFF, now, pitch=pitch))
        self._melody = None
        self._harmony = None
        self._harmony_on = False
        return events


def _tilt_to_value(angle: float, span: float = HAND_TILT_SPAN_DEG,
                   dead: float = HAND_DEAD_ZONE_DEG) -> float:
    """Symmetric tilt onto 0..1 with a flat dead zone mapping to 0.5."""
    a = min(max(angle, -span), span)
    if abs(a) <= dead:
        return 0.5
    signed = (abs(a) - dead) / (span - dead) * 0.5
    return 0.5 + math.copysign(signed, a)


class HandheldModel(InstrumentModel):
    """9-DOF handheld: forward/back tilt is a continuous glissando across
    two octaves centered on the root; side tilt drives filter cutoff.
    Deliberately unquantized - this is the one voice allowed off-grid."""

    source = "hand"

    def process(self, frame: SensorFrame, now: int) -> list[EngineEvent]:
        p = frame.payload
        if not isinstance(p, Orientation):
            self._reject(frame, f"unsupported payload {type(p).__name__}")
        return [
            EngineEvent(self.source, PITCH_GLIDE, now, value=_tilt_to_value(p.pitch)),
            EngineEvent(self.source, CONTROL, now, controller="cutoff",
                        value=_tilt_to_value(p.roll)),
        ]


class AirHarpModel(InstrumentModel):
    """8x3 grid strummed by tracked body points.

    Columns ascend the scale left to right; rows add octaves bottom to top.
    A note fires when a body point enters a different cell, carries an
    automatic note_off 400 ms later, and each cell refuses re-triggers for
    120 ms so jittery tracking cannot machine-gun a boundary.
    """

    source = "harp"

    def __init__(self, context: ContextStore, sample_rate: int = 44100):
        super().__init__(context, sample_rate)
        self._prev_cell: dict[str, tuple[int, int]] = {}
        self._refractory_until: dict[tuple[int, int], int] = {}
        self._refractory_n = int(HARP_REFRACTORY_S * sample_rate)
        self._note_len_n = int(HARP_NOTE_LENGTH_S * sample_rate)

    def process(self, frame: SensorFrame, now: int) -> list[EngineEvent]:
        p = frame.payload
        if not isinstance(p, GridPoint):
            self._reject(frame, f"unsupported payload {type(p).__name__}")
        if not (0.0 <= p.x <= 1.0 and 0.0 <= p.y <= 1.0):
            self._reject(frame, f"grid point ({p.x}, {p.y}) outside the unit square")

        col = min(int(p.x * HARP_COLS), HARP_COLS - 1)
        row = min(int(p.y * HARP_ROWS), HARP_ROWS - 1)
        cell = (col, row)
        if self._prev_cell.get(p.body_point) == cell:
            return []
        self._prev_cell[p.body_point] = cell
        if now < self._refractory_until.get(cell, 0):
            return []
        self._refractory_until[cell] = now + self._refractory_n

        pitch = degree_to_midi(col, HARP_BASE_OCTAVE + row, self.context.context)
        return [
            EngineEvent(self.source, NOTE_ON, now, pitch=pitch),
            EngineEvent(self.source, NOTE_OFF, now + self._note_len_n, pitch=pitch),
        ]


class DrumPadsModel(InstrumentModel):
    """Bridges pad/strip/button frames onto the sequencer.

    Immediate mode plays the hit now (and, when the kit is wet, points the
    drum filter at the pressure-mapped cutoff first); record mode writes the
    hit into the nearest step instead.  Buttons: 0 dry/wet, 1 record mode,
    2 transport start/stop.
    """

    source = "drums"

    def __init__(self, context: ContextStore, sequencer, sample_rate: int = 44100):
        super().__init__(context, sample_rate)
        self.sequencer = sequencer
        self.record_mode = False

    def process(self, frame: SensorFrame, now: int) -> list[EngineEvent]:
        p = frame.payload
        if isinstance(p, Strip):
            self.sequencer.set_tempo_from_strip(p.position)
            return []
        if isinstance(p, Button):
            if p.pressed:
                if p.id == 0:
                    self.sequencer.toggle_dry_wet()
                elif p.id == 1:
                    self.record_mode = not self.record_mode
                elif p.id == 2:
                    if self.sequencer.playing:
                        self.sequencer.stop()
                    else:
                        self.sequencer.start()
            return []
        if not isinstance(p, PadPressure):
            self._reject(frame, f"unsupported payload {type(p).__name__}")
        if not 0 <= p.pad < NUM_TRACKS:
            self._reject(frame, f"pad {p.pad} outside 0..{NUM_TRACKS - 1}")

        if self.record_mode:
            self.sequencer.record_hit(p.pad, p.pressure)
            return []
        events = []
        if self.sequencer.wet:
            events.append(EngineEvent(self.source, CONTROL, now, controller="cutoff",
                                      value=p.pressure))
        events.append(EngineEvent(self.source, NOTE_ON, now, pitch=p.pad,
                                  velocity=DRUM_VELOCITY))
        return events

    def step_events(self, trigger, now: int) -> list[EngineEvent]:
        """Events for one sequenced hit; same shape as an immediate pad hit,
        with the step's recorded pressure driving the filter."""
        events = []
        if self.sequencer.wet:
            events.append(EngineEvent(self.source, CONTROL, now, controller="cutoff",
                                      value=trigger.pressure))
        events.append(EngineEvent(self.source, NOTE_ON, now, pitch=trigger.track,
                                  velocity=DRUM_VELOCITY))
        return events
