"""Four-track, sixteen-step drum sequencer.

Timing uses a float64 deadline accumulator: the next trigger time advances
by the exact fractional step period and each trigger lands on floor(deadline),
so a 5512.5-frame period alternates 5512/5513 gaps and the long-run total
never drifts.  Pad pressure is stored per step and becomes filter depth at
playback, not loudness; the dry/wet flag decides whether that filtering is
applied at all.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

from .core import ContextStore

NUM_TRACKS = 4
NUM_STEPS = 16
TRACK_NAMES = ("kick", "snare", "hat", "perc")

TEMPO_LO = 60.0
TEMPO_HI = 180.0

CUTOFF_BASE_HZ = 400.0
CUTOFF_SPAN_HZ = 7600.0


def strip_to_tempo(position: float) -> float:
    """Touch-strip position 0..1 onto 60..180 BPM, linear."""
    position = min(max(float(position), 0.0), 1.0)
    return TEMPO_LO + position * (TEMPO_HI - TEMPO_LO)


def pressure_to_cutoff_hz(pressure: float) -> float:
    """Pad pressure 0..1 onto the 400..8000 Hz hit-filter range."""
    pressure = min(max(float(pressure), 0.0), 1.0)
    return CUTOFF_BASE_HZ + pressure * CUTOFF_SPAN_HZ


@dataclass
class Step:
    active: bool = False
    pressure: float = 0.0


class PatternError(ValueError):
    """Rejected pattern data (wrong shape, pressure out of range, ...)."""


class StepPattern:
    """4 x 16 grid of steps; serializes to {"tracks": [[{"on","p"}...]...]}."""

    def __init__(self, tracks: list[list[Step]] | None = None):
        if tracks is None:
            tracks = [[Step() for _ in range(NUM_STEPS)] for _ in range(NUM_TRACKS)]
        if len(tracks) != NUM_TRACKS or any(len(t) != NUM_STEPS for t in tracks):
            raise PatternError(f"pattern must be {NUM_TRACKS} tracks x {NUM_STEPS} steps")
        for track in tracks:
            for step in track:
                if not 0.0 <= step.pressure <= 1.0:
                    raise PatternError(f"step pressure {step.pressure} outside 0..1")
        self.tracks = tracks

    def set_step(self, track: int, step: int, active: bool, pressure: float = 0.0) -> None:
        if not 0 <= track < NUM_TRACKS or not 0 <= step < NUM_STEPS:
            raise PatternError(f"step ({track}, {step}) out of range")
        if not 0.0 <= pressure <= 1.0:
            raise PatternError(f"pressure {pressure} outside 0..1")
        cell = self.tracks[track][step]
        cell.active = active
        cell.pressure = pressure

    def clear(self) -> None:
        for track in self.tracks:
            for step in track:
                step.active = False
                step.pressure = 0.0

    def to_dict(self) -> dict:
        return {"tracks": [[{"on": s.active, "p": s.pressure} for s in track]
                           for track in self.tracks]}

    @classmethod
    def from_dict(cls, data: dict) -> "StepPattern":
        try:
            rows = data["tracks"]
            tracks = [[Step(bool(cell["on"]), float(cell["p"])) for cell in row]
                      for row in rows]
        except (KeyError, TypeError, ValueError) as exc:
            raise PatternError(f"malformed pattern: {exc}") from exc
        return cls(tracks)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "StepPattern":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise PatternError(f"pattern is not valid JSON: {exc}") from exc
        return cls.from_dict(data)


@dataclass(frozen=True)
class StepTrigger:
    """One drum hit due `offset` frames into the advanced span."""

    offset: int
    track: int
    pressure: float
    step: int


@dataclass(frozen=True)
class TransportState:
    playing: bool
    current_step: int
    samples_until_next_step: int
    tempo_bpm: float


class StepSequencer:
    """Transport + pattern; tempo always mirrors the shared context."""

    def __init__(self, context: ContextStore, sample_rate: int = 44100):
        self.context = context
        self.sample_rate = sample_rate
        self.pattern = StepPattern()
        self.playing = False
        self.wet = True
        self._now = 0
        self._step_count = 0  # total steps fired since start
        self._deadline = 0.0

    @property
    def current_step(self) -> int:
        """The next step to fire."""
        return self._step_count % NUM_STEPS

    def _period(self) -> float:
        return self.sample_rate * 60.0 / (self.context.context.tempo_bpm * 4.0)

    def start(self) -> None:
        self.playing = True
        self._step_count = 0
        self._deadline = float(self._now)

    def stop(self) -> None:
        self.playing = False

    def toggle_dry_wet(self) -> bool:
        self.wet = not self.wet
        return self.wet

    def set_tempo_from_strip(self, position: float) -> float:
        tempo = strip_to_tempo(position)
        self.context.set_context(tempo_bpm=tempo)
        return tempo

    def state(self) -> TransportState:
        until = max(0, int(self._deadline) - self._now) if self.playing else 0
        return TransportState(self.playing, self.current_step, until,
                              self.context.context.tempo_bpm)

    def _step_position(self) -> float:
        """Continuous step-time: 7.0 right as step 7 fires, 8.0 at step 8."""
        if not self.playing:
            return float(self._step_count % NUM_STEPS)
        period = self._period()
        return self._step_count - (self._deadline - self._now) / period

    def record_hit(self, track: int, pressure: float) -> int:
        """Write a pad hit into the step nearest the transport position.

        Rounds to the nearest step; an exact midpoint rounds down.  Returns
        the step index written.  No other step is touched.
        """
        if not 0 <= track < NUM_TRACKS:
            raise PatternError(f"track {track} out of range")
        pos = self._step_position()
        step = math.ceil(pos - 0.5) % NUM_STEPS
        self.pattern.set_step(track, step, True, pressure)
        return step

    def advance(self, frames: int) -> list[StepTrigger]:
        """Move the transport `frames` forward, returning due triggers with
        exact offsets into the span.  Tempo changes apply from the next
        step interval on."""
        start = self._now
        end = start + frames
        out: list[StepTrigger] = []
        if self.playing:
            while int(self._deadline) < end:
                offset = int(self._deadline) - start
                step = self._step_count % NUM_STEPS
                for track_idx in range(NUM_TRACKS):
                    cell = self.pattern.tracks[track_idx][step]
                    if cell.active:
                        out.append(StepTrigger(offset, track_idx, cell.pressure, step))
                self._step_count += 1
                self._deadline += self._period()
        self._now = end
        return out
