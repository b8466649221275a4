"""MIDI 1.0 byte-stream parser.

Incremental: feed() any slicing of the stream and get the same messages.
Running status is honored; realtime bytes (0xF8..0xFF) are transparent even
mid-message; system common bytes (0xF0..0xF7) cancel running status, which
is what keeps SysEx payloads from being misread as note data.  Data bytes
arriving with no status in effect are dropped, so the parser resynchronizes
at the next status byte after garbage.
"""

from __future__ import annotations

from dataclasses import dataclass

NOTE_OFF = 0x80
NOTE_ON = 0x90
POLY_AFTERTOUCH = 0xA0
CONTROL_CHANGE = 0xB0
PROGRAM_CHANGE = 0xC0
CHANNEL_AFTERTOUCH = 0xD0
PITCH_BEND = 0xE0

_DATA_BYTES = {
    NOTE_OFF: 2, NOTE_ON: 2, POLY_AFTERTOUCH: 2, CONTROL_CHANGE: 2,
    PROGRAM_CHANGE: 1, CHANNEL_AFTERTOUCH: 1, PITCH_BEND: 2,
}

KINDS = ("note_on", "note_off", "control_change", "pitch_bend")


@dataclass(frozen=True)
class MidiMessage:
    kind: str
    channel: int
    data1: int
    data2: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown MIDI message kind {self.kind!r}")
        if not 0 <= self.channel <= 15:
            raise ValueError(f"channel {self.channel} outside 0..15")
        if not 0 <= self.data1 <= 127 or not 0 <= self.data2 <= 127:
            raise ValueError("data bytes must be 0..127")


class MidiParser:
    def __init__(self) -> None:
        self._status: int | None = None
        self._data: list[int] = []

    def feed(self, data: bytes) -> list[MidiMessage]:
        out: list[MidiMessage] = []
        for byte in data:
            if byte >= 0xF8:
                continue  # realtime: transparent, even inside a message
            if byte >= 0xF0:
                self._status = None  # system common cancels running status
                self._data.clear()
                continue
            if byte >= 0x80:
                self._status = byte
                self._data.clear()
                continue
            if self._status is None:
                continue  # stray data byte: wait for a status to resync
            self._data.append(byte)
            if len(self._data) == _DATA_BYTES[self._status & 0xF0]:
                msg = self._emit(self._status, self._data)
                if msg is not None:
                    out.append(msg)
                self._data.clear()  # keep status: running status
        return out

    @staticmethod
    def _emit(status: int, data: list[int]) -> MidiMessage | None:
        kind = status & 0xF0
        channel = status & 0x0F
        if kind == NOTE_ON:
            if data[1] == 0:
                return MidiMessage("note_off", channel, data[0], 0)
            return MidiMessage("note_on", channel, data[0], data[1])
        if kind == NOTE_OFF:
            return MidiMessage("note_off", channel, data[0], data[1])
        if kind == CONTROL_CHANGE:
            return MidiMessage("control_change", channel, data[0], data[1])
        if kind == PITCH_BEND:
            return MidiMessage("pitch_bend", channel, data[0], data[1])
        return None  # recognized but untracked (aftertouch, program change)


_STATUS_FOR_KIND = {
    "note_on": NOTE_ON,
    "note_off": NOTE_OFF,
    "control_change": CONTROL_CHANGE,
    "pitch_bend": PITCH_BEND,
}


def midi_encode(messages: list[MidiMessage]) -> bytes:
    """Plain encoding, one status byte per message (no running status)."""
    out = bytearray()
    for m in messages:
        out.append(_STATUS_FOR_KIND[m.kind] | m.channel)
        out.append(m.data1)
        out.append(m.data2)
    return bytes(out)
