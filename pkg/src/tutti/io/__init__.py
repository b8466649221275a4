"""Boundary codecs and transports: MIDI bytes, sensor lines, WAV files,
and the WebSocket control bridge."""

from .midi import MidiMessage, MidiParser, midi_encode
from .sensors import SensorLineError, frame_to_line, parse_line
from .wavfile import WavSpec, wav_bytes, wav_write

__all__ = [
    "MidiMessage",
    "MidiParser",
    "SensorLineError",
    "WavSpec",
    "frame_to_line",
    "midi_encode",
    "parse_line",
    "wav_bytes",
    "wav_write",
]
