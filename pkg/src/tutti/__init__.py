"""tutti: a scale-locked ensemble engine.

Sensor frames from wearable and tabletop controllers drive five instrument
models whose output is quantized to a shared key and scale, rendered by
software sound generators, and kept in sync across machines over OSC.
"""

__version__ = "0.1.0"

from .config import EngineConfig, default_config, load_config
from .core import (
    BUILTIN_SCALES,
    ContextStore,
    EngineEvent,
    MusicalContext,
    PitchClass,
    Scale,
    ScaleTable,
    degree_to_midi,
    diatonic_harmony,
    midi_to_hz,
    quantize_to_scale,
)
from .ensemble import EnsembleSession, LiveRunner, NoteLogEntry, ReplayError

__all__ = [
    "BUILTIN_SCALES",
    "ContextStore",
    "EngineConfig",
    "EngineEvent",
    "EnsembleSession",
    "LiveRunner",
    "MusicalContext",
    "NoteLogEntry",
    "PitchClass",
    "ReplayError",
    "Scale",
    "ScaleTable",
    "default_config",
    "degree_to_midi",
    "diatonic_harmony",
    "load_config",
    "midi_to_hz",
    "quantize_to_scale",
    "__version__",
]
