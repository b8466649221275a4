"""Software sound generation: oscillators, plucked string, drums, filter,
reverb, the polyphonic synth, and the block-based render engine."""

from .drums import DrumKit, render_drum
from .engine import Chain, RenderEngine, soft_clip, to_stereo
from .filters import LowpassFilter
from .karplus import pluck
from .reverb import SchroederReverb
from .synth import MonoGlideSynth, PolySynth, SynthPatch

__all__ = [
    "Chain",
    "DrumKit",
    "LowpassFilter",
    "MonoGlideSynth",
    "PolySynth",
    "RenderEngine",
    "SchroederReverb",
    "SynthPatch",
    "pluck",
    "render_drum",
    "soft_clip",
    "to_stereo",
]
