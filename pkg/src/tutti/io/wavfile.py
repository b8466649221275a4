"""RIFF/WAVE PCM16 little-endian writer.

Hand-rolled header so output bytes are fully pinned down: identical samples
in, identical file out, which is what the golden-render tests anchor on.
Floats are hard-clipped to [-1, 1] before conversion; +1.0 maps to 32767.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

BITS_PER_SAMPLE = 16


@dataclass(frozen=True)
class WavSpec:
    sample_rate: int = 44100
    channels: int = 1

    def __post_init__(self):
        if self.channels not in (1, 2):
            raise ValueError(f"channels must be 1 or 2, got {self.channels}")
        if self.sample_rate <= 0:
            raise ValueError("sample rate must be positive")


def _to_int16(samples: np.ndarray) -> np.ndarray:
    clipped = np.clip(np.asarray(samples, dtype=np.float64), -1.0, 1.0)
    return np.round(clipped * 32767.0).astype("<i2")


def wav_bytes(samples: np.ndarray, spec: WavSpec = WavSpec()) -> bytes:
    """The complete file image for the given samples.

    `samples` is float in [-1, 1], shape (n,) for mono or (n, channels);
    mono input to a stereo spec is duplicated across both channels.
    """
    data = np.asarray(samples)
    if data.ndim == 1:
        if spec.channels == 2:
            data = np.column_stack([data, data])
    elif data.ndim == 2:
        if data.shape[1] != spec.channels:
            raise ValueError(
                f"sample shape {data.shape} does not match {spec.channels} channel(s)")
    else:
        raise ValueError(f"samples must be 1-D or 2-D, got shape {data.shape}")
    pcm = _to_int16(data).tobytes()

    block_align = spec.channels * BITS_PER_SAMPLE // 8
    byte_rate = spec.sample_rate * block_align
    header = b"RIFF" + struct.pack("<I", 36 + len(pcm)) + b"WAVE"
    header += b"fmt " + struct.pack("<IHHIIHH", 16, 1, spec.channels,
                                    spec.sample_rate, byte_rate, block_align,
                                    BITS_PER_SAMPLE)
    header += b"data" + struct.pack("<I", len(pcm))
    return header + pcm


def wav_write(path, samples: np.ndarray, spec: WavSpec = WavSpec()) -> None:
    with open(path, "wb") as fh:
        fh.write(wav_bytes(samples, spec))
