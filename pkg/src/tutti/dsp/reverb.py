"""Schroeder reverberator: four parallel feedback combs into two series
allpasses.  Comb gains are derived from the target decay time, so the tail
falls below -60 dB at rt60_s regardless of sample rate.

The comb and allpass recursions only reach back `delay` samples, so each
block is processed in delay-sized chunks that vectorize cleanly; state
buffers carry the last `delay` samples between calls, which makes the
output independent of how the input is split into blocks.
"""

from __future__ import annotations

import numpy as np

COMB_DELAYS_44K = (1310, 1636, 1813, 1927)
ALLPASS_DELAYS_44K = (221, 75)
ALLPASS_GAIN = 0.7
DEFAULT_RT60_S = 1.2


class _Comb:
    def __init__(self, delay: int, gain: float):
        self.delay = delay
        self.gain = gain
        self.hist = np.zeros(delay)

    def process(self, x: np.ndarray) -> np.ndarray:
        n = len(x)
        d = self.delay
        full = np.concatenate([self.hist, np.zeros(n)])
        pos = d
        while pos < d + n:
            end = min(pos + d, d + n)
            full[pos:end] = x[pos - d:end - d] + self.gain * full[pos - d:end - d]
            pos = end
        self.hist = full[-d:].copy()
        return full[d:]


class _Allpass:
    def __init__(self, delay: int, gain: float):
        self.delay = delay
        self.gain = gain
        self.hx = np.zeros(delay)
        self.hy = np.zeros(delay)

    def process(self, x: np.ndarray) -> np.ndarray:
        n = len(x)
        d = self.delay
        fx = np.concatenate([self.hx, x])
        fy = np.concatenate([self.hy, np.zeros(n)])
        pos = d
        while pos < d + n:
            end = min(pos + d, d + n)
            fy[pos:end] = (-self.gain * fx[pos:end] + fx[pos - d:end - d]
                           + self.gain * fy[pos - d:end - d])
            pos = end
        self.hx = fx[-d:].copy()
        self.hy = fy[-d:].copy()
        return fy[d:]


class SchroederReverb:
    def __init__(self, sample_rate: int = 44100, rt60_s: float = DEFAULT_RT60_S,
                 wet: float = 0.25):
        self.sample_rate = sample_rate
        self.rt60_s = rt60_s
        self.wet = float(min(max(wet, 0.0), 1.0))
        scale = sample_rate / 44100.0
        self._combs = []
        for base in COMB_DELAYS_44K:
            d = max(1, int(round(base * scale)))
            gain = 10.0 ** (-3.0 * d / (rt60_s * sample_rate))
            self._combs.append(_Comb(d, gain))
        self._allpasses = [
            _Allpass(max(1, int(round(base * scale))), ALLPASS_GAIN)
            for base in ALLPASS_DELAYS_44K
        ]

    def set_wet(self, wet: float) -> None:
        self.wet = float(min(max(wet, 0.0), 1.0))

    def process(self, x: np.ndarray) -> np.ndarray:
        """Mix (1 - wet) dry with wet reverb; wet == 0 passes input through
        untouched (and does not advance the reverb state)."""
        if self.wet == 0.0:
            return x.copy()
        y = self.tail(x)
        return (1.0 - self.wet) * x + self.wet * y

    def tail(self, x: np.ndarray) -> np.ndarray:
        """The 100% wet path, for send-bus use."""
        acc = np.zeros(len(x))
        for comb in self._combs:
            acc += comb.process(x)
        acc *= 1.0 / len(self._combs)
        for ap in self._allpasses:
            acc = ap.process(acc)
        return acc

    def reset(self) -> None:
        for comb in self._combs:
            comb.hist[:] = 0.0
        for ap in self._allpasses:
            ap.hx[:] = 0.0
            ap.hy[:] = 0.0
