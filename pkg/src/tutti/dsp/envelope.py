"""Linear ADSR envelope, rendered block by block."""

from __future__ import annotations

import numpy as np

IDLE, ATTACK, DECAY, SUSTAIN, RELEASE = range(5)


class ADSR:
    def __init__(self, attack_s: float, decay_s: float, sustain: float,
                 release_s: float, sample_rate: int = 44100):
        if not 0.0 <= sustain <= 1.0:
            raise ValueError("sustain must be in 0..1")
        self.sample_rate = sample_rate
        self.attack_n = max(1, int(round(attack_s * sample_rate)))
        self.decay_n = max(1, int(round(decay_s * sample_rate)))
        self.sustain = float(sustain)
        self.release_n = max(1, int(round(release_s * sample_rate)))
        self.stage = IDLE
        self.pos = 0
        self.level = 0.0
        self._seg_start = 0.0

    @property
    def active(self) -> bool:
        return self.stage != IDLE

    @property
    def releasing(self) -> bool:
        return self.stage == RELEASE

    def note_on(self) -> None:
        # Retrigger ramps from the current level, so stolen or overlapping
        # voices do not click.
        self.stage = ATTACK
        self.pos = 0
        self._seg_start = self.level

    def note_off(self) -> None:
        if self.stage in (IDLE, RELEASE):
            return
        self.stage = RELEASE
        self.pos = 0
        self._seg_start = self.level

    def render(self, n: int) -> np.ndarray:
        out = np.zeros(n)
        i = 0
        while i < n:
            if self.stage == IDLE:
                break
            if self.stage == SUSTAIN:
                out[i:] = self.sustain
                self.level = self.sustain
                break
            if self.stage == ATTACK:
                seg_len, target = self.attack_n, 1.0
            elif self.stage == DECAY:
                seg_len, target = self.decay_n, self.sustain
            else:
                seg_len, target = self.release_n, 0.0
            take = min(n - i, seg_len - self.pos)
            frac = (np.arange(self.pos + 1, self.pos + take + 1)) / seg_len
            out[i:i + take] = self._seg_start + (target - self._seg_start) * frac
            self.level = float(out[i + take - 1])
            self.pos += take
            i += take
            if self.pos >= seg_len:
                self.pos = 0
                self._seg_start = self.level
                if self.stage == ATTACK:
                    self.stage = DECAY
                elif self.stage == DECAY:
                    self.stage = SUSTAIN
                else:
                    self.stage = IDLE
                    self.level = 0.0
        return out
