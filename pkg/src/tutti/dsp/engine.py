"""Block-based render engine.

Audio advances in fixed-size blocks.  Scheduled events land on their exact
frame: each block is split at event offsets and every chain renders the
sub-segments between them, so a note that starts mid-block starts mid-block
in the output, not at the next boundary.  Chains produce dry signal plus a
reverb send amount; the master bus sums dry and the shared reverb tail,
then soft-clips.  The engine itself is free of randomness, so identical
event schedules give identical output.
"""

from __future__ import annotations

import heapq
from typing import Callable

import numpy as np

from ..core import CONTROL, NOTE_OFF, NOTE_ON, PITCH_GLIDE, EngineEvent
from .filters import LowpassFilter
from .reverb import SchroederReverb

DEFAULT_SAMPLE_RATE = 44100
DEFAULT_BLOCK_SIZE = 256
CLIP_THRESHOLD = 0.9


def soft_clip(x: np.ndarray, threshold: float = CLIP_THRESHOLD) -> np.ndarray:
    """Pass signal below the threshold untouched, squash the rest with tanh
    so the result stays inside (-1, 1) with a continuous slope."""
    ax = np.abs(x)
    over = ax > threshold
    if not np.any(over):
        return x
    span = 1.0 - threshold
    out = x.copy()
    out[over] = np.sign(x[over]) * (
        threshold + span * np.tanh((ax[over] - threshold) / span))
    return out


def default_cutoff_map(value: float) -> float:
    """0..1 control onto 200 Hz .. 8 kHz, exponential."""
    return 200.0 * 40.0 ** value


class Chain:
    """One instrument's signal path: generator -> optional lowpass -> bus.

    `generator` needs note_on/note_off/render; glide and control routing are
    optional.  The filter can be bypassed (then the generator output passes
    through bit-exact), which is how the drums' dry/effected toggle works.
    """

    def __init__(self, name: str, generator, sample_rate: int = DEFAULT_SAMPLE_RATE,
                 use_filter: bool = False, cutoff_hz: float = 3000.0,
                 resonance: float = 0.2, reverb_send: float = 0.0,
                 cutoff_map: Callable[[float], float] = default_cutoff_map):
        self.name = name
        self.generator = generator
        self.filter = LowpassFilter(sample_rate, cutoff_hz, resonance) if use_filter else None
        self.filter_enabled = use_filter
        self.reverb_send = float(reverb_send)
        self.cutoff_map = cutoff_map

    def set_filter_enabled(self, enabled: bool) -> None:
        if self.filter is None:
            return
        if enabled and not self.filter_enabled:
            self.filter.reset()
        self.filter_enabled = enabled

    def handle_event(self, ev: EngineEvent) -> None:
        if ev.kind == NOTE_ON:
            self.generator.note_on(ev.pitch, ev.velocity)
        elif ev.kind == NOTE_OFF:
            self.generator.note_off(ev.pitch)
        elif ev.kind == PITCH_GLIDE:
            if hasattr(self.generator, "glide"):
                self.generator.glide(ev.value)
        elif ev.kind == CONTROL:
            self._handle_control(ev.controller, ev.value)

    def _handle_control(self, controller: str, value: float) -> None:
        if controller == "cutoff" and self.filter is not None:
            self.filter.set(cutoff_hz=self.cutoff_map(value))
        elif controller == "resonance" and self.filter is not None:
            self.filter.set(resonance=value)
        elif controller == "reverb_send":
            self.reverb_send = value
        elif controller == "filter_on":
            self.set_filter_enabled(value >= 0.5)
        # unknown controllers are ignored so stale senders cannot crash audio

    def render(self, n: int) -> np.ndarray:
        dry = self.generator.render(n)
        if self.filter is not None and self.filter_enabled:
            dry = self.filter.process(dry)
        return dry


class RenderEngine:
    def __init__(self, sample_rate: int = DEFAULT_SAMPLE_RATE,
                 block_size: int = DEFAULT_BLOCK_SIZE,
                 reverb: SchroederReverb | None = None):
        self.sample_rate = sample_rate
        self.block_size = block_size
        self.reverb = reverb if reverb is not None else SchroederReverb(sample_rate)
        self.chains: dict[str, Chain] = {}
        self.frame = 0
        self._heap: list[tuple[int, int, EngineEvent]] = []
        self._serial = 0

    def add_chain(self, chain: Chain) -> Chain:
        if chain.name in self.chains:
            raise ValueError(f"duplicate chain {chain.name!r}")
        self.chains[chain.name] = chain
        return chain

    def schedule(self, ev: EngineEvent) -> None:
        heapq.heappush(self._heap, (ev.timestamp, self._serial, ev))
        self._serial += 1

    def render_block(self) -> np.ndarray:
        start = self.frame
        end = start + self.block_size
        due: list[tuple[int, int, EngineEvent]] = []
        while self._heap and self._heap[0][0] < end:
            due.append(heapq.heappop(self._heap))

        # Late events (scheduled in the past) fire at the top of this block.
        boundaries = sorted({max(0, ts - start) for ts, _, _ in due})
        dry = np.zeros(self.block_size)
        send = np.zeros(self.block_size)
        pos = 0
        pending = iter(due)
        nxt = next(pending, None)
        for cut in boundaries + [self.block_size]:
            if cut > pos:
                for chain in self.chains.values():
                    seg = chain.render(cut - pos)
                    dry[pos:cut] += seg
                    if chain.reverb_send > 0.0:
                        send[pos:cut] += chain.reverb_send * seg
                pos = cut
            while nxt is not None and max(0, nxt[0] - start) <= cut:
                ev = nxt[2]
                chain = self.chains.get(ev.source)
                if chain is not None:
                    chain.handle_event(ev)
                nxt = next(pending, None)

        master = dry + self.reverb.tail(send)
        self.frame = end
        return soft_clip(master)

    def render_frames(self, n: int) -> np.ndarray:
        """Render at least n frames and return exactly n."""
        blocks = []
        rendered = 0
        while rendered < n:
            blocks.append(self.render_block())
            rendered += self.block_size
        return np.concatenate(blocks)[:n]


def to_stereo(mono: np.ndarray) -> np.ndarray:
    """Duplicate the mono bus into two columns."""
    return np.column_stack([mono, mono])
