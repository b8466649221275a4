"""Session wiring: sensor frames in, mixed audio out.

An EnsembleSession owns the shared musical context, one instrument model and
one signal chain per instrument, the drum sequencer, and the render engine.
Frames go through their model, the resulting events are scheduled on exact
engine frames, and every note_on lands in a note log together with the
context that produced it, so a rendered take can be audited for key/scale
discipline afterwards.

Offline, `run_replay` consumes timestamp-stamped sensor lines and renders
faster than real time.  Live, `LiveRunner` paces the same block loop against
the wall clock and adds the UDP/WebSocket/sync plumbing.
"""

from __future__ import annotations

import json
import queue
import threading
import time
from dataclasses import asdict, dataclass
from typing import Callable, Iterable

import numpy as np

from .config import EngineConfig, default_config
from .core import (
    NOTE_ON,
    ContextError,
    ContextStore,
    MusicalContext,
    degree_to_midi,
    midi_to_hz,
)
from .dsp import Chain, DrumKit, MonoGlideSynth, PolySynth, RenderEngine
from .instruments import (
    HAND_BASE_OCTAVE,
    AirHarpModel,
    DrumPadsModel,
    FrameRejected,
    HandheldModel,
    HeadbandModel,
    PadPressure,
    SensorFrame,
    Strip,
    TouchKey,
    TouchSynthModel,
)
from .io.sensors import SensorLineError, parse_line
from .sequencer import StepSequencer, pressure_to_cutoff_hz
from .sync import SyncClient, SyncMaster, UdpBroadcastTransport, UdpReceiver

POLY_INSTRUMENTS = ("touch", "head", "harp")
METER_INTERVAL_S = 1.0 / 30.0

# Wire names that map onto a canonical instrument id; numbered instances
# ("touch1", "pads2") also resolve to their base instrument.
INSTRUMENT_ALIASES = {"pads": "drums"}


class ReplayError(ValueError):
    """A replay file could not be used; message carries the line number."""


@dataclass(frozen=True)
class NoteLogEntry:
    """One note_on as dispatched, with the context in force at that moment."""

    timestamp: int
    source: str
    pitch: int
    velocity: int
    key: int
    scale_id: int


class EnsembleSession:
    """All instruments wired into one render engine."""

    def __init__(self, config: EngineConfig | None = None):
        cfg = config if config is not None else default_config()
        self.config = cfg
        self.store = ContextStore(scales=cfg.scales)
        self.engine = RenderEngine(cfg.sample_rate, cfg.block_size)
        self.sequencer = StepSequencer(self.store, cfg.sample_rate)
        self.note_log: list[NoteLogEntry] = []

        self.synths: dict[str, PolySynth] = {}
        self._preset_name: dict[str, str] = {}
        for idx, inst in enumerate(POLY_INSTRUMENTS):
            name = cfg.instrument_preset_name(inst)
            patch = cfg.preset(name)
            synth = PolySynth(patch, cfg.sample_rate, seed=idx + 1)
            self.synths[inst] = synth
            self._preset_name[inst] = name
            self.engine.add_chain(Chain(
                inst, synth, cfg.sample_rate, use_filter=True,
                cutoff_hz=patch.cutoff_hz, resonance=patch.resonance,
                reverb_send=patch.reverb_send))

        hand_patch = cfg.preset(cfg.instrument_preset_name("hand"))
        self.glide_synth = MonoGlideSynth(
            cfg.sample_rate, shape=hand_patch.oscillators[0][0],
            gain=hand_patch.gain)
        self.engine.add_chain(Chain(
            "hand", self.glide_synth, cfg.sample_rate, use_filter=True,
            cutoff_hz=hand_patch.cutoff_hz, resonance=hand_patch.resonance,
            reverb_send=hand_patch.reverb_send))

        self.drum_kit = DrumKit(cfg.sample_rate)
        self._drum_chain = self.engine.add_chain(Chain(
            "drums", self.drum_kit, cfg.sample_rate, use_filter=True,
            cutoff_hz=pressure_to_cutoff_hz(1.0), resonance=0.2,
            reverb_send=0.08, cutoff_map=pressure_to_cutoff_hz))
        self.sequencer.wet = bool(
            cfg.instruments.get("drums", {}).get("wet", True))
        self._drum_chain.set_filter_enabled(self.sequencer.wet)

        self.models = {
            "touch": TouchSynthModel(self.store, cfg.sample_rate,
                                     on_cycle_preset=self.cycle_preset),
            "head": HeadbandModel(self.store, cfg.sample_rate),
            "hand": HandheldModel(self.store, cfg.sample_rate),
            "harp": AirHarpModel(self.store, cfg.sample_rate),
            "drums": DrumPadsModel(self.store, self.sequencer,
                                   cfg.sample_rate),
        }

        self.store.add_listener(self._on_context_change)
        self._on_context_change(self.store.context)

    # ---- context plumbing ----------------------------------------------

    def _on_context_change(self, ctx: MusicalContext) -> None:
        root = degree_to_midi(0, HAND_BASE_OCTAVE, ctx)
        self.glide_synth.set_root(midi_to_hz(root))

    # ---- presets ---------------------------------------------------------

    def set_preset(self, instrument: str, name: str) -> None:
        if instrument not in self.synths:
            raise ValueError(f"no preset slot for instrument {instrument!r}")
        patch = self.config.preset(name)
        self.synths[instrument].set_patch(patch)
        chain = self.engine.chains[instrument]
        if chain.filter is not None:
            chain.filter.set(cutoff_hz=patch.cutoff_hz,
                             resonance=patch.resonance)
        chain.reverb_send = patch.reverb_send
        self._preset_name[instrument] = name

    def cycle_preset(self, instrument: str = "touch") -> str:
        order = self.config.preset_order
        cur = self._preset_name.get(instrument, order[0])
        name = order[(order.index(cur) + 1) % len(order)] \
            if cur in order else order[0]
        self.set_preset(instrument, name)
        return name

    def preset_names(self) -> dict[str, str]:
        return dict(self._preset_name)

    # ---- frame and event flow -------------------------------------------

    def resolve_instrument(self, name: str) -> str | None:
        """Canonical instrument id for a wire name, or None."""
        if name in self.models:
            return name
        alias = INSTRUMENT_ALIASES.get(name)
        if alias in self.models:
            return alias
        base = name.rstrip("0123456789")
        if base != name:
            return self.resolve_instrument(base)
        return None

    def feed_frame(self, frame: SensorFrame, at: int | None = None) -> None:
        """Run a frame through its model; events schedule at frame `at`
        (default: the start of the next rendered block)."""
        inst = self.resolve_instrument(frame.instrument)
        if inst is None:
            raise FrameRejected(frame, f"unknown instrument {frame.instrument!r}")
        now = self.engine.frame if at is None else at
        self._dispatch(self.models[inst].process(frame, now))

    def _dispatch(self, events) -> None:
        ctx = self.store.context
        for ev in events:
            self.engine.schedule(ev)
            if ev.kind == NOTE_ON:
                self.note_log.append(NoteLogEntry(
                    ev.timestamp, ev.source, ev.pitch, ev.velocity,
                    int(ctx.key), ctx.scale.id))

    def render_block(self) -> np.ndarray:
        """Advance the sequencer across the next block, schedule its hits at
        exact offsets, then render."""
        self._drum_chain.set_filter_enabled(self.sequencer.wet)
        start = self.engine.frame
        drums = self.models["drums"]
        for trig in self.sequencer.advance(self.engine.block_size):
            at = start + trig.offset
            self._dispatch(drums.step_events(trig, at))
        return self.engine.render_block()

    def release_all(self) -> None:
        now = self.engine.frame
        for model in self.models.values():
            self._dispatch(model.release_all(now))

    # ---- offline replay ---------------------------------------------------

    def run_replay(self, lines: Iterable[str], tail_s: float = 2.0,
                   duration_s: float | None = None) -> np.ndarray:
        """Render a replay: sensor lines with non-decreasing "ts" fields.

        Returns the mono master bus.  Without an explicit duration the render
        runs `tail_s` past the last event so releases and reverb ring out.
        """
        parsed: list[tuple[int, SensorFrame]] = []
        last_ts = 0
        for lineno, raw in enumerate(lines, 1):
            raw = raw.strip()
            if not raw or raw.startswith("#"):
                continue
            try:
                pl = parse_line(raw)
            except SensorLineError as exc:
                raise ReplayError(f"line {lineno}: {exc}") from exc
            if self.resolve_instrument(pl.frame.instrument) is None:
                raise ReplayError(
                    f"line {lineno}: unknown instrument {pl.frame.instrument!r}")
            if pl.ts is None:
                raise ReplayError(f"line {lineno}: replay lines need a 'ts' field")
            if pl.ts < last_ts:
                raise ReplayError(
                    f"line {lineno}: ts {pl.ts} goes backwards (after {last_ts})")
            last_ts = pl.ts
            parsed.append((pl.ts, pl.frame))

        sr = self.config.sample_rate
        if duration_s is not None:
            total = int(round(duration_s * sr))
        else:
            total = (parsed[-1][0] if parsed else 0) + int(round(tail_s * sr))

        blocks: list[np.ndarray] = []
        idx = 0
        while self.engine.frame < total:
            block_end = self.engine.frame + self.engine.block_size
            while idx < len(parsed) and parsed[idx][0] < block_end:
                ts, frame = parsed[idx]
                idx += 1
                try:
                    self.feed_frame(frame, at=ts)
                except FrameRejected as exc:
                    raise ReplayError(str(exc)) from exc
            blocks.append(self.render_block())
        if not blocks:
            return np.zeros(0)
        return np.concatenate(blocks)[:total]

    # ---- UI control bridge -------------------------------------------------

    def handle_control(self, obj: dict) -> dict | None:
        """Apply one inbound UI message; returns an error payload or None."""
        if not isinstance(obj, dict):
            return {"type": "error", "detail": "message must be an object"}
        kind = obj.get("type")
        try:
            if kind == "pad":
                self.feed_frame(SensorFrame("drums", PadPressure(
                    int(obj["i"]), float(obj["p"]))))
            elif kind == "key":
                self.feed_frame(SensorFrame("touch", TouchKey(
                    int(obj["i"]), bool(obj["on"]))))
            elif kind == "strip":
                self.feed_frame(SensorFrame("drums", Strip(float(obj["pos"]))))
            elif kind == "set_context":
                self.store.set_context(
                    key=obj.get("key"), scale_id=obj.get("scale"),
                    tempo_bpm=obj.get("tempo"))
            elif kind == "preset":
                name = obj.get("name")
                if name is None and "id" in obj:
                    order = self.config.preset_order
                    name = order[int(obj["id"]) % len(order)]
                if name is None:
                    return {"type": "error", "detail": "preset needs name or id"}
                self.set_preset(str(obj.get("inst", "touch")), str(name))
            elif kind == "toggle_fx":
                self.sequencer.toggle_dry_wet()
            elif kind == "transport":
                want = obj.get("playing")
                if want is None:
                    want = not self.sequencer.playing
                if want and not self.sequencer.playing:
                    self.sequencer.start()
                elif not want:
                    self.sequencer.stop()
            else:
                return {"type": "error", "detail": f"unknown type {kind!r}"}
        except (KeyError, TypeError, ValueError, ContextError) as exc:
            return {"type": "error", "detail": f"bad {kind} message: {exc}"}
        return None

    # ---- outbound state payloads -------------------------------------------

    def context_message(self) -> dict:
        ctx = self.store.context
        return {"type": "context", "key": int(ctx.key),
                "scale": ctx.scale.id, "scale_name": ctx.scale.name,
                "tempo": ctx.tempo_bpm}

    def pattern_message(self) -> dict:
        return {"type": "pattern", "grid": self.sequencer.pattern.to_dict()["tracks"],
                "playing": self.sequencer.playing, "wet": self.sequencer.wet}

    def step_message(self) -> dict:
        return {"type": "step", "value": self.sequencer.current_step}

    def snapshot(self) -> dict:
        """Everything a fresh UI needs to draw itself."""
        return {"context": self.context_message(),
                "pattern": self.pattern_message(),
                "step": self.step_message(),
                "presets": {"order": list(self.config.preset_order),
                            "active": self.preset_names()},
                "note_count": len(self.note_log)}

    def note_log_dicts(self) -> list[dict]:
        return [asdict(e) for e in self.note_log]


class LiveRunner:
    """Real-time pump around a session: UDP sensor lines and WebSocket
    control in, paced audio blocks and UI state pushes out.

    All inputs funnel into one queue drained at block boundaries, so the
    audio path itself stays single-threaded and deterministic given the
    arrival order.
    """

    def __init__(self, session: EnsembleSession,
                 audio_sink: Callable[[np.ndarray], None] | None = None,
                 realtime: bool = True):
        self.session = session
        self.audio_sink = audio_sink
        self.realtime = realtime
        self._queue: queue.Queue = queue.Queue()
        self._stop = threading.Event()
        self._ws_server = None
        self._udp = None
        self._sync_master = None
        self._sync_client = None
        self._sync_receiver = None
        self.blocks_rendered = 0

    # transports are attached before run() so tests can skip them all

    def attach_websocket(self, server) -> None:
        self._ws_server = server

    def on_ws_message(self, obj: dict, send) -> None:
        self._queue.put(("control", obj, send))

    def attach_udp_sensors(self, port: int | None = None) -> None:
        def on_datagram(data: bytes) -> None:
            try:
                parsed = parse_line(data.decode("utf-8", "replace"))
            except SensorLineError:
                return
            if self.session.resolve_instrument(parsed.frame.instrument) is None:
                return
            self._queue.put(("frame", parsed.frame, None))

        if port is None:
            port = self.session.config.transports.sensor_udp_port
        self._udp = UdpReceiver(on_datagram, port=port)
        self._udp.start()

    def attach_sync(self) -> None:
        sync = self.session.config.sync
        if sync.role == "master":
            transport = UdpBroadcastTransport(sync.port, sync.broadcast_addr)
            self._sync_master = SyncMaster(self.session.store, transport,
                                           keepalive_ms=sync.keepalive_ms)
        elif sync.role == "client":
            client = SyncClient(self.session.store)
            self._sync_client = client
            self._sync_receiver = UdpReceiver(
                lambda data: client.handle_packet(data, int(time.monotonic() * 1000)),
                port=sync.port)
            self._sync_receiver.start()

    def stop(self) -> None:
        self._stop.set()

    def _drain_queue(self) -> None:
        while True:
            try:
                item = self._queue.get_nowait()
            except queue.Empty:
                return
            kind = item[0]
            if kind == "frame":
                try:
                    self.session.feed_frame(item[1])
                except FrameRejected:
                    pass
            elif kind == "control":
                error = self.session.handle_control(item[1])
                if error is not None and item[2] is not None:
                    item[2](error)

    def _push_state(self, prev: dict, block: np.ndarray, now: float) -> None:
        server = self._ws_server
        if server is None:
            return
        ctx_msg = self.session.context_message()
        if ctx_msg != prev.get("context"):
            prev["context"] = ctx_msg
            server.broadcast(ctx_msg)
        step_msg = self.session.step_message()
        if step_msg != prev.get("step"):
            prev["step"] = step_msg
            server.broadcast(step_msg)
        pattern_msg = self.session.pattern_message()
        if pattern_msg != prev.get("pattern"):
            prev["pattern"] = pattern_msg
            server.broadcast(pattern_msg)
        if now - prev.get("meter_at", 0.0) >= METER_INTERVAL_S:
            prev["meter_at"] = now
            level = float(np.sqrt(np.mean(block * block))) if block.size else 0.0
            server.broadcast({"type": "meter", "value": round(level, 5)})

    def run(self, duration_s: float | None = None) -> None:
        """Block loop until stopped (or for duration_s)."""
        sr = self.session.config.sample_rate
        block_s = self.session.config.block_size / sr
        prev_state: dict = {}
        started = time.monotonic()
        next_deadline = started
        while not self._stop.is_set():
            now = time.monotonic()
            if duration_s is not None and now - started >= duration_s:
                break
            self._drain_queue()
            if self._sync_master is not None:
                self._sync_master.tick(int(now * 1000))
            block = self.session.render_block()
            self.blocks_rendered += 1
            if self.audio_sink is not None:
                self.audio_sink(block)
            self._push_state(prev_state, block, now)
            next_deadline += block_s
            if self.realtime:
                delay = next_deadline - time.monotonic()
                if delay > 0:
                    time.sleep(delay)
                else:
                    next_deadline = time.monotonic()
        self.shutdown()

    def shutdown(self) -> None:
        if self._udp is not None:
            self._udp.stop()
        if self._sync_receiver is not None:
            self._sync_receiver.stop()
        if self._sync_master is not None and hasattr(self._sync_master.transport, "close"):
            self._sync_master.transport.close()
        if self._ws_server is not None:
            self._ws_server.stop()
