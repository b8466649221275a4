"""Acceptance gate: the engine's headline guarantees, end to end.

Each test prints one [PASS]/[FAIL] line (run with -s to see them live).
Tolerances are part of the contract and are stated inline.
"""

import json
import pathlib
import random
import struct
import time

import numpy as np
import pytest

from test_sync import run_convergence

from tutti.core import (
    BUILTIN_SCALES,
    ContextStore,
    MusicalContext,
    PitchClass,
    quantize_to_scale,
)
from tutti.dsp.karplus import pluck
from tutti.ensemble import EnsembleSession
from tutti.instruments import (
    AirHarpModel,
    GridPoint,
    HeadbandModel,
    Orientation,
    SensorFrame,
    TouchKey,
    TouchSynthModel,
)
from tutti.io.midi import MidiMessage, MidiParser, midi_encode
from tutti.io.wavfile import WavSpec, wav_bytes
from tutti.sequencer import StepSequencer
from tutti.sync import OscMessage, osc_decode, osc_encode

DATA = pathlib.Path(__file__).parent / "data"
GOLDEN_REPLAY = DATA / "golden_replay.jsonl"
GOLDEN_WAV = DATA / "golden.wav"
SCALE_CHANGE_TS = 220500  # the golden replay flips the scale here
SR = 44100


def report(name: str, ok: bool, detail: str) -> None:
    print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert ok, f"{name}: {detail}"


def render_golden() -> tuple[np.ndarray, list]:
    lines = GOLDEN_REPLAY.read_text().splitlines()
    session = EnsembleSession()
    audio = session.run_replay(lines, tail_s=2.0)
    return audio, session.note_log


@pytest.fixture(scope="module")
def golden_render():
    return render_golden()


def test_scale_lock_fuzz():
    """Every scale x key: 10^4 random frames through the three pitched
    instrument models produce only in-scale note_ons, in under a minute."""
    started = time.monotonic()
    rng = np.random.default_rng(2024)
    checked = 0
    bad = 0
    for scale in BUILTIN_SCALES:
        for key in range(12):
            store = ContextStore()
            store.set_context(key=key, scale_id=scale.id)
            allowed = store.context.pitch_classes()
            touch = TouchSynthModel(store)
            head = HeadbandModel(store)
            harp = AirHarpModel(store)
            now = 0
            events = []
            for i in range(3334):
                now += int(rng.integers(1, 4000))
                events += touch.process(SensorFrame("touch", TouchKey(
                    int(rng.integers(0, 24)), bool(rng.integers(0, 2)))), now)
                events += head.process(SensorFrame("head", Orientation(
                    float(rng.uniform(-90, 90)), float(rng.uniform(-40, 40)),
                    float(rng.uniform(-40, 40)))), now)
                events += harp.process(SensorFrame("harp", GridPoint(
                    float(rng.uniform(0, 1)), float(rng.uniform(0, 1)),
                    str(rng.integers(0, 3)))), now)
            for ev in events:
                if ev.kind == "note_on":
                    checked += 1
                    if ev.pitch % 12 not in allowed:
                        bad += 1
    elapsed = time.monotonic() - started
    report("scale-lock fuzz",
           bad == 0 and elapsed < 60.0,
           f"{checked} note_ons across {len(BUILTIN_SCALES) * 12} scale/key "
           f"combos, {bad} out of scale, {elapsed:.1f}s (limit 60s)")


def test_quantizer_matches_oracle():
    """quantize_to_scale equals the brute-force nearest-member search on
    every (note, key, scale) input, exactly."""
    mismatches = 0
    total = 0
    for scale in BUILTIN_SCALES:
        for key in range(12):
            ctx = MusicalContext(PitchClass(key), scale, 120.0)
            allowed = ctx.pitch_classes()
            members = [n for n in range(128) if n % 12 in allowed]
            for note in range(128):
                oracle = min(members, key=lambda m: (abs(m - note), m))
                total += 1
                if quantize_to_scale(note, ctx) != oracle:
                    mismatches += 1
    report("quantizer oracle equivalence", mismatches == 0,
           f"{total} inputs (128 notes x 12 keys x {len(BUILTIN_SCALES)} "
           f"scales), {mismatches} mismatches")


def test_karplus_strong_pitch_and_decay():
    """Rendered plucks land their FFT peak within 1% of the requested
    frequency and decay (second-half RMS under half the first half's)."""
    worst_err = 0.0
    worst_ratio = 0.0
    for target in (55.0, 110.0, 220.0, 440.0, 880.0):
        y = pluck(target, duration_s=4.0, sample_rate=SR)
        spectrum = np.abs(np.fft.rfft(y))
        peak_hz = float(np.argmax(spectrum)) * SR / len(y)
        worst_err = max(worst_err, abs(peak_hz - target) / target)
        half = len(y) // 2
        rms = lambda seg: float(np.sqrt(np.mean(seg * seg)))
        ratio = rms(y[half:]) / rms(y[:half])
        worst_ratio = max(worst_ratio, ratio)
    report("plucked-string pitch + decay",
           worst_err < 0.01 and worst_ratio < 0.5,
           f"55..880 Hz: worst pitch error {worst_err * 100:.3f}% (limit 1%), "
           f"worst half-buffer RMS ratio {worst_ratio:.3f} (limit 0.5)")


def _sequencer_triggers(bpm: float, n_triggers: int) -> list[int]:
    store = ContextStore()
    store.set_context(tempo_bpm=bpm)
    seq = StepSequencer(store, SR)
    for step in range(16):
        seq.pattern.set_step(0, step, True, 0.5)
    seq.start()
    frames = []
    now = 0
    while len(frames) <= n_triggers:
        for trig in seq.advance(256):
            frames.append(now + trig.offset)
        now += 256
    return frames


def test_sequencer_drift():
    """After 64 bars the transport is within one frame of the ideal length
    at 60, 120 and 180 BPM, and trigger times repeat exactly run to run."""
    steps = 16 * 64
    worst = 0.0
    stable = True
    for bpm in (60.0, 120.0, 180.0):
        a = _sequencer_triggers(bpm, steps)
        b = _sequencer_triggers(bpm, steps)
        stable = stable and a == b
        ideal = SR * 60.0 / (bpm * 4.0) * steps
        worst = max(worst, abs(a[steps] - a[0] - ideal))
    report("sequencer drift", worst < 1.0 and stable,
           f"64 bars at 60/120/180 BPM: worst deviation {worst:.4f} frames "
           f"(limit 1), trigger lists run-to-run identical: {stable}")


def test_sync_convergence_under_loss():
    """100 master context changes over a 20%-loss transport, 5 clients:
    non-overridden clients converge within two keep-alive periods and the
    overridden client never moves.  (Asserted inside the harness.)"""
    transport = run_convergence(changes=100, n_clients=5, n_overridden=1,
                                loss=0.2, seed=11)
    report("sync convergence under 20% loss", transport.dropped > 0,
           f"100 changes, 5 clients, {transport.dropped} packets dropped, "
           "all converged within 2 keep-alive periods; overridden client pinned")


def test_codec_fuzz_and_wav_determinism():
    """OSC and MIDI survive >= 10^4 round-trip/garbage cases each with zero
    crashes; the golden render's WAV bytes are identical across two runs."""
    rnd = random.Random(99)

    osc_cases = 0
    for _ in range(10_000):
        args = []
        for _ in range(rnd.randrange(0, 5)):
            pick = rnd.randrange(3)
            if pick == 0:
                args.append(rnd.randrange(-2**31, 2**31))
            elif pick == 1:
                args.append(struct.unpack(">f", struct.pack(
                    ">f", rnd.uniform(-1e6, 1e6)))[0])
            else:
                args.append("".join(rnd.choice("abcdefgh/_0123456789")
                                    for _ in range(rnd.randrange(0, 12))))
        msg = OscMessage("/" + "".join(rnd.choice("abcdef")
                                       for _ in range(rnd.randrange(1, 12))),
                         tuple(args))
        assert osc_decode(osc_encode(msg)) == msg
        osc_cases += 1

    midi_cases = 0
    parser = MidiParser()
    for _ in range(5_000):
        kind = rnd.choice(("note_on", "note_off", "control_change", "pitch_bend"))
        d2 = rnd.randrange(1, 128) if kind == "note_on" else rnd.randrange(128)
        msg = MidiMessage(kind, rnd.randrange(16), rnd.randrange(128), d2)
        assert MidiParser().feed(midi_encode([msg])) == [msg]
        midi_cases += 1
    for _ in range(5_000):
        parser.feed(bytes(rnd.randrange(256) for _ in range(rnd.randrange(1, 8))))
        midi_cases += 1
    assert parser.feed(bytes([0x90, 60, 100]))[-1] == \
        MidiMessage("note_on", 0, 60, 100)

    audio_a, _ = render_golden()
    audio_b, _ = render_golden()
    wav_a = wav_bytes(audio_a, WavSpec(SR, 1))
    wav_b = wav_bytes(audio_b, WavSpec(SR, 1))
    report("codec fuzz + WAV determinism",
           wav_a == wav_b and osc_cases >= 10_000 and midi_cases >= 10_000,
           f"OSC {osc_cases} round-trips, MIDI {midi_cases} cases, "
           f"zero crashes; golden WAV identical across two runs "
           f"({len(wav_a)} bytes)")


def test_end_to_end_replay(golden_render):
    """The checked-in replay (all five instruments, scale change mid-file)
    renders byte-identically to the frozen WAV, and no pitched note after
    the change is out of scale.  The glissando voice is exempt by design
    (it is the one unquantized instrument and emits no note_ons); drum hits
    are unpitched one-shots whose pitch field is just the pad index."""
    audio, note_log = golden_render
    rendered = wav_bytes(audio, WavSpec(SR, 1))
    frozen = GOLDEN_WAV.read_bytes()

    scanned = 0
    out_of_scale = 0
    sources = set()
    for entry in note_log:
        sources.add(entry.source)
        if entry.source in ("hand", "drums"):
            continue
        if entry.timestamp < SCALE_CHANGE_TS:
            continue
        scanned += 1
        scale = next(s for s in BUILTIN_SCALES if s.id == entry.scale_id)
        if entry.pitch % 12 not in scale.pitch_classes(PitchClass(entry.key)):
            out_of_scale += 1

    replay_text = GOLDEN_REPLAY.read_text()
    insts = {json.loads(l)["inst"] for l in replay_text.splitlines()
             if l and not l.startswith("#")}
    report("end-to-end replay",
           rendered == frozen and out_of_scale == 0 and scanned > 0
           and len(insts) == 5,
           f"render matches frozen WAV ({len(frozen)} bytes), "
           f"{len(insts)} instruments exercised, {scanned} pitched notes "
           f"after the scale change, {out_of_scale} out of scale")
