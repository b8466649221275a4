"""Regenerate the golden replay and its frozen render.

The replay is a scripted ten-second take that exercises all five
instruments and flips the scale mid-file (touch button 0).  The WAV next to
it is the engine's render of that replay, frozen so future runs can be
checked byte-for-byte.  Rerun this only when an intentional engine change
invalidates the golden files, and say so in the commit.

Usage: python3 tools/make_golden.py
"""

import json
import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from tutti.ensemble import EnsembleSession  # noqa: E402
from tutti.io.wavfile import WavSpec, wav_bytes  # noqa: E402

SR = 44100
DATA = pathlib.Path(__file__).resolve().parents[1] / "tests" / "data"


def s(seconds: float) -> int:
    return int(round(seconds * SR))


def build_events() -> list[dict]:
    ev: list[tuple[int, dict]] = []

    def at(when: float, **body):
        ev.append((s(when), body))

    # transport and groove
    at(0.00, inst="drums", t="strip", pos=0.5)            # 120 BPM
    at(0.05, inst="drums", t="btn", i=2, on=True)         # transport start
    at(0.10, inst="drums", t="btn", i=1, on=True)         # record mode on
    at(0.60, inst="drums", t="pad", i=0, p=0.9)           # commit kick step
    at(1.10, inst="drums", t="pad", i=2, p=0.5)           # commit hat step
    at(1.35, inst="drums", t="btn", i=1, on=True)         # record mode off
    at(1.60, inst="drums", t="pad", i=1, p=0.8)           # immediate snare

    # touch melody in the opening key
    for i, (t, key) in enumerate([(0.2, 0), (0.8, 2), (1.4, 4), (2.0, 7)]):
        at(t, inst="touch", t="key", i=key, on=True)
        at(t + 0.5, inst="touch", t="key", i=key, on=False)

    # headband: yaw steps, a harmony lean, some reverb depth
    for i in range(8):
        at(2.2 + 0.15 * i, inst="head", t="orient",
           yaw=round(-20 + 60 * i / 7, 2), pitch=0.0, roll=0.0)
    at(2.8, inst="head", t="orient", yaw=30.0, pitch=10.0, roll=30.0)
    at(3.4, inst="head", t="orient", yaw=30.0, pitch=10.0, roll=0.0)

    # air harp strum, left to right
    for i in range(6):
        at(3.6 + 0.16 * i, inst="harp", t="grid",
           x=round(0.08 + 0.14 * i, 3), y=0.2, id="left")

    # handheld glissando sweep (the one unquantized voice)
    for i in range(9):
        at(4.4 + 0.1 * i, inst="hand", t="orient",
           yaw=0.0, pitch=round(-30 + 60 * i / 8, 2), roll=-10.0)

    # the mid-file context change: cycle scale (major -> natural minor)
    at(5.0, inst="touch", t="btn", i=0, on=True)

    # everything plays again in the new scale
    for t, key in [(5.2, 1), (5.8, 3), (6.4, 8)]:
        at(t, inst="touch", t="key", i=key, on=True)
        at(t + 0.5, inst="touch", t="key", i=key, on=False)
    for i in range(5):
        at(5.4 + 0.3 * i, inst="head", t="orient",
           yaw=round(40 - 15 * i, 2), pitch=-5.0, roll=0.0)
    at(6.0, inst="head", t="orient", yaw=10.0, pitch=-5.0, roll=28.0)
    at(6.6, inst="head", t="orient", yaw=10.0, pitch=-5.0, roll=0.0)
    for i in range(6):
        at(6.8 + 0.16 * i, inst="harp", t="grid",
           x=round(0.92 - 0.14 * i, 3), y=0.55, id="left")
    at(7.0, inst="drums", t="pad", i=3, p=0.6)
    at(7.5, inst="drums", t="pad", i=0, p=1.0)
    for i in range(9):
        at(7.8 + 0.1 * i, inst="hand", t="orient",
           yaw=0.0, pitch=round(30 - 60 * i / 8, 2), roll=5.0)

    # wind down
    at(8.8, inst="drums", t="strip", pos=0.25)            # 90 BPM
    at(9.0, inst="touch", t="key", i=0, on=True)
    at(9.5, inst="drums", t="btn", i=2, on=True)          # transport stop
    at(9.6, inst="touch", t="key", i=0, on=False)

    ev.sort(key=lambda pair: pair[0])
    return [{**body, "ts": ts} for ts, body in ev]


def main() -> None:
    DATA.mkdir(parents=True, exist_ok=True)
    lines = build_events()
    replay_path = DATA / "golden_replay.jsonl"
    with open(replay_path, "w", encoding="utf-8") as fh:
        fh.write("# golden take: all five instruments, scale change at ts=220500\n")
        for entry in lines:
            fh.write(json.dumps(entry, separators=(",", ":")) + "\n")

    session = EnsembleSession()
    audio = session.run_replay([json.dumps(e) for e in lines], tail_s=2.0)
    wav_path = DATA / "golden.wav"
    wav_path.write_bytes(wav_bytes(audio, WavSpec(SR, 1)))

    notes = session.note_log
    changed = [n for n in notes if n.timestamp >= s(5.0)]
    print(f"wrote {replay_path} ({len(lines)} lines)")
    print(f"wrote {wav_path} ({len(audio)} frames, "
          f"{len(audio) / SR:.2f} s, {wav_path.stat().st_size} bytes)")
    print(f"note log: {len(notes)} notes, {len(changed)} after the change")
    by_source = {}
    for n in notes:
        by_source[n.source] = by_source.get(n.source, 0) + 1
    print("by source:", dict(sorted(by_source.items())))


if __name__ == "__main__":
    main()
