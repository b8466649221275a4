"""Command line entry point.

Commands: run (live engine), render (replay file to WAV), simulate (emit
scripted sensor lines), sync-master / sync-client (standalone sync roles),
list-scales, list-presets.  Exit codes: 0 success, 1 runtime failure,
2 configuration or usage error.
"""

from __future__ import annotations

import argparse
import json
import random
import socket
import sys
import threading
import time
from dataclasses import replace

import numpy as np

from .config import ConfigError, load_config
from .core import ContextStore, PITCH_CLASS_NAMES
from .dsp import to_stereo
from .ensemble import EnsembleSession, LiveRunner, ReplayError
from .io.wavfile import WavSpec, wav_write
from .io.wsbridge import WebSocketServer
from .sync import SyncClient, SyncMaster, UdpBroadcastTransport, UdpReceiver

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_CONFIG = 2

SIM_INSTRUMENTS = ("touch", "head", "hand", "harp", "drums", "pads")
SIM_PATTERNS = ("four-on-floor", "backbeat", "random")
SIM_AXES = ("yaw", "pitch", "roll", "tilt")


def _fail(message: str, code: int) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def _load(args):
    return load_config(getattr(args, "config", None))


# ---- run ------------------------------------------------------------------


def cmd_run(args) -> int:
    cfg = _load(args)
    if args.role is not None or args.port is not None:
        sync = cfg.sync
        if args.role is not None:
            sync = replace(sync, role=args.role)
        if args.port is not None:
            sync = replace(sync, port=args.port)
        cfg = replace(cfg, sync=sync)

    session = EnsembleSession(cfg)
    blocks: list[np.ndarray] = []
    sink = blocks.append if args.out else None
    runner = LiveRunner(session, audio_sink=sink, realtime=not args.fast)

    ws_port = cfg.transports.ws_port if args.ws_port is None else args.ws_port
    try:
        server = WebSocketServer(runner.on_ws_message, port=ws_port)
        server.start()
        runner.attach_websocket(server)
        runner.attach_udp_sensors(args.sensor_port)
        runner.attach_sync()
    except OSError as exc:
        runner.shutdown()
        return _fail(f"cannot open transport: {exc}", EXIT_RUNTIME)

    print(f"engine running: sample_rate={cfg.sample_rate} "
          f"block={cfg.block_size} ws_port={server.port} "
          f"sync_role={cfg.sync.role}")
    try:
        runner.run(duration_s=args.duration)
    except KeyboardInterrupt:
        runner.stop()
        runner.shutdown()
    if args.out:
        audio = np.concatenate(blocks) if blocks else np.zeros(0)
        _write_wav(args.out, audio, cfg.sample_rate, args.stereo)
        print(f"wrote {args.out} ({len(audio)} frames)")
    print(f"stopped after {runner.blocks_rendered} blocks")
    return EXIT_OK


# ---- render -----------------------------------------------------------------


def _write_wav(path: str, audio: np.ndarray, sample_rate: int,
               stereo: bool) -> None:
    if stereo:
        wav_write(path, to_stereo(audio), WavSpec(sample_rate, 2))
    else:
        wav_write(path, audio, WavSpec(sample_rate, 1))


def cmd_render(args) -> int:
    cfg = _load(args)
    session = EnsembleSession(cfg)
    try:
        with open(args.replay, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        return _fail(f"cannot read replay: {exc}", EXIT_RUNTIME)
    try:
        audio = session.run_replay(lines, tail_s=args.tail,
                                   duration_s=args.duration)
    except ReplayError as exc:
        return _fail(f"replay {args.replay}: {exc}", EXIT_RUNTIME)
    try:
        _write_wav(args.out, audio, cfg.sample_rate, args.stereo)
    except OSError as exc:
        return _fail(f"cannot write {args.out}: {exc}", EXIT_RUNTIME)
    if args.note_log:
        with open(args.note_log, "w", encoding="utf-8") as fh:
            json.dump(session.note_log_dicts(), fh, indent=0)
            fh.write("\n")
    print(f"rendered {len(audio)} frames "
          f"({len(audio) / cfg.sample_rate:.2f} s), "
          f"{len(session.note_log)} notes -> {args.out}")
    return EXIT_OK


# ---- simulate ---------------------------------------------------------------


def _sim_lines(args, sample_rate: int):
    """Yield (line_dict, ts) pairs for the scripted gesture."""
    inst = args.instrument
    rng = random.Random(args.seed)
    n = args.count
    step_ts = max(1, int(round(sample_rate / args.rate)))

    def ts(i):
        return i * step_ts

    if args.sweep:
        axis = args.sweep
        spans = {"yaw": 60.0, "pitch": 30.0, "roll": 30.0, "tilt": 45.0}
        span = spans[axis]
        for i in range(n):
            v = -span + 2.0 * span * i / max(1, n - 1)
            if inst in ("head",):
                body = {"yaw": 0.0, "pitch": 0.0, "roll": 0.0}
                body[axis] = round(v, 2)
                yield {"inst": inst, "t": "orient", **body}, ts(i)
            else:
                body = {"yaw": 0.0, "pitch": 0.0, "roll": 0.0}
                body["pitch" if axis == "tilt" else axis] = round(v, 2)
                yield {"inst": inst, "t": "orient", **body}, ts(i)
        return

    if args.walk:
        x, y = 0.5, 0.5
        for i in range(n):
            x = min(1.0, max(0.0, x + rng.uniform(-0.08, 0.08)))
            y = min(1.0, max(0.0, y + rng.uniform(-0.08, 0.08)))
            yield {"inst": inst, "t": "grid", "x": round(x, 3),
                   "y": round(y, 3), "id": "sim"}, ts(i)
        return

    if args.pattern:
        if args.pattern == "four-on-floor":
            script = [(0, 0.9)]          # kick every beat
        elif args.pattern == "backbeat":
            script = [(1, 0.8)]          # snare hits
        else:
            script = None
        for i in range(n):
            if script is None:
                pad, p = rng.randrange(4), round(rng.uniform(0.2, 1.0), 2)
            else:
                pad, p = script[i % len(script)]
            yield {"inst": inst, "t": "pad", "i": pad, "p": p}, ts(i)
        return

    # default scripts per instrument: something audible out of the box
    if inst == "touch":
        for i in range(n):
            key = i % 8
            yield {"inst": inst, "t": "key", "i": key, "on": True}, ts(i)
            yield {"inst": inst, "t": "key", "i": key, "on": False}, ts(i) + step_ts // 2
    elif inst in ("drums", "pads"):
        yield from _sim_lines_with(args, "four-on-floor", sample_rate)
    elif inst == "harp":
        args.walk = True
        yield from _sim_lines(args, sample_rate)
    else:
        args.sweep = "yaw" if inst == "head" else "tilt"
        yield from _sim_lines(args, sample_rate)


def _sim_lines_with(args, pattern: str, sample_rate: int):
    args.pattern = pattern
    yield from _sim_lines(args, sample_rate)


def cmd_simulate(args) -> int:
    cfg = _load(args)
    if args.instrument not in SIM_INSTRUMENTS:
        return _fail(f"unknown instrument {args.instrument!r}; "
                     f"choose from {', '.join(SIM_INSTRUMENTS)}", EXIT_CONFIG)
    sock = None
    target = None
    if args.udp:
        host, _, port = args.udp.rpartition(":")
        if not host or not port.isdigit():
            return _fail("--udp needs HOST:PORT", EXIT_CONFIG)
        sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
        target = (host, int(port))

    emitted = 0
    try:
        for body, ts in _sim_lines(args, cfg.sample_rate):
            if args.ts:
                body = {**body, "ts": ts}
            line = json.dumps(body, separators=(",", ":"))
            if sock is not None:
                sock.sendto(line.encode("utf-8"), target)
                time.sleep(1.0 / args.rate)
            else:
                print(line)
            emitted += 1
    except KeyboardInterrupt:
        pass
    finally:
        if sock is not None:
            sock.close()
    print(f"emitted {emitted} lines", file=sys.stderr)
    return EXIT_OK


# ---- sync roles --------------------------------------------------------------


def _print_context(ctx) -> None:
    print(f"context: key={PITCH_CLASS_NAMES[int(ctx.key)]} "
          f"scale={ctx.scale.name} tempo={ctx.tempo_bpm:g}")


def cmd_sync_master(args) -> int:
    cfg = _load(args)
    port = cfg.sync.port if args.port is None else args.port
    addr = cfg.sync.broadcast_addr if args.addr is None else args.addr
    store = ContextStore(scales=cfg.scales)
    if args.key is not None or args.scale is not None or args.tempo is not None:
        store.set_context(key=args.key, scale_id=args.scale,
                          tempo_bpm=args.tempo)
    try:
        transport = UdpBroadcastTransport(port, addr)
    except OSError as exc:
        return _fail(f"cannot open broadcast socket: {exc}", EXIT_RUNTIME)
    master = SyncMaster(store, transport, keepalive_ms=cfg.sync.keepalive_ms)
    stop = threading.Event()

    def pump():
        while not stop.is_set():
            master.tick(int(time.monotonic() * 1000))
            time.sleep(0.02)

    thread = threading.Thread(target=pump, daemon=True)
    thread.start()
    _print_context(store.context)
    print(f"broadcasting on {addr}:{port}; commands: "
          "key <0-11> | scale <id> | tempo <bpm> | quit")
    try:
        for raw in sys.stdin:
            parts = raw.split()
            if not parts:
                continue
            cmd = parts[0].lower()
            try:
                if cmd == "key" and len(parts) == 2:
                    store.set_context(key=int(parts[1]))
                elif cmd == "scale" and len(parts) == 2:
                    store.set_context(scale_id=int(parts[1]))
                elif cmd == "tempo" and len(parts) == 2:
                    store.set_context(tempo_bpm=float(parts[1]))
                elif cmd in ("quit", "exit"):
                    break
                else:
                    print("commands: key <0-11> | scale <id> | tempo <bpm> | quit")
                    continue
                _print_context(store.context)
            except (ValueError, KeyError) as exc:
                print(f"rejected: {exc}")
        if args.duration is not None:
            time.sleep(args.duration)
    except KeyboardInterrupt:
        pass
    stop.set()
    thread.join(timeout=1.0)
    transport.close()
    print(f"sent {master.sent_count} packets")
    return EXIT_OK


def cmd_sync_client(args) -> int:
    cfg = _load(args)
    port = cfg.sync.port if args.port is None else args.port
    store = ContextStore(scales=cfg.scales)
    client = SyncClient(store, override=args.override)
    store.add_listener(_print_context)
    try:
        receiver = UdpReceiver(
            lambda data: client.handle_packet(data, int(time.monotonic() * 1000)),
            port=port)
    except OSError as exc:
        return _fail(f"cannot bind port {port}: {exc}", EXIT_RUNTIME)
    receiver.start()
    print(f"listening on port {port} (override={'on' if args.override else 'off'})")
    _print_context(store.context)
    try:
        if args.duration is not None:
            time.sleep(args.duration)
        else:
            while True:
                time.sleep(0.5)
    except KeyboardInterrupt:
        pass
    receiver.stop()
    s = client.stats
    print(f"received={s.received} applied={s.applied} ignored={s.ignored}")
    return EXIT_OK


# ---- listings ---------------------------------------------------------------


def cmd_list_scales(args) -> int:
    cfg = _load(args)
    for scale in cfg.scales:
        intervals = ",".join(str(i) for i in scale.intervals)
        print(f"{scale.id:3d}  {scale.name:<18} {intervals}")
    return EXIT_OK


def cmd_list_presets(args) -> int:
    cfg = _load(args)
    for name in cfg.preset_order:
        p = cfg.presets[name]
        oscs = "+".join(shape for shape, _ in p.oscillators)
        extras = " pluck" if p.pluck_layer else ""
        print(f"{name:<14} osc={oscs:<22} cutoff={p.cutoff_hz:g}Hz "
              f"adsr={p.attack_s:g}/{p.decay_s:g}/{p.sustain:g}/{p.release_s:g}"
              f"{extras}")
    return EXIT_OK


# ---- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tutti",
        description="Adaptive instrument ensemble engine.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config(p):
        p.add_argument("-c", "--config", default=None,
                       help="config file (JSON); default $ENGINE_CONFIG or built-ins")

    p = sub.add_parser("run", help="run the live engine")
    add_config(p)
    p.add_argument("--role", choices=("off", "master", "client"), default=None)
    p.add_argument("--port", type=int, default=None, help="sync UDP port")
    p.add_argument("--ws-port", type=int, default=None)
    p.add_argument("--sensor-port", type=int, default=None)
    p.add_argument("--out", default=None, help="also write rendered audio here")
    p.add_argument("--stereo", action="store_true")
    p.add_argument("--duration", type=float, default=None, help="seconds")
    p.add_argument("--fast", action="store_true",
                   help="render as fast as possible (no wall-clock pacing)")
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("render", help="render a replay file to WAV")
    add_config(p)
    p.add_argument("replay")
    p.add_argument("-o", "--out", required=True)
    p.add_argument("--tail", type=float, default=2.0,
                   help="seconds to render past the last event")
    p.add_argument("--duration", type=float, default=None,
                   help="render exactly this many seconds")
    p.add_argument("--stereo", action="store_true")
    p.add_argument("--note-log", default=None,
                   help="write the note log as JSON here")
    p.set_defaults(fn=cmd_render)

    p = sub.add_parser("simulate", help="emit scripted sensor lines")
    add_config(p)
    p.add_argument("instrument")
    p.add_argument("--sweep", choices=SIM_AXES, default=None)
    p.add_argument("--walk", action="store_true")
    p.add_argument("--pattern", choices=SIM_PATTERNS, default=None)
    p.add_argument("--count", type=int, default=64)
    p.add_argument("--rate", type=float, default=20.0, help="lines per second")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--ts", action="store_true",
                   help="stamp lines with sample-clock timestamps")
    p.add_argument("--udp", default=None, metavar="HOST:PORT",
                   help="send over UDP instead of stdout")
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("sync-master", help="broadcast context changes")
    add_config(p)
    p.add_argument("--port", type=int, default=None)
    p.add_argument("--addr", default=None)
    p.add_argument("--key", type=int, default=None)
    p.add_argument("--scale", type=int, default=None)
    p.add_argument("--tempo", type=float, default=None)
    p.add_argument("--duration", type=float, default=None,
                   help="keep broadcasting this long after stdin closes")
    p.set_defaults(fn=cmd_sync_master)

    p = sub.add_parser("sync-client", help="follow a sync master")
    add_config(p)
    p.add_argument("--port", type=int, default=None)
    p.add_argument("--override", action="store_true",
                   help="keep the local context; count packets only")
    p.add_argument("--duration", type=float, default=None)
    p.set_defaults(fn=cmd_sync_client)

    p = sub.add_parser("list-scales", help="print the scale table")
    add_config(p)
    p.set_defaults(fn=cmd_list_scales)

    p = sub.add_parser("list-presets", help="print shipped presets")
    add_config(p)
    p.set_defaults(fn=cmd_list_presets)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        return _fail(str(exc), EXIT_CONFIG)


if __name__ == "__main__":
    sys.exit(main())
