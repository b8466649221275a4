"""Ensemble context sync: OSC 1.0 codec plus master/client roles over UDP.

The master broadcasts the full (key, scale, tempo) context: immediately on
every change, again in a short burst, and once a second as keep-alive.
Full-state idempotent messages make the protocol loss-tolerant: a client
that misses any packet is healed by the next one.  The burst exists because
a single change packet at 20% loss fails too often to trust; five spaced
repeats push the miss probability per change below one in ten thousand.

Clients apply valid context packets unless their override flag is set (the
player has chosen a scale by hand); overridden clients still count traffic
so the operator can see the master is alive.
"""

from __future__ import annotations

import socket
import struct
import threading
from dataclasses import dataclass

from .core import ContextError, ContextStore

CONTEXT_ADDRESS = "/ensemble/context"
DEFAULT_PORT = 9000
DEFAULT_BROADCAST = "255.255.255.255"
KEEPALIVE_MS = 1000
BURST_COUNT = 5
BURST_SPACING_MS = 40


class OscDecodeError(ValueError):
    """Malformed OSC packet; decoding never raises anything else."""


@dataclass(frozen=True)
class OscMessage:
    address: str
    args: tuple

    def __post_init__(self):
        if not self.address.startswith("/"):
            raise ValueError(f"OSC address must start with '/': {self.address!r}")


def _pad_string(s: str) -> bytes:
    raw = s.encode("ascii") + b"\0"
    return raw + b"\0" * (-len(raw) % 4)


def osc_encode(message: OscMessage) -> bytes:
    """OSC 1.0 layout: padded address, ',' + typetags padded, big-endian args."""
    tags = ","
    body = b""
    for arg in message.args:
        if isinstance(arg, bool):
            raise ValueError("unsupported OSC argument type: bool")
        if isinstance(arg, int):
            if not -2**31 <= arg < 2**31:
                raise ValueError(f"int32 out of range: {arg}")
            tags += "i"
            body += struct.pack(">i", arg)
        elif isinstance(arg, float):
            tags += "f"
            body += struct.pack(">f", arg)
        elif isinstance(arg, str):
            tags += "s"
            body += _pad_string(arg)
        else:
            raise ValueError(f"unsupported OSC argument type: {type(arg).__name__}")
    return _pad_string(message.address) + _pad_string(tags) + body


def _read_string(data: bytes, pos: int) -> tuple[str, int]:
    end = data.find(b"\0", pos)
    if end < 0:
        raise OscDecodeError("unterminated string")
    try:
        text = data[pos:end].decode("ascii")
    except UnicodeDecodeError as exc:
        raise OscDecodeError(f"non-ascii string: {exc}") from exc
    new_pos = end + 1
    new_pos += -(new_pos - pos) % 4
    if new_pos > len(data):
        raise OscDecodeError("string padding runs past packet end")
    if any(data[end:new_pos]):
        raise OscDecodeError("nonzero string padding")
    return text, new_pos


def osc_decode(data: bytes) -> OscMessage:
    """Inverse of osc_encode; raises OscDecodeError on anything malformed."""
    if len(data) == 0:
        raise OscDecodeError("empty packet")
    if len(data) % 4 != 0:
        raise OscDecodeError(f"packet length {len(data)} not a multiple of 4")
    address, pos = _read_string(data, 0)
    if not address.startswith("/"):
        raise OscDecodeError(f"address {address!r} does not start with '/'")
    tags, pos = _read_string(data, pos)
    if not tags.startswith(","):
        raise OscDecodeError(f"typetag string {tags!r} does not start with ','")
    args = []
    for tag in tags[1:]:
        if tag == "i":
            if pos + 4 > len(data):
                raise OscDecodeError("truncated int32 argument")
            args.append(struct.unpack_from(">i", data, pos)[0])
            pos += 4
        elif tag == "f":
            if pos + 4 > len(data):
                raise OscDecodeError("truncated float32 argument")
            args.append(struct.unpack_from(">f", data, pos)[0])
            pos += 4
        elif tag == "s":
            text, pos = _read_string(data, pos)
            args.append(text)
        else:
            raise OscDecodeError(f"unknown typetag {tag!r}")
    if pos != len(data):
        raise OscDecodeError(f"{len(data) - pos} trailing bytes after arguments")
    return OscMessage(address, tuple(args))


def encode_context(key: int, scale_id: int, tempo_bpm: float) -> bytes:
    return osc_encode(OscMessage(CONTEXT_ADDRESS,
                                 (key, scale_id, int(round(tempo_bpm)))))


class SyncMaster:
    """Drives context broadcasts from a millisecond-resolution tick clock.

    Tick as often as convenient (the engine control loop is fine): sends are
    due-time based so tick frequency only bounds send latency.  Transport
    failures are retried with exponential backoff and never propagate; local
    playing must survive a dead network.
    """

    def __init__(self, store: ContextStore, transport,
                 keepalive_ms: int = KEEPALIVE_MS):
        self.store = store
        self.transport = transport
        self.keepalive_ms = keepalive_ms
        self.sent_count = 0
        self.error_count = 0
        self._dirty = True  # send initial state on the first tick
        self._burst_due: list[int] = []
        self._last_send_ms: int | None = None
        self._backoff_until_ms = 0
        self._backoff_ms = 0
        store.add_listener(self._on_change)

    def _on_change(self, _ctx) -> None:
        self._dirty = True

    def tick(self, now_ms: int) -> int:
        """Send whatever is due; returns the number of packets sent."""
        sent = 0
        if self._dirty:
            self._dirty = False
            self._burst_due = [now_ms + i * BURST_SPACING_MS
                               for i in range(BURST_COUNT)]
        while self._burst_due and self._burst_due[0] <= now_ms:
            self._burst_due.pop(0)
            sent += self._send(now_ms)
        if (self._last_send_ms is None
                or now_ms - self._last_send_ms >= self.keepalive_ms):
            sent += self._send(now_ms)
        return sent

    def _send(self, now_ms: int) -> int:
        if now_ms < self._backoff_until_ms:
            return 0
        ctx = self.store.context
        packet = encode_context(ctx.key.value, ctx.scale.id, ctx.tempo_bpm)
        try:
            self.transport.send(packet)
        except OSError as exc:
            self.error_count += 1
            self._backoff_ms = min(max(self._backoff_ms * 2, 50), 2000)
            self._backoff_until_ms = now_ms + self._backoff_ms
            print(f"sync: send failed ({exc}); retrying in {self._backoff_ms} ms")
            return 0
        self._backoff_ms = 0
        self._last_send_ms = now_ms
        self.sent_count += 1
        return 1


@dataclass
class SyncClientStats:
    received: int = 0
    applied: int = 0
    ignored: int = 0


class SyncClient:
    """Applies incoming context packets to the local store.

    With override set the player has pinned their own scale: packets are
    counted but not applied, and clearing the flag lets the next packet
    resynchronize.  The client never sends anything.
    """

    def __init__(self, store: ContextStore, override: bool = False):
        self.store = store
        self.override = override
        self.stats = SyncClientStats()
        self.last_seen_ms: int | None = None

    def handle_packet(self, data: bytes, now_ms: int) -> bool:
        """Returns True when the packet changed the local context."""
        try:
            msg = osc_decode(data)
        except OscDecodeError:
            self.stats.ignored += 1
            return False
        if msg.address != CONTEXT_ADDRESS:
            return False
        if len(msg.args) != 3 or not all(isinstance(a, int) for a in msg.args):
            self.stats.ignored += 1
            return False
        key, scale_id, tempo = msg.args
        self.stats.received += 1
        self.last_seen_ms = now_ms
        if self.override:
            return False
        try:
            self.store.set_context(key=key, scale_id=scale_id,
                                   tempo_bpm=float(tempo))
        except (ContextError, ValueError) as exc:
            self.stats.ignored += 1
            print(f"sync: ignored context packet ({exc})")
            return False
        self.stats.applied += 1
        return True


class SimLossyTransport:
    """Desk-scale stand-in for UDP broadcast: each send reaches each attached
    receiver independently with probability (1 - loss), using a seeded RNG so
    simulations are reproducible."""

    def __init__(self, loss: float = 0.2, seed: int = 0):
        import random
        self.loss = loss
        self.now_ms = 0
        self._rng = random.Random(seed)
        self._receivers: list = []
        self.dropped = 0
        self.delivered = 0

    def attach(self, client: SyncClient) -> None:
        self._receivers.append(client)

    def send(self, data: bytes) -> None:
        for client in self._receivers:
            if self._rng.random() < self.loss:
                self.dropped += 1
            else:
                self.delivered += 1
                client.handle_packet(data, self.now_ms)


class UdpBroadcastTransport:
    """Fire-and-forget UDP broadcast sender."""

    def __init__(self, port: int = DEFAULT_PORT, addr: str = DEFAULT_BROADCAST):
        self.target = (addr, port)
        self.sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
        self.sock.setsockopt(socket.SOL_SOCKET, socket.SO_BROADCAST, 1)
        self.sock.setblocking(False)

    def send(self, data: bytes) -> None:
        self.sock.sendto(data, self.target)

    def close(self) -> None:
        self.sock.close()


class UdpReceiver:
    """Background UDP listener feeding raw packets to a callback."""

    def __init__(self, callback, port: int = DEFAULT_PORT, host: str = ""):
        self.callback = callback
        self.sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
        self.sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        self.sock.bind((host, port))
        self.sock.settimeout(0.25)
        self._stop = threading.Event()
        self._thread = threading.Thread(target=self._run, daemon=True)

    def start(self) -> None:
        self._thread.start()

    def _run(self) -> None:
        while not self._stop.is_set():
            try:
                data, _ = self.sock.recvfrom(4096)
            except socket.timeout:
                continue
            except OSError:
                break
            self.callback(data)

    def stop(self) -> None:
        self._stop.set()
        self._thread.join(timeout=2.0)
        self.sock.close()
