import { describe, expect, it } from "vitest";
import { EngineSocket, SocketLike } from "../src/socket.js";
import { EnginePush, OutboundMsg, build } from "../src/protocol.js";

class FakeWebSocket implements SocketLike {
  static CONNECTING = 0;
  static OPEN = 1;
  static CLOSED = 3;

  readyState = FakeWebSocket.CONNECTING;
  sent: string[] = [];
  onopen: ((ev?: unknown) => void) | null = null;
  onclose: ((ev?: unknown) => void) | null = null;
  onmessage: ((ev: { data: string }) => void) | null = null;
  onerror: ((ev?: unknown) => void) | null = null;

  send(data: string): void {
    this.sent.push(data);
  }

  close(): void {
    this.simulateClose();
  }

  simulateOpen(): void {
    this.readyState = FakeWebSocket.OPEN;
    this.onopen?.();
  }

  simulateClose(): void {
    if (this.readyState === FakeWebSocket.CLOSED) return;
    this.readyState = FakeWebSocket.CLOSED;
    this.onclose?.();
  }

  simulateMessage(data: string): void {
    this.onmessage?.({ data });
  }
}

function rig(opts: { queueMs?: number } = {}) {
  const sockets: FakeWebSocket[] = [];
  let now = 0;
  const timers: Array<{ due: number; fn: () => void }> = [];
  const sock = new EngineSocket("ws://engine.test:8765", {
    factory: () => {
      const ws = new FakeWebSocket();
      sockets.push(ws);
      return ws;
    },
    now: () => now,
    setTimeout: (fn, ms) => timers.push({ due: now + ms, fn }),
    queueMs: opts.queueMs,
  });
  const advance = (ms: number) => {
    now += ms;
    const due = timers.filter((t) => t.due <= now);
    timers.splice(0, timers.length, ...timers.filter((t) => t.due > now));
    for (const t of due) t.fn();
  };
  return { sock, sockets, advance, timers, clock: () => now };
}

describe("EngineSocket", () => {
  it("queues messages while connecting and flushes on open", () => {
    const { sock, sockets } = rig();
    sock.connect();
    sock.send(build.key(3, true));
    sock.send(build.key(3, false));
    expect(sockets[0].sent.length).toBe(0);
    sockets[0].simulateOpen();
    expect(sockets[0].sent.length).toBe(2);
    expect(JSON.parse(sockets[0].sent[0])).toEqual({ type: "key", i: 3, on: true });
    expect(sock.sentCount).toBe(2);
    expect(sock.droppedCount).toBe(0);
  });

  it("drops stale queued messages after the queue window", () => {
    const { sock, sockets, advance } = rig();
    const dropped: OutboundMsg[] = [];
    sock.onDropped = (m) => dropped.push(m);
    sock.connect();
    sock.send(build.strip(0.5));
    advance(1001);
    sock.send(build.strip(0.9)); // triggers the sweep, then queues itself
    sockets[0].simulateOpen();
    expect(dropped).toEqual([{ type: "strip", pos: 0.5 }]);
    expect(sock.droppedCount).toBe(1);
    expect(sockets[0].sent.map((s) => JSON.parse(s))).toEqual([{ type: "strip", pos: 0.9 }]);
  });

  it("reconnects with doubling backoff and resets it on success", () => {
    const { sock, sockets, advance, timers } = rig();
    sock.connect();
    expect(sockets.length).toBe(1);

    sockets[0].simulateClose();
    expect(timers[timers.length - 1].due).toBe(1000);
    advance(1000);
    expect(sockets.length).toBe(2);

    sockets[1].simulateClose();
    advance(1999);
    expect(sockets.length).toBe(2); // 2s backoff not elapsed yet
    advance(1);
    expect(sockets.length).toBe(3);

    sockets[2].simulateClose();
    advance(4000);
    expect(sockets.length).toBe(4);

    sockets[3].simulateOpen(); // success resets the ladder
    sockets[3].simulateClose();
    advance(1000);
    expect(sockets.length).toBe(5);
  });

  it("caps the backoff", () => {
    const { sock, sockets, advance } = rig();
    sock.connect();
    for (let i = 0; i < 10; i++) {
      sockets[sockets.length - 1].simulateClose();
      advance(30000);
    }
    // every retry due within the 30s cap
    expect(sockets.length).toBe(11);
  });

  it("delivers parsed pushes and ignores junk frames", () => {
    const { sock, sockets } = rig();
    const pushes: EnginePush[] = [];
    sock.onPush = (p) => pushes.push(p);
    sock.connect();
    sockets[0].simulateOpen();
    sockets[0].simulateMessage('{"type": "step", "value": 4}');
    sockets[0].simulateMessage("garbage");
    sockets[0].simulateMessage('{"type": "wat"}');
    sockets[0].simulateMessage('{"type": "meter", "value": 0.2}');
    expect(pushes).toEqual([
      { type: "step", value: 4 },
      { type: "meter", value: 0.2 },
    ]);
  });

  it("reports status transitions", () => {
    const { sock, sockets, advance } = rig();
    const statuses: string[] = [];
    sock.onStatus = (s) => statuses.push(s);
    sock.connect();
    sockets[0].simulateOpen();
    sockets[0].simulateClose();
    advance(1000);
    sockets[1].simulateOpen();
    expect(statuses).toEqual(["connecting", "open", "closed", "connecting", "open"]);
  });

  it("close() stops the reconnect loop", () => {
    const { sock, sockets, advance, timers } = rig();
    sock.connect();
    sockets[0].simulateOpen();
    sock.close();
    advance(60000);
    expect(sockets.length).toBe(1);
    expect(timers.length).toBe(0);
  });

  it("sends immediately once open", () => {
    const { sock, sockets } = rig();
    sock.connect();
    sockets[0].simulateOpen();
    sock.send(build.toggleFx());
    expect(sockets[0].sent).toEqual(['{"type":"toggle_fx"}']);
  });
});
