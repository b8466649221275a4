/**
 * Engine connection: one WebSocket with auto-reconnect and a short outbound
 * queue.  Messages sent while the socket is down wait up to a second for the
 * reconnect, then drop with a notice: stale gestures are worse than lost
 * ones on a live instrument.
 */

import { EnginePush, OutboundMsg, parsePush } from "./protocol.js";

export interface SocketLike {
  readyState: number;
  send(data: string): void;
  close(): void;
  onopen: ((ev?: unknown) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: string }) => void) | null;
  onerror: ((ev?: unknown) => void) | null;
}

export interface EngineSocketOptions {
  /** WebSocket factory, injectable for tests. */
  factory?: (url: string) => SocketLike;
  /** Clock in ms, injectable for tests. */
  now?: () => number;
  /** Timer, injectable for tests. */
  setTimeout?: (fn: () => void, ms: number) => unknown;
  queueMs?: number;
  initialBackoffMs?: number;
  maxBackoffMs?: number;
}

const OPEN = 1;

export class EngineSocket {
  onPush: ((push: EnginePush) => void) | null = null;
  onStatus: ((status: "connecting" | "open" | "closed") => void) | null = null;
  onDropped: ((msg: OutboundMsg) => void) | null = null;

  sentCount = 0;
  droppedCount = 0;

  private readonly url: string;
  private readonly factory: (url: string) => SocketLike;
  private readonly now: () => number;
  private readonly timer: (fn: () => void, ms: number) => unknown;
  private readonly queueMs: number;
  private readonly maxBackoffMs: number;
  private readonly initialBackoffMs: number;

  private ws: SocketLike | null = null;
  private backoffMs: number;
  private queue: Array<{ at: number; msg: OutboundMsg }> = [];
  private closedForGood = false;

  constructor(url: string, opts: EngineSocketOptions = {}) {
    this.url = url;
    this.factory = opts.factory ?? ((u) => new WebSocket(u) as unknown as SocketLike);
    this.now = opts.now ?? (() => Date.now());
    this.timer = opts.setTimeout ?? ((fn, ms) => setTimeout(fn, ms));
    this.queueMs = opts.queueMs ?? 1000;
    this.initialBackoffMs = opts.initialBackoffMs ?? 1000;
    this.maxBackoffMs = opts.maxBackoffMs ?? 30000;
    this.backoffMs = this.initialBackoffMs;
  }

  connect(): void {
    this.closedForGood = false;
    this.open();
  }

  close(): void {
    this.closedForGood = true;
    this.ws?.close();
    this.ws = null;
  }

  get isOpen(): boolean {
    return this.ws !== null && this.ws.readyState === OPEN;
  }

  /** Send now, or queue briefly while the socket is down. */
  send(msg: OutboundMsg): void {
    this.flushQueue();
    if (this.isOpen) {
      this.ws!.send(JSON.stringify(msg));
      this.sentCount += 1;
      return;
    }
    this.queue.push({ at: this.now(), msg });
  }

  private flushQueue(): void {
    const cutoff = this.now() - this.queueMs;
    const keep: Array<{ at: number; msg: OutboundMsg }> = [];
    for (const item of this.queue) {
      if (this.isOpen) {
        this.ws!.send(JSON.stringify(item.msg));
        this.sentCount += 1;
      } else if (item.at < cutoff) {
        this.droppedCount += 1;
        this.onDropped?.(item.msg);
      } else {
        keep.push(item);
      }
    }
    this.queue = keep;
  }

  private open(): void {
    this.onStatus?.("connecting");
    const ws = this.factory(this.url);
    this.ws = ws;

    ws.onopen = () => {
      this.backoffMs = this.initialBackoffMs;
      this.onStatus?.("open");
      this.flushQueue();
    };
    ws.onmessage = (ev) => {
      const push = parsePush(ev.data);
      if (push !== null) this.onPush?.(push);
    };
    ws.onerror = () => {
      /* onclose always follows; nothing to do here */
    };
    ws.onclose = () => {
      this.onStatus?.("closed");
      if (this.closedForGood) return;
      const delay = this.backoffMs;
      this.backoffMs = Math.min(this.backoffMs * 2, this.maxBackoffMs);
      this.timer(() => {
        if (!this.closedForGood) this.open();
      }, delay);
    };
  }
}
