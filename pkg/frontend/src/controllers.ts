/**
 * Gesture layer: turns UI gestures into wire messages.  Every gesture maps
 * to exactly one outbound message; the strip is the one continuous control,
 * so drags are throttled with a trailing-edge send of the final position.
 */

import { OutboundMsg, build, validateOutbound } from "./protocol.js";

/** Max strip messages per second while dragging. */
export const STRIP_RATE_HZ = 30;
/** Dwell time that ramps a pressureless pad hold to full pressure. */
export const DWELL_FULL_MS = 600;

export interface Sender {
  send(msg: OutboundMsg): void;
}

export interface ControllerOptions {
  /** Clock in ms, injectable for tests. */
  now?: () => number;
  /** Timer, injectable for tests. */
  setTimeout?: (fn: () => void, ms: number) => unknown;
}

/**
 * Pressure for a pad gesture.  Pointer hardware that reports pressure wins;
 * mice and basic touchscreens report 0, so fall back to a dwell ramp that
 * reaches 1.0 after DWELL_FULL_MS of hold.
 */
export function padPressure(pointerPressure: number, dwellMs: number): number {
  if (pointerPressure > 0) return Math.min(1, pointerPressure);
  return Math.min(1, Math.max(0, dwellMs) / DWELL_FULL_MS);
}

export class SurfaceController {
  /** Called when a gesture produced an invalid message (a bug, not user error). */
  onInvalid: ((reason: string) => void) | null = null;

  private readonly sender: Sender;
  private readonly now: () => number;
  private readonly timer: (fn: () => void, ms: number) => unknown;

  private lastStripSentAt = -Infinity;
  private pendingStrip: number | null = null;
  private stripTimerArmed = false;

  constructor(sender: Sender, opts: ControllerOptions = {}) {
    this.sender = sender;
    this.now = opts.now ?? (() => Date.now());
    this.timer = opts.setTimeout ?? ((fn, ms) => setTimeout(fn, ms));
  }

  keyPress(index: number, on: boolean): void {
    this.emit(build.key(index, on));
  }

  padPress(index: number, pointerPressure: number, dwellMs = 0): void {
    this.emit(build.pad(index, padPressure(pointerPressure, dwellMs)));
  }

  /** Throttled; call freely from pointermove. */
  stripDrag(pos: number): void {
    const interval = 1000 / STRIP_RATE_HZ;
    const elapsed = this.now() - this.lastStripSentAt;
    if (elapsed >= interval) {
      this.sendStrip(pos);
      return;
    }
    this.pendingStrip = pos;
    if (!this.stripTimerArmed) {
      this.stripTimerArmed = true;
      this.timer(() => {
        this.stripTimerArmed = false;
        if (this.pendingStrip !== null) {
          const p = this.pendingStrip;
          this.pendingStrip = null;
          this.sendStrip(p);
        }
      }, interval - elapsed);
    }
  }

  /** Final position on pointer release; sends immediately, cancels pending. */
  stripRelease(pos: number): void {
    this.pendingStrip = null;
    this.sendStrip(pos);
  }

  contextSelect(fields: { key?: number; scale?: number; tempo?: number }): void {
    this.emit(build.setContext(fields));
  }

  presetSelect(idOrName: number | string): void {
    this.emit(build.preset(idOrName));
  }

  fxToggle(): void {
    this.emit(build.toggleFx());
  }

  transportToggle(playing: boolean): void {
    this.emit(build.transport(playing));
  }

  private sendStrip(pos: number): void {
    this.lastStripSentAt = this.now();
    this.emit(build.strip(pos));
  }

  private emit(msg: OutboundMsg): void {
    const problem = validateOutbound(msg);
    if (problem !== null) {
      this.onInvalid?.(problem);
      return;
    }
    this.sender.send(msg);
  }
}
