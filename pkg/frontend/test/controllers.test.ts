import { describe, expect, it } from "vitest";
import { SurfaceController, padPressure, DWELL_FULL_MS, STRIP_RATE_HZ } from "../src/controllers.js";
import { OutboundMsg, validateOutbound } from "../src/protocol.js";
import { StateStore } from "../src/state.js";
import { MockEngine, SCALE_NAMES } from "./mock-engine.js";

/** Deterministic clock + timer pair for driving the throttle. */
class FakeClock {
  now = 0;
  private timers: Array<{ due: number; fn: () => void }> = [];

  timer = (fn: () => void, ms: number): unknown => {
    this.timers.push({ due: this.now + ms, fn });
    return this.timers.length;
  };

  advance(ms: number): void {
    this.now += ms;
    const due = this.timers.filter((t) => t.due <= this.now);
    this.timers = this.timers.filter((t) => t.due > this.now);
    for (const t of due) t.fn();
  }
}

function rig() {
  const clock = new FakeClock();
  const sent: OutboundMsg[] = [];
  const ctl = new SurfaceController(
    { send: (m) => sent.push(m) },
    { now: () => clock.now, setTimeout: clock.timer },
  );
  return { clock, sent, ctl };
}

describe("pad pressure", () => {
  it("uses hardware pressure when present", () => {
    expect(padPressure(0.65, 0)).toBe(0.65);
    expect(padPressure(1.3, 0)).toBe(1);
  });

  it("falls back to a dwell ramp for pressureless pointers", () => {
    expect(padPressure(0, 0)).toBe(0);
    expect(padPressure(0, DWELL_FULL_MS / 2)).toBeCloseTo(0.5);
    expect(padPressure(0, DWELL_FULL_MS * 3)).toBe(1);
    expect(padPressure(0, -50)).toBe(0);
  });
});

describe("strip throttle", () => {
  it("coalesces rapid drags to the rate limit with a trailing send", () => {
    const { clock, sent, ctl } = rig();
    for (let i = 0; i <= 20; i++) ctl.stripDrag(i / 20);
    expect(sent.length).toBe(1); // leading edge only
    expect((sent[0] as { pos: number }).pos).toBe(0);
    clock.advance(1000 / STRIP_RATE_HZ);
    expect(sent.length).toBe(2); // trailing edge carries the last position
    expect((sent[1] as { pos: number }).pos).toBe(1);
  });

  it("never exceeds the rate limit over a sustained drag", () => {
    const { clock, sent, ctl } = rig();
    for (let t = 0; t < 1000; t += 5) {
      ctl.stripDrag(t / 1000);
      clock.advance(5);
    }
    clock.advance(100);
    expect(sent.length).toBeLessThanOrEqual(STRIP_RATE_HZ + 1);
    expect(sent.length).toBeGreaterThan(STRIP_RATE_HZ / 2);
  });

  it("release sends the final position immediately", () => {
    const { sent, ctl } = rig();
    ctl.stripDrag(0.2);
    ctl.stripDrag(0.4); // throttled, pending
    ctl.stripRelease(0.9);
    expect(sent.length).toBe(2);
    expect((sent[1] as { pos: number }).pos).toBe(0.9);
  });
});

describe("50-gesture script against the mock engine", () => {
  it("sends exactly one valid message per gesture and mirrors the final push", () => {
    const { clock, sent, ctl } = rig();
    const engine = new MockEngine();
    const store = new StateStore();
    for (const push of engine.initialPushes()) store.apply(push);

    const script: Array<(c: SurfaceController) => void> = [
      // touch keys, press/release pairs across the surface
      (c) => c.keyPress(0, true),
      (c) => c.keyPress(0, false),
      (c) => c.keyPress(4, true),
      (c) => c.keyPress(4, false),
      (c) => c.keyPress(7, true),
      (c) => c.keyPress(7, false),
      (c) => c.keyPress(23, true),
      (c) => c.keyPress(23, false),
      // pads: hardware pressure and dwell fallback
      (c) => c.padPress(0, 0.9),
      (c) => c.padPress(1, 0.4),
      (c) => c.padPress(2, 0, 300),
      (c) => c.padPress(3, 0, 900),
      // tempo strip sweep
      (c) => c.stripDrag(0.0),
      (c) => c.stripDrag(0.1),
      (c) => c.stripDrag(0.2),
      (c) => c.stripDrag(0.3),
      (c) => c.stripDrag(0.4),
      (c) => c.stripDrag(0.5),
      (c) => c.stripDrag(0.6),
      (c) => c.stripDrag(0.7),
      (c) => c.stripRelease(0.5),
      // context changes, including a deliberate no-op
      (c) => c.contextSelect({ key: 9, scale: 1 }),
      (c) => c.contextSelect({ key: 2, scale: 4, tempo: 100 }),
      (c) => c.contextSelect({ key: 2, scale: 4, tempo: 100 }),
      (c) => c.contextSelect({ key: 7, scale: 0 }),
      // presets by id and by name
      (c) => c.presetSelect(0),
      (c) => c.presetSelect(1),
      (c) => c.presetSelect(2),
      (c) => c.presetSelect(3),
      (c) => c.presetSelect(4),
      (c) => c.presetSelect("bright_comp"),
      // fx and transport
      (c) => c.fxToggle(),
      (c) => c.fxToggle(),
      (c) => c.transportToggle(true),
      (c) => c.transportToggle(true), // already playing, engine ignores
      (c) => c.transportToggle(false),
      (c) => c.transportToggle(true),
      // second round of playing
      (c) => c.keyPress(10, true),
      (c) => c.keyPress(14, true),
      (c) => c.keyPress(10, false),
      (c) => c.keyPress(14, false),
      (c) => c.padPress(0, 0.2),
      (c) => c.padPress(1, 1.0),
      (c) => c.stripDrag(0.25),
      (c) => c.stripDrag(1.0),
      // closing moves
      (c) => c.contextSelect({ key: 5, scale: 6 }),
      (c) => c.fxToggle(),
      (c) => c.transportToggle(false),
      (c) => c.presetSelect(5),
      (c) => c.keyPress(12, true),
    ];
    expect(script.length).toBe(50);

    for (const gesture of script) {
      const before = sent.length;
      gesture(ctl);
      expect(sent.length).toBe(before + 1); // exactly one message per gesture
      const msg = sent[before];
      expect(validateOutbound(msg)).toBeNull(); // schema-valid
      for (const push of engine.handle(JSON.stringify(msg))) {
        expect(push.type).not.toBe("error");
        store.apply(push);
      }
      clock.advance(40); // realistic gesture spacing, beyond the strip throttle
    }

    expect(sent.length).toBe(50);
    expect(engine.received.length).toBe(50);

    // UI state must equal what the engine last pushed.
    const s = store.get();
    expect(s.context).toEqual({
      key: engine.key,
      scale: engine.scale,
      scaleName: SCALE_NAMES[engine.scale],
      tempo: engine.tempo,
    });
    expect(s.playing).toBe(engine.playing);
    expect(s.wet).toBe(engine.wet);
    expect(s.grid).toEqual(engine.grid);
    expect(s.lastError).toBeNull();

    // and concretely: the script lands on key F, harmonic minor, 180 BPM,
    // stopped, fx dry.
    expect(s.context).toEqual({
      key: 5,
      scale: 6,
      scaleName: "harmonic minor",
      tempo: 180,
    });
    expect(s.playing).toBe(false);
    expect(s.wet).toBe(false);
  });

  it("surfaces engine rejections as error pushes", () => {
    const engine = new MockEngine();
    const store = new StateStore();
    const pushes = engine.handle('{"type": "set_context", "scale": 99}');
    expect(pushes.length).toBe(1);
    expect(pushes[0].type).toBe("error");
    store.apply(pushes[0]);
    expect(store.get().lastError).toContain("scale");
    // engine state untouched
    expect(engine.scale).toBe(0);
  });

  it("rejects malformed frames the way the engine does", () => {
    const engine = new MockEngine();
    expect(engine.handle("not json")[0].type).toBe("error");
    expect(engine.handle('{"type": "pad", "i": 9, "p": 0.5}')[0].type).toBe("error");
    expect(engine.handle('{"type": "preset", "name": "nope"}')[0].type).toBe("error");
    expect(engine.handle('{"type": "preset", "id": 0, "inst": "drums"}')[0].type).toBe("error");
    expect(engine.received.length).toBe(0);
  });
});

describe("gesture to message mapping", () => {
  it("drops invalid gestures instead of sending them", () => {
    const sent: OutboundMsg[] = [];
    const problems: string[] = [];
    const ctl = new SurfaceController({ send: (m) => sent.push(m) });
    ctl.onInvalid = (reason) => problems.push(reason);
    ctl.contextSelect({}); // empty context change is meaningless
    expect(sent.length).toBe(0);
    expect(problems).toEqual(["set_context: empty"]);
  });

  it("builders clamp so out-of-range gestures still send one valid message", () => {
    const { sent, ctl } = rig();
    ctl.keyPress(999, true);
    ctl.padPress(-4, 2.5);
    ctl.stripRelease(7);
    expect(sent.length).toBe(3);
    for (const msg of sent) expect(validateOutbound(msg)).toBeNull();
  });
});
