/**
 * The engine's WebSocket JSON schema: outbound control messages and inbound
 * state pushes.  This file is the single place the wire format lives on the
 * UI side; everything else builds or consumes these types.
 */

// ---- outbound: UI -> engine -------------------------------------------------

export interface KeyMsg { type: "key"; i: number; on: boolean }
export interface PadMsg { type: "pad"; i: number; p: number }
export interface StripMsg { type: "strip"; pos: number }
export interface SetContextMsg {
  type: "set_context";
  key?: number;
  scale?: number;
  tempo?: number;
}
export interface PresetMsg { type: "preset"; name?: string; id?: number; inst?: string }
export interface ToggleFxMsg { type: "toggle_fx" }
export interface TransportMsg { type: "transport"; playing?: boolean }

export type OutboundMsg =
  | KeyMsg | PadMsg | StripMsg | SetContextMsg
  | PresetMsg | ToggleFxMsg | TransportMsg;

// ---- inbound: engine -> UI ---------------------------------------------------

export interface ContextPush {
  type: "context";
  key: number;
  scale: number;
  scale_name: string;
  tempo: number;
}
export interface StepPush { type: "step"; value: number }
export interface PatternCell { on: boolean; p: number }
export interface PatternPush {
  type: "pattern";
  grid: PatternCell[][];
  playing: boolean;
  wet: boolean;
}
export interface MeterPush { type: "meter"; value: number }
export interface ErrorPush { type: "error"; detail: string }

export type EnginePush =
  | ContextPush | StepPush | PatternPush | MeterPush | ErrorPush;

// ---- helpers ------------------------------------------------------------------

const clamp01 = (x: number): number => Math.min(1, Math.max(0, x));

export const TOUCH_KEYS = 24;
export const PAD_COUNT = 4;
export const STEP_COUNT = 16;

/** Builders clamp ranges so a sloppy pointer can never emit a bad message. */
export const build = {
  key(i: number, on: boolean): KeyMsg {
    return { type: "key", i: Math.max(0, Math.min(TOUCH_KEYS - 1, Math.round(i))), on };
  },
  pad(i: number, p: number): PadMsg {
    return {
      type: "pad",
      i: Math.max(0, Math.min(PAD_COUNT - 1, Math.round(i))),
      p: clamp01(p),
    };
  },
  strip(pos: number): StripMsg {
    return { type: "strip", pos: clamp01(pos) };
  },
  setContext(fields: { key?: number; scale?: number; tempo?: number }): SetContextMsg {
    const msg: SetContextMsg = { type: "set_context" };
    if (fields.key !== undefined) msg.key = ((Math.round(fields.key) % 12) + 12) % 12;
    if (fields.scale !== undefined) msg.scale = Math.max(0, Math.round(fields.scale));
    if (fields.tempo !== undefined) msg.tempo = Math.min(300, Math.max(20, fields.tempo));
    return msg;
  },
  preset(idOrName: number | string, inst?: string): PresetMsg {
    const msg: PresetMsg =
      typeof idOrName === "number"
        ? { type: "preset", id: Math.max(0, Math.round(idOrName)) }
        : { type: "preset", name: idOrName };
    if (inst !== undefined) msg.inst = inst;
    return msg;
  },
  toggleFx(): ToggleFxMsg {
    return { type: "toggle_fx" };
  },
  transport(playing?: boolean): TransportMsg {
    return playing === undefined ? { type: "transport" } : { type: "transport", playing };
  },
};

const isInt = (x: unknown): x is number => typeof x === "number" && Number.isInteger(x);
const isNum = (x: unknown): x is number => typeof x === "number" && Number.isFinite(x);
const in01 = (x: unknown): x is number => isNum(x) && x >= 0 && x <= 1;

/**
 * Engine-side validation rules, mirrored so tests (and the mock engine) can
 * reject anything the real engine would.  Returns null when valid, else a
 * human-readable reason.
 */
export function validateOutbound(msg: unknown): string | null {
  if (typeof msg !== "object" || msg === null) return "not an object";
  const m = msg as Record<string, unknown>;
  switch (m.type) {
    case "key":
      if (!isInt(m.i) || m.i < 0 || m.i >= TOUCH_KEYS) return "key: bad i";
      if (typeof m.on !== "boolean") return "key: bad on";
      return null;
    case "pad":
      if (!isInt(m.i) || m.i < 0 || m.i >= PAD_COUNT) return "pad: bad i";
      if (!in01(m.p)) return "pad: bad p";
      return null;
    case "strip":
      if (!in01(m.pos)) return "strip: bad pos";
      return null;
    case "set_context":
      if (m.key !== undefined && (!isInt(m.key) || m.key < 0 || m.key > 11))
        return "set_context: bad key";
      if (m.scale !== undefined && (!isInt(m.scale) || m.scale < 0))
        return "set_context: bad scale";
      if (m.tempo !== undefined && (!isNum(m.tempo) || m.tempo < 20 || m.tempo > 300))
        return "set_context: bad tempo";
      if (m.key === undefined && m.scale === undefined && m.tempo === undefined)
        return "set_context: empty";
      return null;
    case "preset":
      if (m.name === undefined && m.id === undefined) return "preset: needs name or id";
      if (m.name !== undefined && typeof m.name !== "string") return "preset: bad name";
      if (m.id !== undefined && !isInt(m.id)) return "preset: bad id";
      return null;
    case "toggle_fx":
      return null;
    case "transport":
      if (m.playing !== undefined && typeof m.playing !== "boolean")
        return "transport: bad playing";
      return null;
    default:
      return `unknown type ${String(m.type)}`;
  }
}

/** Parse one raw frame from the engine; null when it is not a known push. */
export function parsePush(raw: string): EnginePush | null {
  let data: unknown;
  try {
    data = JSON.parse(raw);
  } catch {
    return null;
  }
  if (typeof data !== "object" || data === null) return null;
  const m = data as Record<string, unknown>;
  switch (m.type) {
    case "context":
      if (isInt(m.key) && isInt(m.scale) && typeof m.scale_name === "string" &&
          isNum(m.tempo)) return data as ContextPush;
      return null;
    case "step":
      return isInt(m.value) ? (data as StepPush) : null;
    case "pattern":
      if (Array.isArray(m.grid) && typeof m.playing === "boolean" &&
          typeof m.wet === "boolean") return data as PatternPush;
      return null;
    case "meter":
      return isNum(m.value) ? (data as MeterPush) : null;
    case "error":
      return typeof m.detail === "string" ? (data as ErrorPush) : null;
    default:
      return null;
  }
}
