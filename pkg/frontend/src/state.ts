/**
 * Mirrored engine state.  The UI never mutates musical state locally: every
 * change goes out as a control message and lands back here through an engine
 * push.  The only locally-owned field is the connection status.
 */

import {
  ContextPush,
  EnginePush,
  PatternCell,
  PAD_COUNT,
  STEP_COUNT,
  TOUCH_KEYS,
} from "./protocol.js";

export type ConnectionStatus = "connecting" | "open" | "closed";

/** Fixed dimensions of the control surface panels. */
export interface PanelLayout {
  keys: number;
  pads: number;
  steps: number;
}

export interface UiState {
  context: { key: number; scale: number; scaleName: string; tempo: number } | null;
  grid: PatternCell[][];
  playing: boolean;
  wet: boolean;
  step: number;
  meter: number;
  connection: ConnectionStatus;
  lastError: string | null;
  layout: PanelLayout;
}

export function emptyGrid(): PatternCell[][] {
  return Array.from({ length: PAD_COUNT }, () =>
    Array.from({ length: STEP_COUNT }, () => ({ on: false, p: 0 })),
  );
}

export function initialState(): UiState {
  return {
    context: null,
    grid: emptyGrid(),
    playing: false,
    wet: true,
    step: 0,
    meter: 0,
    connection: "connecting",
    lastError: null,
    layout: { keys: TOUCH_KEYS, pads: PAD_COUNT, steps: STEP_COUNT },
  };
}

export type StateListener = (state: UiState) => void;

export class StateStore {
  private state: UiState = initialState();
  private listeners: StateListener[] = [];

  get(): UiState {
    return this.state;
  }

  subscribe(fn: StateListener): void {
    this.listeners.push(fn);
  }

  private emit(): void {
    for (const fn of this.listeners) fn(this.state);
  }

  setConnection(status: ConnectionStatus): void {
    this.state = { ...this.state, connection: status };
    this.emit();
  }

  /** Fold one engine push into the mirror. */
  apply(push: EnginePush): void {
    switch (push.type) {
      case "context": {
        const c: ContextPush = push;
        this.state = {
          ...this.state,
          context: { key: c.key, scale: c.scale, scaleName: c.scale_name, tempo: c.tempo },
        };
        break;
      }
      case "step":
        this.state = { ...this.state, step: push.value };
        break;
      case "pattern":
        this.state = {
          ...this.state,
          grid: push.grid,
          playing: push.playing,
          wet: push.wet,
        };
        break;
      case "meter":
        this.state = { ...this.state, meter: push.value };
        break;
      case "error":
        this.state = { ...this.state, lastError: push.detail };
        break;
    }
    this.emit();
  }
}
