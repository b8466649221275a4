/**
 * DOM glue.  Builds the control surface, wires pointer and keyboard gestures
 * into the controller, and repaints from the state store.  All musical state
 * is engine-owned: this file never updates the mirror directly, it only
 * sends controls and draws whatever the engine pushes back.
 */

import { EngineSocket } from "./socket.js";
import { StateStore, UiState } from "./state.js";
import { SurfaceController } from "./controllers.js";

const KEY_NAMES = ["C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B"];
const SCALE_NAMES = [
  "major", "natural minor", "major pentatonic", "minor pentatonic",
  "dorian", "mixolydian", "harmonic minor", "chromatic",
];
const PRESET_NAMES = [
  "warm_keys", "glass_pad", "harp_pluck", "glide_lead", "sub_bass", "bright_comp",
];

/** ws://host:8765 by default; override with ?engine=ws://... */
function engineUrl(): string {
  const param = new URLSearchParams(location.search).get("engine");
  if (param) return param;
  return `ws://${location.hostname || "localhost"}:8765`;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K, cls?: string, text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (cls) node.className = cls;
  if (text !== undefined) node.textContent = text;
  return node;
}

function select(labelText: string, options: string[]): { wrap: HTMLElement; sel: HTMLSelectElement } {
  const wrap = el("label", "field", labelText + " ");
  const sel = el("select");
  options.forEach((name, i) => {
    const opt = el("option", undefined, name);
    opt.value = String(i);
    sel.appendChild(opt);
  });
  wrap.appendChild(sel);
  return { wrap, sel };
}

/** True for a keyboard-initiated click (pointer clicks are handled separately). */
function fromKeyboard(ev: MouseEvent): boolean {
  return ev.detail === 0;
}

export function mount(root: HTMLElement): void {
  const store = new StateStore();
  const layout = store.get().layout;
  const socket = new EngineSocket(engineUrl());
  const ctl = new SurfaceController(socket);
  socket.onPush = (push) => store.apply(push);
  socket.onStatus = (status) => store.setConnection(status);
  socket.onDropped = () =>
    store.apply({ type: "error", detail: "engine unreachable, control dropped" });

  // ---- header: connection + meter ----------------------------------------
  const banner = el("div", "banner", "connecting");
  const meterFill = el("div", "meter-fill");
  const meter = el("div", "meter");
  meter.appendChild(meterFill);
  const header = el("header");
  header.append(el("h1", undefined, "ensemble surface"), banner, meter);

  // ---- context panel -------------------------------------------------------
  const keySel = select("key", KEY_NAMES);
  const scaleSel = select("scale", SCALE_NAMES);
  const presetSel = select("preset", PRESET_NAMES);
  keySel.sel.addEventListener("change", () =>
    ctl.contextSelect({ key: Number(keySel.sel.value) }));
  scaleSel.sel.addEventListener("change", () =>
    ctl.contextSelect({ scale: Number(scaleSel.sel.value) }));
  presetSel.sel.addEventListener("change", () =>
    ctl.presetSelect(Number(presetSel.sel.value)));

  const tempoLabel = el("span", "tempo", "-- BPM");
  const fxBtn = el("button", "toggle", "fx: wet");
  fxBtn.addEventListener("click", () => ctl.fxToggle());
  const playBtn = el("button", "toggle", "play");
  playBtn.addEventListener("click", () => ctl.transportToggle(!store.get().playing));
  const status = el("div", "status", "");

  const context = el("section", "panel context");
  context.append(keySel.wrap, scaleSel.wrap, presetSel.wrap, tempoLabel, fxBtn, playBtn, status);

  // ---- step grid (engine-owned, display only) ------------------------------
  const gridPanel = el("section", "panel grid");
  const cells: HTMLElement[][] = [];
  for (let track = 0; track < layout.pads; track++) {
    const row = el("div", "grid-row");
    const rowCells: HTMLElement[] = [];
    for (let step = 0; step < layout.steps; step++) {
      const cell = el("div", "cell");
      row.appendChild(cell);
      rowCells.push(cell);
    }
    gridPanel.appendChild(row);
    cells.push(rowCells);
  }

  // ---- drum pads ------------------------------------------------------------
  const padsPanel = el("section", "panel pads");
  for (let i = 0; i < layout.pads; i++) {
    const pad = el("button", "pad", `pad ${i + 1}`);
    let downAt = 0;
    let downPressure = 0;
    pad.addEventListener("pointerdown", (ev) => {
      downAt = performance.now();
      downPressure = ev.pressure;
    });
    pad.addEventListener("pointerup", () => {
      ctl.padPress(i, downPressure, performance.now() - downAt);
    });
    pad.addEventListener("click", (ev) => {
      if (fromKeyboard(ev)) ctl.padPress(i, 0.7);
    });
    padsPanel.appendChild(pad);
  }

  // ---- tempo strip ----------------------------------------------------------
  const strip = el("div", "strip");
  strip.tabIndex = 0;
  strip.setAttribute("role", "slider");
  strip.setAttribute("aria-label", "tempo");
  const stripFill = el("div", "strip-fill");
  strip.appendChild(stripFill);
  let stripDown = false;
  let stripPos = 0.5;
  const posFrom = (ev: PointerEvent): number => {
    const rect = strip.getBoundingClientRect();
    return (ev.clientX - rect.left) / rect.width;
  };
  strip.addEventListener("pointerdown", (ev) => {
    stripDown = true;
    strip.setPointerCapture(ev.pointerId);
    ctl.stripDrag(posFrom(ev));
  });
  strip.addEventListener("pointermove", (ev) => {
    if (stripDown) ctl.stripDrag(posFrom(ev));
  });
  strip.addEventListener("pointerup", (ev) => {
    stripDown = false;
    ctl.stripRelease(posFrom(ev));
  });
  strip.addEventListener("keydown", (ev) => {
    if (ev.key !== "ArrowLeft" && ev.key !== "ArrowRight") return;
    ev.preventDefault();
    stripPos = Math.min(1, Math.max(0, stripPos + (ev.key === "ArrowRight" ? 0.05 : -0.05)));
    ctl.stripRelease(stripPos);
  });

  // ---- touch keys -------------------------------------------------------------
  const keysPanel = el("section", "panel keys");
  for (let i = 0; i < layout.keys; i++) {
    const key = el("button", "key", String(i));
    let held = false;
    key.addEventListener("pointerdown", () => {
      held = true;
      ctl.keyPress(i, true);
    });
    const release = () => {
      if (!held) return;
      held = false;
      ctl.keyPress(i, false);
    };
    key.addEventListener("pointerup", release);
    key.addEventListener("pointercancel", release);
    key.addEventListener("pointerleave", release);
    key.addEventListener("click", (ev) => {
      if (!fromKeyboard(ev)) return;
      ctl.keyPress(i, true);
      ctl.keyPress(i, false);
    });
    keysPanel.appendChild(key);
  }

  root.append(header, context, gridPanel, padsPanel, strip, keysPanel);

  // ---- repaint ------------------------------------------------------------------
  const render = (s: UiState): void => {
    banner.textContent = s.connection;
    banner.className = `banner ${s.connection}`;
    meterFill.style.width = `${Math.min(100, s.meter * 300)}%`;
    if (s.context) {
      tempoLabel.textContent = `${Math.round(s.context.tempo)} BPM`;
      keySel.sel.value = String(s.context.key);
      if (s.context.scale < SCALE_NAMES.length) {
        scaleSel.sel.value = String(s.context.scale);
      }
      strip.setAttribute("aria-valuenow", String(Math.round(s.context.tempo)));
      stripFill.style.width = `${((s.context.tempo - 60) / 120) * 100}%`;
    }
    fxBtn.textContent = s.wet ? "fx: wet" : "fx: dry";
    playBtn.textContent = s.playing ? "stop" : "play";
    status.textContent = s.lastError ?? "";
    for (let track = 0; track < layout.pads; track++) {
      for (let step = 0; step < layout.steps; step++) {
        const cell = s.grid[track]?.[step];
        const node = cells[track][step];
        node.classList.toggle("on", Boolean(cell?.on));
        node.classList.toggle("now", s.playing && step === s.step);
        node.style.opacity = cell?.on ? String(0.4 + 0.6 * cell.p) : "";
      }
    }
  };
  store.subscribe(render);
  render(store.get());

  socket.connect();
}

const rootEl = typeof document !== "undefined" ? document.getElementById("app") : null;
if (rootEl !== null) mount(rootEl);
