// Browser wiring: WebSocket session, joystick inputs, panel rendering, and
// replay of persisted run logs onto the trace canvas.

import { COMMAND_RATE_HZ, DEFAULT_LIMITS, JoystickState, idleJoystick, mapJoystick } from "./joystick.js";
import { buildBanner, buildPanels } from "./panels.js";
import { decodeFrame, encodeFrame, isStateFrame } from "./protocol.js";
import { parseRunLog, trackingRows } from "./runlog.js";
import { Pixel, defaultViewport, projectTrace } from "./trace.js";
import { SessionView } from "./view.js";

const view = new SessionView();
const joystick: JoystickState = idleJoystick();
let replayTrace: Pixel[] | null = null;
let socket: WebSocket | null = null;
let startedAt = performance.now();

function $(id: string): HTMLElement {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el;
}

function connect(): void {
  const proto = location.protocol === "https:" ? "wss:" : "ws:";
  const url = `${proto}//${location.host}/session`;
  view.setStatus("connecting");
  socket = new WebSocket(url);
  socket.onopen = () => {
    startedAt = performance.now();
    view.setStatus("connected");
  };
  socket.onclose = () => view.setStatus("disconnected");
  socket.onerror = () => view.setStatus("disconnected");
  socket.onmessage = (event: MessageEvent) => {
    try {
      view.push(decodeFrame(String(event.data)));
    } catch {
      view.lastError = "unreadable frame";
    }
    render();
  };
}

function sendCommand(): void {
  if (!socket || socket.readyState !== WebSocket.OPEN) return;
  const t = (performance.now() - startedAt) / 1000;
  const banner = buildBanner(view.status, view.lastError);
  const state = banner.joystickEnabled ? joystick : idleJoystick();
  socket.send(encodeFrame(mapJoystick(state, DEFAULT_LIMITS, t)));
}

function drawTrace(): void {
  const canvas = $("trace") as HTMLCanvasElement;
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const vp = defaultViewport(canvas.width, canvas.height);
  const draw = (trace: Pixel[], style: string) => {
    if (trace.length < 2) return;
    ctx.strokeStyle = style;
    ctx.lineWidth = 1.25;
    ctx.beginPath();
    ctx.moveTo(trace[0].x, trace[0].y);
    for (const p of trace.slice(1)) ctx.lineTo(p.x, p.y);
    ctx.stroke();
  };
  if (replayTrace) draw(replayTrace, "#888");
  const live = projectTrace(
    view.history.map((f) => [f.position_mm[0], f.position_mm[1]] as [number, number]),
    vp,
  );
  draw(live, "#0a6");
}

function render(): void {
  const banner = buildBanner(view.status, view.lastError);
  const bannerEl = $("banner");
  bannerEl.textContent = banner.text;
  bannerEl.className = banner.alert ? "banner alert" : "banner";
  const pad = $("pad");
  pad.classList.toggle("disabled", !banner.joystickEnabled);
  if (view.latest) {
    const panels = buildPanels(view.latest);
    $("pose").textContent = panels.poseLines.join("\n");
    $("force").textContent = `contact ${panels.contactForceN.toFixed(2)} N`;
    $("clock").textContent = `t = ${panels.time.toFixed(2)} s`;
    const gauges = $("gauges");
    gauges.innerHTML = "";
    for (const g of panels.gauges) {
      const row = document.createElement("div");
      row.className = "gauge";
      const bar = document.createElement("div");
      bar.className = g.saturated ? "bar saturated" : "bar";
      bar.style.width = `${Math.round(g.fraction * 100)}%`;
      const label = document.createElement("span");
      label.textContent = `${g.label} ${(g.fraction * 100).toFixed(0)}%`;
      row.appendChild(bar);
      row.appendChild(label);
      gauges.appendChild(row);
    }
    $("saturation").hidden = !panels.saturationWarning;
  }
  drawTrace();
}

function bindInputs(): void {
  const pad = $("pad");
  const setTilt = (event: PointerEvent) => {
    const rect = pad.getBoundingClientRect();
    joystick.wy = ((event.clientX - rect.left) / rect.width) * 2 - 1;
    joystick.wx = -(((event.clientY - rect.top) / rect.height) * 2 - 1);
  };
  pad.addEventListener("pointerdown", (e) => {
    joystick.engaged = true;
    setTilt(e as PointerEvent);
    pad.setPointerCapture((e as PointerEvent).pointerId);
  });
  pad.addEventListener("pointermove", (e) => {
    if (joystick.engaged) setTilt(e as PointerEvent);
  });
  const release = () => {
    joystick.engaged = false;
    joystick.wx = 0;
    joystick.wy = 0;
  };
  pad.addEventListener("pointerup", release);
  pad.addEventListener("pointercancel", release);

  const slider = $("axial") as HTMLInputElement;
  slider.addEventListener("input", () => {
    joystick.vz = Number(slider.value);
    joystick.engaged = true;
  });
  slider.addEventListener("change", () => {
    slider.value = "0";
    joystick.vz = 0;
    joystick.engaged = joystick.wx !== 0 || joystick.wy !== 0;
  });

  const keyRates: Record<string, [keyof JoystickState, number]> = {
    ArrowUp: ["wx", 1],
    ArrowDown: ["wx", -1],
    ArrowLeft: ["wy", -1],
    ArrowRight: ["wy", 1],
    w: ["vz", 1],
    s: ["vz", -1],
  };
  window.addEventListener("keydown", (e) => {
    const hit = keyRates[e.key];
    if (!hit) return;
    (joystick[hit[0]] as number) = hit[1];
    joystick.engaged = true;
  });
  window.addEventListener("keyup", (e) => {
    const hit = keyRates[e.key];
    if (!hit) return;
    (joystick[hit[0]] as number) = 0;
    if (joystick.vz === 0 && joystick.wx === 0 && joystick.wy === 0) {
      joystick.engaged = false;
    }
  });

  const file = $("replay") as HTMLInputElement;
  file.addEventListener("change", async () => {
    const chosen = file.files?.[0];
    if (!chosen) return;
    const rows = trackingRows(parseRunLog(await chosen.text()));
    replayTrace = projectTrace(
      rows.map((r) => [r.actual[0], r.actual[1]] as [number, number]),
      defaultViewport(360, 360),
    );
    render();
  });
}

export function start(): void {
  bindInputs();
  connect();
  setInterval(sendCommand, 1000 / COMMAND_RATE_HZ);
  setInterval(render, 100);
}

start();
