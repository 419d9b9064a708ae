import { describe, expect, it } from "vitest";

import { buildBanner, buildPanels } from "../src/panels.js";
import { StateFrame } from "../src/protocol.js";
import { SessionView } from "../src/view.js";

function stateFrame(seq: number, overrides: Partial<StateFrame> = {}): StateFrame {
  return {
    v: 1,
    type: "state",
    seq,
    t: seq / 30,
    position_mm: [1, 2, 3],
    tilt_deg: [0.1, -0.2, 0],
    volumes_ml: [1, 2, 3],
    volume_fraction: [0.25, 0.5, 0.75],
    wrench: [0, 0, 5, 0, 0, 0],
    saturated: [false, false, false],
    ...overrides,
  };
}

describe("session view", () => {
  it("always displays the newest frame and drops reordered ones", () => {
    const view = new SessionView();
    view.push(stateFrame(5));
    view.push(stateFrame(7, { position_mm: [9, 9, 9] }));
    expect(view.latest?.seq).toBe(7);
    const accepted = view.push(stateFrame(6, { position_mm: [0, 0, 0] }));
    expect(accepted).toBe(false);
    expect(view.latest?.position_mm).toEqual([9, 9, 9]);
  });

  it("bounds the history ring", () => {
    const view = new SessionView(10);
    for (let k = 1; k <= 50; k += 1) view.push(stateFrame(k));
    expect(view.history.length).toBe(10);
    expect(view.history[0].seq).toBe(41);
  });

  it("reconnection resets the live trace without touching replay state", () => {
    const view = new SessionView();
    view.push(stateFrame(1));
    view.push(stateFrame(2));
    const replayArtifact = [[0, 0], [1, 1]]; // held separately from the view
    view.setStatus("connected");
    expect(view.history.length).toBe(0);
    expect(view.latest).toBeNull();
    expect(replayArtifact.length).toBe(2);
    view.push(stateFrame(1));
    expect(view.history.length).toBe(1);
  });

  it("error frames keep the last good state and surface the message", () => {
    const view = new SessionView();
    view.push(stateFrame(3));
    view.push({ v: 1, type: "error", message: "bad frame" });
    expect(view.latest?.seq).toBe(3);
    expect(view.lastError).toBe("bad frame");
    view.push({ v: 1, type: "fatal", message: "solver failed" });
    expect(view.status).toBe("disconnected");
  });
});

describe("panels", () => {
  it("half-full volumes render gauges at half", () => {
    const panels = buildPanels(stateFrame(1, { volume_fraction: [0.5, 0.5, 0.5] }));
    expect(panels.gauges.map((g) => g.fraction)).toEqual([0.5, 0.5, 0.5]);
  });

  it("saturation flag raises the visual indicator", () => {
    const clear = buildPanels(stateFrame(1));
    expect(clear.saturationWarning).toBe(false);
    const flagged = buildPanels(stateFrame(2, { saturated: [false, true, false] }));
    expect(flagged.saturationWarning).toBe(true);
    expect(flagged.gauges[1].saturated).toBe(true);
  });

  it("contact force readout is the force norm", () => {
    const panels = buildPanels(stateFrame(1, { wrench: [3, 4, 0, 0, 0, 0] }));
    expect(panels.contactForceN).toBeCloseTo(5, 12);
  });

  it("banner disables the joystick when disconnected", () => {
    expect(buildBanner("connected", null).joystickEnabled).toBe(true);
    const down = buildBanner("disconnected", "socket closed");
    expect(down.joystickEnabled).toBe(false);
    expect(down.alert).toBe(true);
    expect(down.text).toContain("socket closed");
  });
});
