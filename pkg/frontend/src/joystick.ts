// Virtual 3-axis joystick: one axial slider plus a 2D tilt pad, each axis
// normalized to [-1, 1]. Commands are rates scaled by the configured limits;
// a disengaged joystick always commands zero.

import { CommandFrame, PROTOCOL_VERSION } from "./protocol.js";

export interface JoystickState {
  vz: number; // normalized axial axis
  wx: number; // normalized tilt-about-x axis
  wy: number; // normalized tilt-about-y axis
  engaged: boolean;
}

export interface RateLimits {
  axialMmPerS: number;
  tiltDegPerS: number;
}

export const DEFAULT_LIMITS: RateLimits = { axialMmPerS: 2.0, tiltDegPerS: 2.0 };

// Commands stream at a fixed rate regardless of input events; this plays
// well with the server's dead-man timeout.
export const COMMAND_RATE_HZ = 15;

export function clampAxis(x: number): number {
  if (!Number.isFinite(x)) return 0;
  return Math.min(1, Math.max(-1, x));
}

export function idleJoystick(): JoystickState {
  return { vz: 0, wx: 0, wy: 0, engaged: false };
}

export function mapJoystick(j: JoystickState, limits: RateLimits, t: number): CommandFrame {
  if (!j.engaged) {
    return { v: PROTOCOL_VERSION, type: "command", vz: 0, wx: 0, wy: 0, t };
  }
  return {
    v: PROTOCOL_VERSION,
    type: "command",
    vz: clampAxis(j.vz) * limits.axialMmPerS,
    wx: clampAxis(j.wx) * limits.tiltDegPerS,
    wy: clampAxis(j.wy) * limits.tiltDegPerS,
    t,
  };
}
