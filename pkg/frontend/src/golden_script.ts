// Scripted joystick input used to record the golden command-log fixture.
// The sequence is deterministic: an engage/disengage cycle sweeping all
// three axes at the fixed command rate.

import { COMMAND_RATE_HZ, JoystickState } from "./joystick.js";

export interface ScriptedSample {
  t: number;
  state: JoystickState;
}

export function scriptedSequence(seconds = 4): ScriptedSample[] {
  const samples: ScriptedSample[] = [];
  const n = seconds * COMMAND_RATE_HZ;
  for (let k = 0; k < n; k += 1) {
    const t = k / COMMAND_RATE_HZ;
    const phase = Math.floor(k / COMMAND_RATE_HZ) % 4;
    let state: JoystickState;
    if (phase === 0) {
      state = { vz: (k % 15) / 14, wx: 0, wy: 0, engaged: true };
    } else if (phase === 1) {
      state = { vz: 0, wx: ((k % 15) - 7) / 7, wy: 0, engaged: true };
    } else if (phase === 2) {
      state = { vz: -0.5, wx: 0.25, wy: -((k % 15) / 14), engaged: true };
    } else {
      // Disengaged: deflections present but no command may be sent.
      state = { vz: 0.9, wx: -0.4, wy: 0.7, engaged: false };
    }
    samples.push({ t, state });
  }
  return samples;
}
