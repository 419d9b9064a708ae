// Wire protocol of the live session: one JSON record per WebSocket text
// frame, schema version 1. Encoding is canonical (sorted keys, no spaces)
// so recorded command logs compare byte-for-byte.

export const PROTOCOL_VERSION = 1;

export interface CommandFrame {
  v: number;
  type: "command";
  vz: number; // axial rate, mm/s
  wx: number; // tilt rate about x, deg/s
  wy: number; // tilt rate about y, deg/s
  t: number; // sender timestamp, s
}

export interface StateFrame {
  v: number;
  type: "state";
  seq: number;
  t: number;
  position_mm: number[];
  tilt_deg: number[];
  volumes_ml: number[];
  volume_fraction: number[];
  wrench: number[];
  saturated: boolean[];
}

export interface ErrorFrame {
  v: number;
  type: "error" | "fatal";
  message: string;
}

export type SessionFrame = StateFrame | ErrorFrame;

function sortKeys(value: unknown): unknown {
  if (Array.isArray(value)) {
    return value.map(sortKeys);
  }
  if (value !== null && typeof value === "object") {
    const out: Record<string, unknown> = {};
    for (const key of Object.keys(value as Record<string, unknown>).sort()) {
      out[key] = sortKeys((value as Record<string, unknown>)[key]);
    }
    return out;
  }
  return value;
}

export function encodeFrame(frame: object): string {
  return JSON.stringify(sortKeys(frame));
}

export function decodeFrame(text: string): SessionFrame {
  const obj = JSON.parse(text);
  if (typeof obj !== "object" || obj === null || typeof obj.type !== "string") {
    throw new Error("not a session frame");
  }
  return obj as SessionFrame;
}

export function isStateFrame(frame: SessionFrame): frame is StateFrame {
  return frame.type === "state";
}
