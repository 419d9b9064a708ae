// Parser for persisted run-log CSV files (the closed-loop artifact format).
// Values are plain numerics without quoting, one header line.

export const RUNLOG_HEADER = [
  "t [s]",
  "x_d [mm]", "y_d [mm]", "z_d [mm]",
  "x_m [mm]", "y_m [mm]", "z_m [mm]",
  "x [mm]", "y [mm]", "z [mm]",
  "V1 [ml]", "V2 [ml]", "V3 [ml]",
  "Fx [N]", "Fy [N]", "Fz [N]",
];

export interface RunLogRow {
  t: number;
  target: [number, number, number]; // mm
  measured: [number, number, number];
  actual: [number, number, number];
  volumesMl: [number, number, number];
  forceN: [number, number, number];
}

export function parseRunLog(text: string): RunLogRow[] {
  const lines = text.split(/\r?\n/).filter((line) => line.length > 0);
  if (lines.length === 0) {
    throw new Error("empty run log");
  }
  const header = lines[0].split(",");
  if (header.length !== RUNLOG_HEADER.length || header.some((h, i) => h !== RUNLOG_HEADER[i])) {
    throw new Error("not a run log: unexpected header");
  }
  return lines.slice(1).map((line, idx) => {
    const cells = line.split(",").map(Number);
    if (cells.length !== RUNLOG_HEADER.length || cells.some((c) => !Number.isFinite(c))) {
      throw new Error(`bad run-log row ${idx + 1}`);
    }
    return {
      t: cells[0],
      target: [cells[1], cells[2], cells[3]],
      measured: [cells[4], cells[5], cells[6]],
      actual: [cells[7], cells[8], cells[9]],
      volumesMl: [cells[10], cells[11], cells[12]],
      forceN: [cells[13], cells[14], cells[15]],
    };
  });
}

// The lap itself: settle-phase rows carry negative timestamps.
export function trackingRows(rows: RunLogRow[]): RunLogRow[] {
  return rows.filter((row) => row.t >= 0);
}
