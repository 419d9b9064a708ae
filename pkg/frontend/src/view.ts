// Session view state: newest frame, bounded pose history, connection status.
// Frames arriving out of order are dropped so the display never goes
// backwards; reconnecting resets the live trace.

import { SessionFrame, StateFrame, isStateFrame } from "./protocol.js";

export type ConnectionStatus = "connecting" | "connected" | "disconnected";

export class SessionView {
  latest: StateFrame | null = null;
  lastError: string | null = null;
  status: ConnectionStatus = "connecting";
  readonly history: StateFrame[] = [];
  readonly maxHistory: number;

  constructor(maxHistory = 4096) {
    this.maxHistory = maxHistory;
  }

  push(frame: SessionFrame): boolean {
    if (!isStateFrame(frame)) {
      this.lastError = frame.message;
      if (frame.type === "fatal") {
        this.status = "disconnected";
      }
      return false;
    }
    if (this.latest !== null && frame.seq <= this.latest.seq) {
      return false; // stale or duplicated frame
    }
    this.latest = frame;
    this.history.push(frame);
    if (this.history.length > this.maxHistory) {
      this.history.splice(0, this.history.length - this.maxHistory);
    }
    return true;
  }

  setStatus(status: ConnectionStatus): void {
    this.status = status;
    if (status === "connected") {
      this.reset();
    }
  }

  reset(): void {
    this.latest = null;
    this.lastError = null;
    this.history.length = 0;
  }
}
