// Pure view-models for the console panels; the DOM layer just applies them.

import { StateFrame } from "./protocol.js";
import { ConnectionStatus } from "./view.js";

export interface GaugeModel {
  label: string;
  fraction: number; // 0..1
  saturated: boolean;
}

export interface PanelModel {
  poseLines: string[];
  gauges: GaugeModel[];
  contactForceN: number;
  saturationWarning: boolean;
  time: number;
}

export function buildPanels(frame: StateFrame): PanelModel {
  const [x, y, z] = frame.position_mm;
  const [rx, ry, rz] = frame.tilt_deg;
  const force = Math.hypot(frame.wrench[0], frame.wrench[1], frame.wrench[2]);
  return {
    poseLines: [
      `x ${x.toFixed(2)} mm   y ${y.toFixed(2)} mm   z ${z.toFixed(2)} mm`,
      `rx ${rx.toFixed(2)} deg   ry ${ry.toFixed(2)} deg   rz ${rz.toFixed(2)} deg`,
    ],
    gauges: frame.volume_fraction.map((fraction, i) => ({
      label: `V${i + 1}`,
      fraction: Math.min(1, Math.max(0, fraction)),
      saturated: frame.saturated[i] ?? false,
    })),
    contactForceN: force,
    saturationWarning: frame.saturated.some(Boolean),
    time: frame.t,
  };
}

export interface BannerModel {
  text: string;
  joystickEnabled: boolean;
  alert: boolean;
}

export function buildBanner(status: ConnectionStatus, lastError: string | null): BannerModel {
  if (status === "connected") {
    return { text: lastError ? `connected — ${lastError}` : "connected", joystickEnabled: true, alert: false };
  }
  if (status === "connecting") {
    return { text: "connecting…", joystickEnabled: false, alert: false };
  }
  return { text: lastError ? `disconnected — ${lastError}` : "disconnected", joystickEnabled: false, alert: true };
}
