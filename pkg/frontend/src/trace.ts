// World-to-screen projection for the x/y trajectory trace.

export interface Viewport {
  widthPx: number;
  heightPx: number;
  pxPerMm: number;
  centreXMm: number;
  centreYMm: number;
}

export const DEFAULT_PX_PER_MM = 8;

export function defaultViewport(widthPx = 360, heightPx = 360): Viewport {
  return { widthPx, heightPx, pxPerMm: DEFAULT_PX_PER_MM, centreXMm: 0, centreYMm: 0 };
}

export interface Pixel {
  x: number;
  y: number;
}

export function projectPoint(xMm: number, yMm: number, vp: Viewport): Pixel {
  return {
    x: vp.widthPx / 2 + (xMm - vp.centreXMm) * vp.pxPerMm,
    y: vp.heightPx / 2 - (yMm - vp.centreYMm) * vp.pxPerMm,
  };
}

export function projectTrace(pointsMm: Array<[number, number]>, vp: Viewport): Pixel[] {
  return pointsMm.map(([x, y]) => projectPoint(x, y, vp));
}

export function traceClosurePx(trace: Pixel[]): number {
  if (trace.length < 2) return 0;
  const a = trace[0];
  const b = trace[trace.length - 1];
  return Math.hypot(a.x - b.x, a.y - b.y);
}
