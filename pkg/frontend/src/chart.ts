// Scales, ticks, and path geometry shared by both panels.

export interface Extent {
  min: number;
  max: number;
}

export interface Scale {
  (value: number): number;
  domain: Extent;
}

export function extentOf(values: number[], fallback: Extent = { min: 0, max: 1 }): Extent {
  if (values.length === 0) {
    return fallback;
  }
  let min = Infinity;
  let max = -Infinity;
  for (const v of values) {
    if (v < min) min = v;
    if (v > max) max = v;
  }
  if (min === max) {
    // a flat series still needs a visible band around it
    const pad = min === 0 ? 1 : Math.abs(min) * 0.1;
    return { min: min - pad, max: max + pad };
  }
  return { min, max };
}

export function linearScale(domain: Extent, rangeLo: number, rangeHi: number): Scale {
  const span = domain.max - domain.min;
  const scale = ((value: number) =>
    rangeLo + ((value - domain.min) / span) * (rangeHi - rangeLo)) as Scale;
  scale.domain = domain;
  return scale;
}

/** Round tick positions covering the domain: 1-2-5 steps, ~count of them. */
export function ticks(domain: Extent, count: number): number[] {
  const span = domain.max - domain.min;
  const raw = span / Math.max(1, count);
  const mag = Math.pow(10, Math.floor(Math.log10(raw)));
  const residual = raw / mag;
  const step = mag * (residual >= 5 ? 10 : residual >= 2 ? 5 : residual >= 1 ? 2 : 1);
  const first = Math.ceil(domain.min / step) * step;
  const out: number[] = [];
  for (let v = first; v <= domain.max + step * 1e-9; v += step) {
    // kill -0 and accumulated float dust so labels render cleanly
    out.push(Number(v.toFixed(10)) + 0);
  }
  return out;
}

export function formatTick(value: number): string {
  return String(Number(value.toPrecision(6)));
}

const COORD_DECIMALS = 2;

export function polylinePoints(xs: number[], ys: number[]): string {
  const parts: string[] = [];
  for (let i = 0; i < xs.length; i++) {
    parts.push(`${xs[i]!.toFixed(COORD_DECIMALS)},${ys[i]!.toFixed(COORD_DECIMALS)}`);
  }
  return parts.join(" ");
}
