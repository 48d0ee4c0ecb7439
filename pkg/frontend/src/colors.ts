// One diverging scale for every heatmap, so values read the same across
// the node-link view, the matrix view, and the provenance pop-ups.

export interface ColorScale {
  lo: number;
  hi: number;
  toColor(value: number): string;
}

/** Diverging blue-white-orange scale, symmetric around zero. */
export function makeScale(values: number[]): ColorScale {
  let peak = 0;
  for (const v of values) peak = Math.max(peak, Math.abs(v));
  if (peak === 0) peak = 1;
  const lo = -peak;
  const hi = peak;
  return {
    lo,
    hi,
    toColor(value: number): string {
      const t = Math.max(-1, Math.min(1, value / peak));
      if (t >= 0) {
        const s = Math.round(255 * (1 - t));
        return `rgb(255,${155 + Math.round(s * 100 / 255)},${s})`;
      }
      const s = Math.round(255 * (1 + t));
      return `rgb(${s},${155 + Math.round(s * 100 / 255)},255)`;
    },
  };
}

/** Gradient used for attention coefficients (0..1). */
export function attentionColor(alpha: number): string {
  const t = Math.max(0, Math.min(1, alpha));
  const g = Math.round(230 - 160 * t);
  return `rgb(${Math.round(255 - 80 * t)},${g},60)`;
}

export function curveWidth(coefficient: number): number {
  return 0.5 + 4 * Math.min(1, Math.abs(coefficient));
}
