/**
 * Client-side mirror of the server's diverging colormap so markers drawn
 * from grid JSON match the exported SVG exactly: white at r = 0, linear
 * ramps to blue (+1) and red (-1), channels rounded half-to-even like the
 * renderer.
 */

export type Rgb = readonly [number, number, number];

export const POSITIVE_END: Rgb = [33, 102, 172];
export const NEGATIVE_END: Rgb = [178, 24, 43];
export const MIDPOINT: Rgb = [255, 255, 255];
export const INSIGNIFICANT = "#ffffff";

function roundHalfEven(v: number): number {
  const floor = Math.floor(v);
  const frac = v - floor;
  if (frac > 0.5) return floor + 1;
  if (frac < 0.5) return floor;
  return floor % 2 === 0 ? floor : floor + 1;
}

function hex(rgb: Rgb): string {
  return "#" + rgb.map((c) => c.toString(16).padStart(2, "0")).join("");
}

export function divergingColor(r: number): string {
  const t = Math.min(1, Math.abs(r));
  const end = r >= 0 ? POSITIVE_END : NEGATIVE_END;
  const channels = MIDPOINT.map((m, k) =>
    roundHalfEven(m + ((end[k] as number) - m) * t)
  ) as unknown as Rgb;
  return hex(channels);
}

/** Fill for one grid cell: colormap when significant, white otherwise. */
export function cellFill(r: number | null, significant: boolean): string {
  if (r === null || !significant) return INSIGNIFICANT;
  return divergingColor(r);
}
