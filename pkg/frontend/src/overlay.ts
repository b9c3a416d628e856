// Mask overlay compositing on raw RGBA buffers. Pure pixel math so it
// is testable without a canvas; the DOM layer feeds ImageData through.

export interface Rgba {
  r: number;
  g: number;
  b: number;
}

export const OVERLAY_TINTS: Record<string, Rgba> = {
  soft: { r: 255, g: 160, b: 0 },
  refined: { r: 220, g: 40, b: 220 },
  keep: { r: 40, g: 120, b: 255 },
  alter: { r: 40, g: 220, b: 120 },
};

/**
 * Blend a tint into base RGBA pixels wherever the mask is set, weighted
 * by mask intensity and the requested opacity. Returns a new buffer;
 * neither input is mutated.
 */
export function compositeOverlay(
  base: Uint8ClampedArray,
  mask: Uint8ClampedArray | number[],
  opacity: number,
  tint: Rgba,
): Uint8ClampedArray<ArrayBuffer> {
  if (opacity < 0 || opacity > 1) {
    throw new RangeError(`opacity must be in [0,1], got ${opacity}`);
  }
  if (base.length !== mask.length * 4) {
    throw new RangeError(`base has ${base.length / 4} pixels, mask has ${mask.length}`);
  }
  const out = new Uint8ClampedArray(new ArrayBuffer(base.length));
  out.set(base);
  for (let p = 0; p < mask.length; p++) {
    const weight = (mask[p] / 255) * opacity;
    if (weight === 0) continue;
    const k = p * 4;
    out[k] = Math.round(base[k] * (1 - weight) + tint.r * weight);
    out[k + 1] = Math.round(base[k + 1] * (1 - weight) + tint.g * weight);
    out[k + 2] = Math.round(base[k + 2] * (1 - weight) + tint.b * weight);
  }
  return out;
}

/** Number of set pixels in a grayscale mask (threshold at half range). */
export function maskPopcount(mask: Uint8ClampedArray | number[]): number {
  let count = 0;
  for (let p = 0; p < mask.length; p++) {
    if (mask[p] >= 128) count++;
  }
  return count;
}

/** Popcount implied by a refined-mask provenance histogram. */
export function provenancePopcount(histogram: Record<string, number>): number {
  return (histogram.from_diffusion ?? 0) + (histogram.from_alter_union ?? 0);
}
