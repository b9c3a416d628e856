import { readFileSync } from 'node:fs';
import { describe, expect, it } from 'vitest';

import {
  OVERLAY_TINTS,
  compositeOverlay,
  maskPopcount,
  provenancePopcount,
} from '../src/overlay.js';

const maskFixture = JSON.parse(
  readFileSync(new URL('./fixtures/refined_mask.json', import.meta.url), 'utf-8'),
) as { width: number; height: number; pixels: number[]; provenance: Record<string, number> };

function solidBase(pixels: number, value = 100): Uint8ClampedArray {
  const base = new Uint8ClampedArray(pixels * 4);
  for (let k = 0; k < base.length; k++) base[k] = (k + 1) % 4 === 0 ? 255 : value;
  return base;
}

describe('mask overlay compositing', () => {
  it('empty mask leaves the image untouched', () => {
    const base = solidBase(16);
    const out = compositeOverlay(base, new Uint8ClampedArray(16), 0.8, OVERLAY_TINTS.refined);
    expect([...out]).toEqual([...base]);
  });

  it('full mask at opacity 1 is a solid tint', () => {
    const base = solidBase(4);
    const mask = new Uint8ClampedArray(4).fill(255);
    const out = compositeOverlay(base, mask, 1.0, { r: 10, g: 20, b: 30 });
    for (let p = 0; p < 4; p++) {
      expect(out[p * 4]).toBe(10);
      expect(out[p * 4 + 1]).toBe(20);
      expect(out[p * 4 + 2]).toBe(30);
      expect(out[p * 4 + 3]).toBe(255);
    }
  });

  it('never mutates its inputs', () => {
    const base = solidBase(8);
    const baseCopy = [...base];
    const mask = new Uint8ClampedArray(8).fill(255);
    const maskCopy = [...mask];
    compositeOverlay(base, mask, 0.5, OVERLAY_TINTS.soft);
    expect([...base]).toEqual(baseCopy);
    expect([...mask]).toEqual(maskCopy);
  });

  it('rejects mismatched sizes and bad opacity', () => {
    expect(() => compositeOverlay(solidBase(4), new Uint8ClampedArray(5), 0.5, OVERLAY_TINTS.soft))
      .toThrow(RangeError);
    expect(() => compositeOverlay(solidBase(4), new Uint8ClampedArray(4), 1.5, OVERLAY_TINTS.soft))
      .toThrow(RangeError);
  });

  it('popcount of the served mask equals the server-reported provenance count', () => {
    expect(maskFixture.pixels.length).toBe(maskFixture.width * maskFixture.height);
    const clientCount = maskPopcount(maskFixture.pixels);
    const serverCount = provenancePopcount(maskFixture.provenance);
    expect(clientCount).toBe(serverCount);
    expect(clientCount).toBeGreaterThan(0);
  });
});
