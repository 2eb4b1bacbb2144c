/**
 * Parameter scans: sequential predictions along one axis (alpha or sweep)
 * for the polar overlay.  Partial failures keep the completed points and
 * surface a warning instead of discarding the scan.
 */

import type { ApiClient } from './api';
import type { DesignVector, ScanPoint } from './types';

export type ScanAxis = 'alpha_deg' | 'sweep_deg';

export const MAX_SCAN_VALUES = 64;

export interface ScanResult {
  axis: ScanAxis;
  points: ScanPoint[];
  nFailed: number;
  warning: string | null;
}

export async function runScan(
  client: ApiClient,
  base: DesignVector,
  axis: ScanAxis,
  values: number[],
  backend = 'builtin-liftline',
): Promise<ScanResult> {
  if (values.length === 0) {
    throw new Error('scan needs at least one value');
  }
  if (values.length > MAX_SCAN_VALUES) {
    throw new Error(`scan limited to ${MAX_SCAN_VALUES} values, got ${values.length}`);
  }
  const points: ScanPoint[] = [];
  let nFailed = 0;
  for (const value of values) {
    const design = { ...base, [axis]: value };
    try {
      const prediction = await client.predict(design, backend);
      points.push({ value, prediction, error: null });
    } catch (err) {
      nFailed += 1;
      points.push({
        value,
        prediction: null,
        error: err instanceof Error ? err.message : String(err),
      });
    }
  }
  return {
    axis,
    points,
    nFailed,
    warning:
      nFailed > 0 ? `${nFailed} of ${values.length} scan points failed` : null,
  };
}

/** Evenly spaced inclusive range used by the scan presets. */
export function linspace(start: number, stop: number, count: number): number[] {
  if (count < 1) return [];
  if (count === 1) return [start];
  const step = (stop - start) / (count - 1);
  return Array.from({ length: count }, (_, i) => start + i * step);
}
