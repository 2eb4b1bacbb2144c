/**
 * Explorer state: the current design vector, bounds-aware clamping with
 * an out-of-range escape hatch, pinned comparison designs, and caches of
 * the last prediction and the dataset Pareto overlay.
 *
 * The state never computes physics; every displayed number comes from a
 * service response.
 */

import type {
  Bounds,
  DesignVector,
  ParamName,
  ParetoPayload,
  Prediction,
} from './types';
import { PARAM_NAMES } from './types';

export const MAX_PINNED = 5;

export interface PinnedDesign {
  label: string;
  design: DesignVector;
  prediction: Prediction;
}

export interface SetResult {
  /** value actually stored (clamped unless out-of-range mode is on) */
  value: number;
  /** true when the raw value fell outside the configured bounds */
  outOfRange: boolean;
}

export class ExplorerState {
  readonly design: DesignVector;
  backend = 'builtin-liftline';
  allowOutOfRange = false;
  lastPrediction: Prediction | null = null;
  lastError: string | null = null;
  readonly pinned: PinnedDesign[] = [];
  paretoCache = new Map<string, ParetoPayload>();
  /** per-parameter out-of-range flags, shown next to the sliders */
  readonly flags: Record<ParamName, boolean>;

  constructor(readonly bounds: Bounds) {
    this.design = {} as DesignVector;
    this.flags = {} as Record<ParamName, boolean>;
    for (const name of PARAM_NAMES) {
      const [lo, hi] = bounds[name];
      this.design[name] = (lo + hi) / 2;
      this.flags[name] = false;
    }
  }

  /**
   * Set one parameter.  With out-of-range mode off, the value clamps to
   * the configured interval and the flag is hidden; with it on, the raw
   * value is kept and flagged.
   */
  setParam(name: ParamName, raw: number): SetResult {
    if (!Number.isFinite(raw)) {
      return { value: this.design[name], outOfRange: false };
    }
    const [lo, hi] = this.bounds[name];
    const outOfRange = raw < lo || raw > hi;
    const value = this.allowOutOfRange ? raw : Math.min(hi, Math.max(lo, raw));
    this.design[name] = value;
    this.flags[name] = this.allowOutOfRange && outOfRange;
    return { value, outOfRange: this.flags[name] };
  }

  /** Re-apply clamping after the out-of-range toggle is switched off. */
  setAllowOutOfRange(allow: boolean): void {
    this.allowOutOfRange = allow;
    for (const name of PARAM_NAMES) {
      this.setParam(name, this.design[name]);
    }
  }

  setDesign(values: DesignVector): void {
    for (const name of PARAM_NAMES) {
      this.setParam(name, values[name]);
    }
  }

  recordPrediction(p: Prediction): void {
    this.lastPrediction = p;
    this.lastError = null;
  }

  /** Service errors are shown inline; the last good state is retained. */
  recordError(message: string): void {
    this.lastError = message;
  }

  pin(label: string): boolean {
    if (this.pinned.length >= MAX_PINNED || this.lastPrediction === null) {
      return false;
    }
    this.pinned.push({
      label,
      design: { ...this.design },
      prediction: this.lastPrediction,
    });
    return true;
  }

  unpin(index: number): void {
    this.pinned.splice(index, 1);
  }

  /** Best-phi array from an optimization result, applied to the sliders. */
  adoptResult(phi: number[]): void {
    const values = {} as DesignVector;
    PARAM_NAMES.forEach((name, i) => {
      values[name] = phi[i] ?? this.design[name];
    });
    this.setDesign(values);
  }
}
