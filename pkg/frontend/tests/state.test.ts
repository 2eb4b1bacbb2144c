import { describe, expect, it } from 'vitest';

import { ExplorerState, MAX_PINNED } from '../src/state';
import type { Bounds, Prediction } from '../src/types';

const BOUNDS: Bounds = {
  c_r: [0.7, 1.2],
  b: [1.0, 1.5],
  taper: [0.4, 0.7],
  sweep_deg: [0, 40],
  U_inf: [150, 300],
  alpha_deg: [-10, 10],
};

const PRED: Prediction = {
  C_D: 0.02,
  C_l: 0.3,
  lift_to_drag: 15,
  mach: 0.6,
  reynolds: 1.2e7,
  out_of_range: false,
  backend_version: 'test',
};

describe('ExplorerState', () => {
  it('initializes at the center of each interval', () => {
    const s = new ExplorerState(BOUNDS);
    expect(s.design.c_r).toBeCloseTo(0.95, 12);
    expect(s.design.alpha_deg).toBeCloseTo(0, 12);
  });

  it('clamps to bounds with out-of-range mode off and hides the flag', () => {
    const s = new ExplorerState(BOUNDS);
    const r = s.setParam('sweep_deg', 55);
    expect(r.value).toBe(40);
    expect(r.outOfRange).toBe(false);
    expect(s.flags.sweep_deg).toBe(false);
  });

  it('keeps and flags raw values with out-of-range mode on', () => {
    const s = new ExplorerState(BOUNDS);
    s.setAllowOutOfRange(true);
    const r = s.setParam('alpha_deg', 25);
    expect(r.value).toBe(25);
    expect(r.outOfRange).toBe(true);
    expect(s.flags.alpha_deg).toBe(true);
  });

  it('re-clamps when the toggle is switched off', () => {
    const s = new ExplorerState(BOUNDS);
    s.setAllowOutOfRange(true);
    s.setParam('alpha_deg', 25);
    s.setAllowOutOfRange(false);
    expect(s.design.alpha_deg).toBe(10);
    expect(s.flags.alpha_deg).toBe(false);
  });

  it('ignores non-finite input', () => {
    const s = new ExplorerState(BOUNDS);
    const before = s.design.b;
    const r = s.setParam('b', Number.NaN);
    expect(r.value).toBe(before);
    expect(s.design.b).toBe(before);
  });

  it('limits pinned designs to five and snapshots the design', () => {
    const s = new ExplorerState(BOUNDS);
    s.recordPrediction(PRED);
    for (let i = 0; i < MAX_PINNED; i++) {
      expect(s.pin(`p${i}`)).toBe(true);
    }
    expect(s.pin('overflow')).toBe(false);
    s.setParam('c_r', 1.1);
    expect(s.pinned[0]?.design.c_r).toBeCloseTo(0.95, 12);
  });

  it('cannot pin before any prediction arrived', () => {
    const s = new ExplorerState(BOUNDS);
    expect(s.pin('early')).toBe(false);
  });

  it('retains the last good prediction across errors', () => {
    const s = new ExplorerState(BOUNDS);
    s.recordPrediction(PRED);
    s.recordError('service unavailable');
    expect(s.lastPrediction).toEqual(PRED);
    expect(s.lastError).toBe('service unavailable');
  });

  it('adopts an optimization result onto the sliders', () => {
    const s = new ExplorerState(BOUNDS);
    s.adoptResult([0.704, 1.499, 0.401, 33.03, 150.1, 5.06]);
    expect(s.design.c_r).toBeCloseTo(0.704, 12);
    expect(s.design.sweep_deg).toBeCloseTo(33.03, 12);
    expect(s.design.alpha_deg).toBeCloseTo(5.06, 12);
  });
});
