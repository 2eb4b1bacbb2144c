/**
 * End-to-end smoke test against a live service instance (spawned from
 * the Python package in this repository).
 */

import { spawn, type ChildProcess } from 'node:child_process';
import { afterAll, beforeAll, describe, expect, it } from 'vitest';

import { ApiClient } from '../src/api';
import { incumbentCurve, isNonDecreasing, submitAndPoll } from '../src/jobs';
import { linspace, runScan } from '../src/scan';
import { ExplorerState } from '../src/state';
import type { DesignVector } from '../src/types';

const PORT = 8471 + Math.floor(Math.random() * 500);
const BASE = `http://127.0.0.1:${PORT}`;

let server: ChildProcess;
const client = new ApiClient(BASE);

async function waitForService(timeoutMs = 30_000): Promise<void> {
  const t0 = Date.now();
  while (Date.now() - t0 < timeoutMs) {
    try {
      const res = await fetch(`${BASE}/healthz`);
      if (res.ok) return;
    } catch {
      /* not up yet */
    }
    await new Promise((r) => setTimeout(r, 200));
  }
  throw new Error('service did not come up');
}

beforeAll(async () => {
  server = spawn(
    'python3',
    ['-c', `from wingforge.service import run; run(port=${PORT})`],
    { cwd: '..', stdio: 'ignore' },
  );
  await waitForService();
}, 40_000);

afterAll(() => {
  server?.kill();
});

describe('explorer smoke against the live service', () => {
  it('alpha slider 0 -> 4 deg takes displayed C_l from 0.00 to positive', async () => {
    const config = await client.getConfig();
    const state = new ExplorerState(config.bounds);

    state.setParam('alpha_deg', 0);
    const at0 = await client.predict(state.design);
    state.recordPrediction(at0);
    expect(at0.C_l.toFixed(2)).toBe('0.00');

    state.setParam('alpha_deg', 4);
    const at4 = await client.predict(state.design);
    state.recordPrediction(at4);
    expect(at4.C_l).toBeGreaterThan(0);
    expect(state.lastPrediction?.C_l).toBe(at4.C_l);
  });

  it('alpha scan renders 31 points with monotone C_l in the linear region', async () => {
    const config = await client.getConfig();
    const state = new ExplorerState(config.bounds);
    const scan = await runScan(client, state.design, 'alpha_deg', linspace(-30, 30, 31));
    expect(scan.points).toHaveLength(31);
    expect(scan.nFailed).toBe(0);
    const inRange = scan.points.filter(
      (p) => p.value >= -4 && p.value <= 4 && p.prediction,
    );
    for (let i = 1; i < inRange.length; i++) {
      expect(inRange[i]!.prediction!.C_l).toBeGreaterThan(
        inRange[i - 1]!.prediction!.C_l,
      );
    }
    // out-of-range alpha values are flagged by the service
    const extreme = scan.points.find((p) => p.value === 30);
    expect(extreme?.prediction?.out_of_range).toBe(true);
  });

  it('repeated scans are identical (deterministic backend)', async () => {
    const config = await client.getConfig();
    const state = new ExplorerState(config.bounds);
    const values = linspace(-5, 10, 16);
    const a = await runScan(client, state.design, 'alpha_deg', values);
    const b = await runScan(client, state.design, 'alpha_deg', values);
    expect(a.points).toEqual(b.points);
  });

  it('optimization panel shows a non-decreasing incumbent and adopts the result', async () => {
    const config = await client.getConfig();
    const state = new ExplorerState(config.bounds);
    const job = await submitAndPoll(client, {
      method: 'gradient',
      budget: 120,
      seed: 0,
    });
    const curve = incumbentCurve(job);
    expect(curve.length).toBeGreaterThan(1);
    expect(isNonDecreasing(curve)).toBe(true);

    state.adoptResult(job.result!.best_phi);
    const names = ['c_r', 'b', 'taper', 'sweep_deg', 'U_inf', 'alpha_deg'] as const;
    names.forEach((name, i) => {
      expect(state.design[name]).toBeCloseTo(job.result!.best_phi[i]!, 9);
    });
    const adopted = await client.predict(state.design as DesignVector);
    expect(adopted.lift_to_drag).toBeCloseTo(job.result!.best_value, 6);
  });
});
