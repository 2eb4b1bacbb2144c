/**
 * Optimization job panel logic: submit, poll until terminal, and expose
 * the incumbent curve (best value vs evaluations) for plotting.
 */

import type { ApiClient } from './api';
import type { Job } from './types';

export interface IncumbentPoint {
  evaluations: number;
  value: number;
}

export async function submitAndPoll(
  client: ApiClient,
  req: { method: string; budget: number; seed: number },
  onUpdate?: (job: Job) => void,
  intervalMs = 250,
): Promise<Job> {
  let job = await client.submitOptimization(req);
  onUpdate?.(job);
  while (job.status === 'queued' || job.status === 'running') {
    await new Promise((r) => setTimeout(r, intervalMs));
    job = await client.getJob(job.id);
    onUpdate?.(job);
  }
  if (job.status === 'failed') {
    throw new Error(job.error ?? 'optimization failed');
  }
  return job;
}

/** Incumbent curve from a finished job's trace (already non-decreasing). */
export function incumbentCurve(job: Job): IncumbentPoint[] {
  if (!job.result) return [];
  return job.result.trace.map((t) => ({
    evaluations: t.evaluations,
    value: t.value,
  }));
}

export function isNonDecreasing(curve: IncumbentPoint[]): boolean {
  for (let i = 1; i < curve.length; i++) {
    const prev = curve[i - 1];
    const cur = curve[i];
    if (prev && cur && cur.value < prev.value) return false;
  }
  return true;
}
