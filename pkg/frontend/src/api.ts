/**
 * Service API client.
 *
 * Slider-driven calls are debounced (at most 10 requests/s) and carry a
 * sequence number so that a stale response can never overwrite a newer
 * one (last-write-wins).
 */

import type {
  DesignVector,
  Job,
  MeshPayload,
  ParetoPayload,
  Prediction,
  ServiceConfig,
} from './types';

export class ServiceError extends Error {
  constructor(
    message: string,
    readonly status: number,
    readonly field?: string,
  ) {
    super(message);
    this.name = 'ServiceError';
  }
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

async function parseError(res: Response): Promise<ServiceError> {
  let detail = res.statusText;
  let field: string | undefined;
  try {
    const body = await res.json();
    if (typeof body.detail === 'string') detail = body.detail;
    if (typeof body.field === 'string') field = body.field;
  } catch {
    /* non-JSON error body: keep the status text */
  }
  return new ServiceError(detail, res.status, field);
}

export interface SequencedResult<T> {
  seq: number;
  payload: T;
}

export class ApiClient {
  private seq = 0;
  private lastDelivered = 0;

  constructor(
    readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (...args) => fetch(...args),
    readonly minIntervalMs = 100,
  ) {}

  private pendingTimer: ReturnType<typeof setTimeout> | null = null;
  private pendingCancel: (() => void) | null = null;
  private lastSent = 0;

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const res = await this.fetchImpl(this.baseUrl + path, {
      headers: { 'Content-Type': 'application/json' },
      ...init,
    });
    if (!res.ok) throw await parseError(res);
    return (await res.json()) as T;
  }

  getConfig(): Promise<ServiceConfig> {
    return this.request<ServiceConfig>('/api/config');
  }

  getMesh(
    design: Pick<DesignVector, 'c_r' | 'b' | 'taper' | 'sweep_deg'>,
    allowOutOfRange = true,
  ): Promise<MeshPayload> {
    return this.request<MeshPayload>('/api/mesh', {
      method: 'POST',
      body: JSON.stringify({ design, allow_out_of_range: allowOutOfRange }),
    });
  }

  predict(design: DesignVector, backend = 'builtin-liftline'): Promise<Prediction> {
    const { c_r, b, taper, sweep_deg, U_inf, alpha_deg } = design;
    return this.request<Prediction>('/api/predict', {
      method: 'POST',
      body: JSON.stringify({
        design: { c_r, b, taper, sweep_deg },
        inflow: { U_inf, alpha_deg },
        backend,
        allow_out_of_range: true,
      }),
    });
  }

  /**
   * Debounced, sequence-numbered prediction for slider streams.  Resolves
   * to null when a newer request has already been delivered (the caller
   * simply drops the stale result).
   */
  predictDebounced(
    design: DesignVector,
    backend = 'builtin-liftline',
  ): Promise<SequencedResult<Prediction> | null> {
    const mySeq = ++this.seq;
    return new Promise((resolve, reject) => {
      // a newer slider event supersedes any call still waiting to fire:
      // cancel its timer and resolve it with null so callers never hang
      if (this.pendingTimer !== null) {
        clearTimeout(this.pendingTimer);
        this.pendingCancel?.();
      }
      this.pendingCancel = () => resolve(null);
      const fire = () => {
        this.pendingTimer = null;
        this.pendingCancel = null;
        this.lastSent = Date.now();
        if (mySeq !== this.seq) {
          resolve(null); // superseded while waiting
          return;
        }
        this.predict(design, backend)
          .then((payload) => {
            if (mySeq < this.lastDelivered) {
              resolve(null); // a newer response already arrived
              return;
            }
            this.lastDelivered = mySeq;
            resolve({ seq: mySeq, payload });
          })
          .catch(reject);
      };
      const wait = Math.max(0, this.lastSent + this.minIntervalMs - Date.now());
      this.pendingTimer = setTimeout(fire, wait);
    });
  }

  submitOptimization(req: {
    method: string;
    budget: number;
    seed: number;
    idempotency_key?: string;
  }): Promise<Job> {
    return this.request<Job>('/api/optimize', {
      method: 'POST',
      body: JSON.stringify(req),
    });
  }

  getJob(jobId: string): Promise<Job> {
    return this.request<Job>(`/api/optimize/${jobId}`);
  }

  getPareto(dataset: string, maxPoints = 5000): Promise<ParetoPayload> {
    const params = new URLSearchParams({
      dataset,
      max_points: String(maxPoints),
    });
    return this.request<ParetoPayload>(`/api/pareto?${params}`);
  }
}
