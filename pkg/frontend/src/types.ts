/** Shared domain types mirroring the service API. */

export const PARAM_NAMES = [
  'c_r',
  'b',
  'taper',
  'sweep_deg',
  'U_inf',
  'alpha_deg',
] as const;

export type ParamName = (typeof PARAM_NAMES)[number];

/** Units for display, keyed by parameter. */
export const PARAM_UNITS: Record<ParamName, string> = {
  c_r: 'm',
  b: 'm',
  taper: '',
  sweep_deg: 'deg',
  U_inf: 'm/s',
  alpha_deg: 'deg',
};

export type DesignVector = Record<ParamName, number>;

export type Bounds = Record<ParamName, [number, number]>;

export interface ServiceConfig {
  bounds: Bounds;
  datasets: string[];
  backends: string[];
  default_resolution: { n_chord: number; n_span: number };
}

export interface Prediction {
  C_D: number;
  C_l: number;
  lift_to_drag: number;
  mach: number;
  reynolds: number;
  out_of_range: boolean;
  backend_version: string;
}

export interface MeshPayload {
  vertices: number[];
  triangles: number[];
  n_vertices: number;
  n_triangles: number;
  out_of_range: boolean;
}

export interface ParetoPoint {
  id: string;
  C_D: number;
  C_l: number;
  alpha_deg: number | null;
  sweep_deg: number | null;
}

export interface ParetoPayload {
  front: ParetoPoint[];
  scatter: ParetoPoint[];
  n_total: number;
}

export interface Job {
  id: string;
  status: 'queued' | 'running' | 'done' | 'failed';
  progress: number;
  evaluations: number;
  budget: number;
  result: {
    best_phi: number[];
    best_value: number;
    trace: { evaluations: number; phi: number[]; value: number }[];
  } | null;
  error: string | null;
}

export interface ScanPoint {
  value: number;
  prediction: Prediction | null;
  error: string | null;
}
