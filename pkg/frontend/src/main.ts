/**
 * Entry point: wires sliders, readouts, the 3D viewport, the Pareto
 * overlay, scans, and the optimization panel to the service API.
 */

import { ApiClient } from './api';
import { drawChart, type Series } from './charts';
import { incumbentCurve, submitAndPoll } from './jobs';
import { createWingViewport } from './render';
import { linspace, runScan, type ScanAxis } from './scan';
import { ExplorerState } from './state';
import {
  PARAM_NAMES,
  PARAM_UNITS,
  type ParamName,
  type Prediction,
} from './types';

const METHOD_COLORS: Record<string, string> = {
  gradient: '#34d399',
  evolutionary: '#fbbf24',
  bayesian: '#a78bfa',
};

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function fmt(value: number, digits = 4): string {
  return Number.isFinite(value) ? value.toFixed(digits) : '∞';
}

async function boot(): Promise<void> {
  const client = new ApiClient('');
  const config = await client.getConfig();
  const state = new ExplorerState(config.bounds);
  const viewport = createWingViewport(el<HTMLCanvasElement>('wing-canvas'));
  const paretoCanvas = el<HTMLCanvasElement>('pareto-canvas');
  const polarCanvas = el<HTMLCanvasElement>('polar-canvas');
  const jobCanvas = el<HTMLCanvasElement>('job-canvas');
  const errorBox = el<HTMLDivElement>('error-box');
  const jobTraces: Series[] = [];

  const showError = (message: string | null) => {
    state.lastError = message;
    errorBox.textContent = message ?? '';
    errorBox.style.display = message ? 'block' : 'none';
  };

  const updateReadouts = (p: Prediction) => {
    el('readout-cd').textContent = fmt(p.C_D);
    el('readout-cl').textContent = fmt(p.C_l);
    el('readout-eps').textContent = fmt(p.lift_to_drag, 2);
    el('readout-mach').textContent = fmt(p.mach, 3);
    el('readout-re').textContent = p.reynolds.toExponential(2);
  };

  const drawPareto = () => {
    const series: Series[] = [];
    const cached = state.paretoCache.get(config.datasets[0] ?? '');
    if (cached) {
      series.push({
        label: 'dataset',
        points: cached.scatter.map((p) => ({ x: p.C_D, y: p.C_l })),
        color: '#6b7280',
      });
      series.push({
        label: 'Pareto front',
        points: cached.front.map((p) => ({ x: p.C_D, y: p.C_l })),
        color: '#f87171',
        line: true,
      });
    }
    if (state.lastPrediction) {
      series.push({
        label: 'current design',
        points: [{ x: state.lastPrediction.C_D, y: state.lastPrediction.C_l }],
        color: '#60a5fa',
        flagged: state.lastPrediction.out_of_range ? [0] : [],
      });
    }
    for (const [i, pin] of state.pinned.entries()) {
      series.push({
        label: pin.label,
        points: [{ x: pin.prediction.C_D, y: pin.prediction.C_l }],
        color: ['#34d399', '#fbbf24', '#a78bfa', '#f472b6', '#22d3ee'][i] ?? '#fff',
      });
    }
    drawChart(paretoCanvas, series, 'C_D [-]', 'C_l [-]');
  };

  const refresh = async () => {
    try {
      const [meshRes, predRes] = await Promise.all([
        client.getMesh(state.design),
        client.predictDebounced(state.design, state.backend),
      ]);
      viewport.render(meshRes);
      if (predRes) {
        state.recordPrediction(predRes.payload);
        updateReadouts(predRes.payload);
        drawPareto();
      }
      showError(null);
    } catch (err) {
      // keep the last good readouts, show the failure inline
      showError(err instanceof Error ? err.message : String(err));
    }
  };

  // --- sliders ---------------------------------------------------------
  const sliderHost = el<HTMLDivElement>('sliders');
  const sliders = {} as Record<ParamName, HTMLInputElement>;
  for (const name of PARAM_NAMES) {
    const [lo, hi] = config.bounds[name];
    const row = document.createElement('div');
    row.className = 'slider-row';
    const unit = PARAM_UNITS[name] ? ` [${PARAM_UNITS[name]}]` : '';
    row.innerHTML = `
      <label>${name}${unit}</label>
      <input type="range" min="${lo}" max="${hi}" step="${(hi - lo) / 200}"
             value="${state.design[name]}" id="slider-${name}">
      <span id="value-${name}">${fmt(state.design[name], 3)}</span>
      <span id="flag-${name}" class="flag" style="display:none">out of range</span>`;
    sliderHost.appendChild(row);
    const input = el<HTMLInputElement>(`slider-${name}`);
    sliders[name] = input;
    input.addEventListener('input', () => {
      const { value, outOfRange } = state.setParam(name, Number(input.value));
      el(`value-${name}`).textContent = fmt(value, 3);
      el(`flag-${name}`).style.display = outOfRange ? 'inline' : 'none';
      void refresh();
    });
  }

  el<HTMLInputElement>('oor-toggle').addEventListener('change', (ev) => {
    state.setAllowOutOfRange((ev.target as HTMLInputElement).checked);
    for (const name of PARAM_NAMES) {
      sliders[name].value = String(state.design[name]);
      el(`flag-${name}`).style.display = state.flags[name] ? 'inline' : 'none';
    }
    void refresh();
  });

  el<HTMLButtonElement>('pin-button').addEventListener('click', () => {
    if (state.pin(`pin ${state.pinned.length + 1}`)) drawPareto();
  });

  // --- scans -----------------------------------------------------------
  el<HTMLButtonElement>('scan-button').addEventListener('click', () => {
    void (async () => {
      const axis = el<HTMLSelectElement>('scan-axis').value as ScanAxis;
      const values =
        axis === 'alpha_deg' ? linspace(-30, 30, 31) : linspace(0, 70, 8);
      const scan = await runScan(client, state.design, axis, values, state.backend);
      if (scan.warning) showError(scan.warning);
      const done = scan.points.filter((p) => p.prediction !== null);
      const flagged = done
        .map((p, i) => (p.prediction?.out_of_range ? i : -1))
        .filter((i) => i >= 0);
      drawChart(
        polarCanvas,
        [
          {
            label: 'C_l',
            points: done.map((p) => ({ x: p.value, y: p.prediction?.C_l ?? 0 })),
            color: '#60a5fa',
            line: true,
            flagged,
          },
          {
            label: 'C_D',
            points: done.map((p) => ({ x: p.value, y: p.prediction?.C_D ?? 0 })),
            color: '#f87171',
            line: true,
            flagged,
          },
        ],
        axis === 'alpha_deg' ? 'alpha [deg]' : 'sweep [deg]',
        'coefficient [-]',
      );
    })();
  });

  // --- optimization panel ---------------------------------------------
  el<HTMLButtonElement>('optimize-button').addEventListener('click', () => {
    void (async () => {
      const method = el<HTMLSelectElement>('optimize-method').value;
      const budget = Number(el<HTMLInputElement>('optimize-budget').value);
      try {
        const job = await submitAndPoll(
          client,
          { method, budget, seed: 0 },
          (j) => {
            el('job-status').textContent =
              `${method}: ${j.status} (${j.evaluations}/${j.budget})`;
          },
        );
        const curve = incumbentCurve(job);
        jobTraces.push({
          label: method,
          points: curve.map((p) => ({ x: p.evaluations, y: p.value })),
          color: METHOD_COLORS[method] ?? '#fff',
          line: true,
        });
        drawChart(jobCanvas, jobTraces, 'evaluations', 'lift-to-drag [-]');
        const adopt = el<HTMLButtonElement>('adopt-button');
        adopt.disabled = false;
        adopt.onclick = () => {
          if (!job.result) return;
          state.adoptResult(job.result.best_phi);
          for (const name of PARAM_NAMES) {
            sliders[name].value = String(state.design[name]);
            el(`value-${name}`).textContent = fmt(state.design[name], 3);
          }
          void refresh();
        };
      } catch (err) {
        showError(err instanceof Error ? err.message : String(err));
      }
    })();
  });

  // --- initial load ----------------------------------------------------
  const dataset = config.datasets[0];
  if (dataset) {
    try {
      state.paretoCache.set(dataset, await client.getPareto(dataset));
    } catch {
      /* dataset overlay is optional */
    }
  }
  await refresh();
}

boot().catch((err) => {
  const box = document.getElementById('error-box');
  if (box) {
    box.textContent = `failed to start: ${err}`;
    (box as HTMLElement).style.display = 'block';
  }
});
