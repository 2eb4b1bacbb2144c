"""Lift-to-drag maximization over the 6-parameter design box.

Three methods share one objective contract: gradient ascent with Adam,
a (mu/mu_w, lambda) CMA-ES, and Gaussian-process Bayesian optimization
with expected improvement.  All of them work in min-max-normalized
[0, 1]^6 coordinates, respect the box after every step, and are
deterministic for a fixed seed.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field as dc_field
from typing import Callable, Optional

import numpy as np
from scipy.optimize import minimize
from scipy.stats import norm as norm_dist

from .aero import Atmosphere, InflowConditions
from .doe import ParameterSpace, nearest_neighbor
from .geometry import WingDesign

DIM = 6


class OptimizeError(ValueError):
    """Invalid optimizer configuration or objective failure."""


@dataclass
class OptimizerConfig:
    method: str = "gradient"
    budget: int = 1000  # max surrogate evaluations
    seed: int = 0
    wall_clock_s: Optional[float] = None
    step_size: float = 0.01  # Adam learning rate (normalized coords)
    sigma0: float = 0.3  # CMA-ES initial step
    pop_size: Optional[int] = None  # CMA-ES lambda, default 4 + floor(3 ln n)
    n_initial: int = 12  # Bayesian initial design (center + random)
    fd_step: float = 1e-4  # relative finite-difference step

    def __post_init__(self):
        if self.method not in ("gradient", "evolutionary", "bayesian"):
            raise OptimizeError(f"unknown method {self.method!r}")
        if self.budget <= 0:
            raise OptimizeError("budget must be positive")


@dataclass
class OptimizationResult:
    method: str
    seed: int
    budget: int
    best_phi: np.ndarray
    best_value: float
    coefficients: dict
    trace: list  # (evaluations_used, phi, value) at each incumbent update
    evaluations: int
    terminated_by: str
    notes: list = dc_field(default_factory=list)

    def to_dict(self):
        return {
            "method": self.method,
            "seed": self.seed,
            "budget": self.budget,
            "best_phi": [float(v) for v in self.best_phi],
            "best_value": self.best_value,
            "coefficients": self.coefficients,
            "trace": [
                {"evaluations": int(e), "phi": [float(v) for v in p],
                 "value": float(val)}
                for e, p, val in self.trace
            ],
            "evaluations": self.evaluations,
            "terminated_by": self.terminated_by,
            "notes": self.notes,
        }


class Objective:
    """Counts surrogate calls and tracks the incumbent in normalized coords."""

    def __init__(self, backend, space: ParameterSpace, atm: Atmosphere = Atmosphere()):
        self.backend = backend
        self.space = space
        self.atm = atm
        self.evaluations = 0
        self.best_z = None
        self.best_value = -math.inf
        self.trace = []

    def phi(self, z):
        return self.space.denormalize(np.clip(z, 0.0, 1.0))

    def _predict(self, z):
        p = self.phi(z)
        design = WingDesign(p[0], p[1], p[2], p[3])
        inflow = InflowConditions(p[4], p[5])
        return self.backend.predict(design, inflow, self.atm)

    def __call__(self, z):
        pred = self._predict(z)
        self.evaluations += 1
        value = pred.coefficients.lift_to_drag
        if value > self.best_value:
            self.best_value = value
            self.best_z = np.clip(np.asarray(z, dtype=float).copy(), 0.0, 1.0)
            self.trace.append((self.evaluations, self.phi(z), value))
        return value

    def gradient(self, z):
        """d(lift_to_drag)/dz in normalized coordinates.  Uses the
        backend's analytic gradient when available, else central finite
        differences (one-sided at active bounds)."""
        p = self.phi(z)
        b = self.space.bounds
        scale = b[:, 1] - b[:, 0]
        if hasattr(self.backend, "gradient"):
            design = WingDesign(p[0], p[1], p[2], p[3])
            inflow = InflowConditions(p[4], p[5])
            g = self.backend.gradient(design, inflow, self.atm)
            self.evaluations += 1
            return np.asarray(g["lift_to_drag"]) * scale
        return self.finite_diff_gradient(z)

    def finite_diff_gradient(self, z, h_rel=1e-4):
        z = np.clip(np.asarray(z, dtype=float), 0.0, 1.0)
        g = np.zeros(DIM)
        for k in range(DIM):
            h = h_rel
            zp, zm = z.copy(), z.copy()
            if z[k] + h <= 1.0 and z[k] - h >= 0.0:
                zp[k] += h
                zm[k] -= h
                g[k] = (self(zp) - self(zm)) / (2 * h)
            elif z[k] + h > 1.0:
                zm[k] -= h
                g[k] = (self(z) - self(zm)) / h
            else:
                zp[k] += h
                g[k] = (self(zp) - self(z)) / h
        return g


def finite_diff_gradient(f: Callable, z, h_rel=1e-4, lo=0.0, hi=1.0):
    """Standalone central-difference gradient on a box (one-sided at faces)."""
    z = np.asarray(z, dtype=float)
    n = len(z)
    g = np.zeros(n)
    for k in range(n):
        h = h_rel
        zp, zm = z.copy(), z.copy()
        if z[k] + h <= hi and z[k] - h >= lo:
            zp[k] += h
            zm[k] -= h
            g[k] = (f(zp) - f(zm)) / (2 * h)
        elif z[k] + h > hi:
            zm[k] -= h
            g[k] = (f(z) - f(zm)) / h
        else:
            zp[k] += h
            g[k] = (f(zp) - f(z)) / h
    return g


def _finish(obj: Objective, config, terminated_by, notes=None):
    best_phi = obj.phi(obj.best_z)
    design = WingDesign(best_phi[0], best_phi[1], best_phi[2], best_phi[3])
    inflow = InflowConditions(best_phi[4], best_phi[5])
    pred = obj.backend.predict(design, inflow, obj.atm)
    coeffs = {
        "C_D": pred.coefficients.C_D,
        "C_l": pred.coefficients.C_l,
        "lift_to_drag": pred.coefficients.lift_to_drag,
        "mach": pred.mach,
        "reynolds": pred.reynolds,
    }
    return OptimizationResult(
        method=config.method, seed=config.seed, budget=config.budget,
        best_phi=best_phi, best_value=obj.best_value, coefficients=coeffs,
        trace=obj.trace, evaluations=obj.evaluations,
        terminated_by=terminated_by, notes=notes or [],
    )


def optimize_gradient(obj: Objective, config: OptimizerConfig):
    """Adam ascent on normalized coordinates with box projection.

    Init at the box center; stops at the evaluation budget or after the
    normalized step stays below 1e-6 (inf-norm) for 20 consecutive steps.
    """
    beta1, beta2, eps_a = 0.9, 0.999, 1e-8
    z = np.full(DIM, 0.5)
    m = np.zeros(DIM)
    v = np.zeros(DIM)
    small_steps = 0
    t = 0
    t_start = time.monotonic()
    terminated = "budget"
    # one value evaluation plus the gradient cost per step
    step_cost = 2 if hasattr(obj.backend, "gradient") else 1 + 2 * DIM
    while True:
        if obj.evaluations + step_cost > config.budget:
            break
        if config.wall_clock_s and time.monotonic() - t_start > config.wall_clock_s:
            break
        obj(z)
        g = obj.gradient(z)
        t += 1
        m = beta1 * m + (1 - beta1) * g
        v = beta2 * v + (1 - beta2) * g * g
        m_hat = m / (1 - beta1**t)
        v_hat = v / (1 - beta2**t)
        z_new = np.clip(z + config.step_size * m_hat / (np.sqrt(v_hat) + eps_a),
                        0.0, 1.0)
        if np.max(np.abs(z_new - z)) < 1e-6:
            small_steps += 1
            if small_steps >= 20:
                z = z_new
                terminated = "convergence"
                break
        else:
            small_steps = 0
        z = z_new
    if obj.best_z is None or obj.evaluations < config.budget:
        obj(z)
    return _finish(obj, config, terminated)


def optimize_cmaes(obj: Objective, config: OptimizerConfig):
    """(mu/mu_w, lambda) CMA-ES with cumulative step-size adaptation and
    rank-one + rank-mu covariance updates, in normalized coordinates.

    Out-of-box candidates are resampled up to 100 times, then clipped.
    """
    n = DIM
    rng = np.random.default_rng(config.seed)
    lam = config.pop_size or (4 + int(3 * math.log(n)))
    mu = lam // 2
    w = np.log(mu + 0.5) - np.log(np.arange(1, mu + 1))
    w /= w.sum()
    mu_eff = 1.0 / np.sum(w**2)

    c_sigma = (mu_eff + 2) / (n + mu_eff + 5)
    d_sigma = 1 + 2 * max(0.0, math.sqrt((mu_eff - 1) / (n + 1)) - 1) + c_sigma
    c_c = (4 + mu_eff / n) / (n + 4 + 2 * mu_eff / n)
    c_1 = 2 / ((n + 1.3) ** 2 + mu_eff)
    c_mu = min(1 - c_1, 2 * (mu_eff - 2 + 1 / mu_eff) / ((n + 2) ** 2 + mu_eff))
    chi_n = math.sqrt(n) * (1 - 1 / (4 * n) + 1 / (21 * n * n))

    mean = np.full(n, 0.5)
    sigma = config.sigma0
    cov = np.eye(n)
    p_sigma = np.zeros(n)
    p_c = np.zeros(n)
    gen = 0
    t_start = time.monotonic()
    while obj.evaluations + lam <= config.budget:
        if config.wall_clock_s and time.monotonic() - t_start > config.wall_clock_s:
            break
        gen += 1
        evals, values = np.linalg.eigh(cov)
        evals = np.maximum(evals, 1e-20)
        sqrt_c = values @ np.diag(np.sqrt(evals)) @ values.T
        inv_sqrt_c = values @ np.diag(1 / np.sqrt(evals)) @ values.T

        zs = np.empty((lam, n))
        xs = np.empty((lam, n))
        for i in range(lam):
            for _ in range(100):
                zi = rng.standard_normal(n)
                xi = mean + sigma * (sqrt_c @ zi)
                if np.all((xi >= 0) & (xi <= 1)):
                    break
            else:
                xi = np.clip(xi, 0.0, 1.0)
                zi = inv_sqrt_c @ (xi - mean) / sigma
            zs[i] = zi
            xs[i] = xi
        fitness = np.array([obj(x) for x in xs])
        order = np.argsort(-fitness)[:mu]
        z_mean = w @ zs[order]
        mean = np.clip(mean + sigma * (sqrt_c @ z_mean), 0.0, 1.0)

        p_sigma = (1 - c_sigma) * p_sigma + \
            math.sqrt(c_sigma * (2 - c_sigma) * mu_eff) * z_mean
        sigma *= math.exp((c_sigma / d_sigma)
                          * (np.linalg.norm(p_sigma) / chi_n - 1))
        h_sigma = (np.linalg.norm(p_sigma)
                   / math.sqrt(1 - (1 - c_sigma) ** (2 * gen))
                   < (1.4 + 2 / (n + 1)) * chi_n)
        y_mean = sqrt_c @ z_mean
        p_c = (1 - c_c) * p_c + \
            (math.sqrt(c_c * (2 - c_c) * mu_eff) * y_mean if h_sigma else 0.0)
        ys = (sqrt_c @ zs[order].T).T
        rank_mu = sum(wi * np.outer(yi, yi) for wi, yi in zip(w, ys))
        cov = ((1 - c_1 - c_mu) * cov
               + c_1 * (np.outer(p_c, p_c)
                        + (0.0 if h_sigma else c_c * (2 - c_c)) * cov)
               + c_mu * rank_mu)
        cov = (cov + cov.T) / 2
    if obj.best_z is None:
        obj(np.full(n, 0.5))
    return _finish(obj, config, "budget")


def _expected_improvement(mu, sd, f_best):
    """EI for maximization; zero where predictive sd vanishes."""
    ei = np.zeros_like(mu)
    ok = sd > 1e-12
    u = (mu[ok] - f_best) / sd[ok]
    ei[ok] = (mu[ok] - f_best) * norm_dist.cdf(u) + sd[ok] * norm_dist.pdf(u)
    return ei


def optimize_bayes(obj: Objective, config: OptimizerConfig):
    """GP (Matern-5/2, constant mean, noise 1e-6) + expected improvement.

    Initial design: box center plus n_initial - 1 seeded uniform points.
    Acquisition maximized over 4096 random candidates with local polish
    of the best 8.
    """
    from sklearn.gaussian_process import GaussianProcessRegressor
    from sklearn.gaussian_process.kernels import ConstantKernel, Matern

    rng = np.random.default_rng(config.seed)
    n_init = min(config.n_initial, config.budget)
    X = [np.full(DIM, 0.5)]
    X.extend(rng.random(DIM) for _ in range(n_init - 1))
    y = [obj(x) for x in X]
    X = list(map(np.asarray, X))
    notes = []

    kernel = ConstantKernel(1.0, (1e-3, 1e3)) * Matern(
        length_scale=np.ones(DIM), length_scale_bounds=(1e-2, 1e2), nu=2.5)
    prev_kernel = kernel
    t_start = time.monotonic()
    while obj.evaluations < config.budget:
        if config.wall_clock_s and time.monotonic() - t_start > config.wall_clock_s:
            break
        gp = GaussianProcessRegressor(
            kernel=kernel, alpha=1e-6, normalize_y=True,
            n_restarts_optimizer=3, random_state=config.seed)
        try:
            with np.errstate(all="ignore"):
                gp.fit(np.array(X), np.array(y))
            prev_kernel = gp.kernel_
        except Exception as exc:  # singular fit: reuse last hyperparameters
            notes.append(f"gp fit failed at eval {obj.evaluations}: {exc}")
            gp = GaussianProcessRegressor(
                kernel=prev_kernel, alpha=1e-6, normalize_y=True,
                optimizer=None, random_state=config.seed)
            gp.fit(np.array(X), np.array(y))

        f_best = max(y)
        cand = rng.random((4096, DIM))
        mu, sd = gp.predict(cand, return_std=True)
        ei = _expected_improvement(mu, sd, f_best)
        top = np.argsort(-ei)[:8]

        def neg_ei(x):
            m, s = gp.predict(x.reshape(1, -1), return_std=True)
            return -_expected_improvement(m, s, f_best)[0]

        best_x, best_ei = cand[top[0]], ei[top[0]]
        for i in top:
            res = minimize(neg_ei, cand[i], method="L-BFGS-B",
                           bounds=[(0, 1)] * DIM)
            if -res.fun > best_ei:
                best_ei, best_x = -res.fun, np.clip(res.x, 0.0, 1.0)
        X.append(best_x)
        y.append(obj(best_x))
    return _finish(obj, config, "budget", notes)


def run_optimization(backend, space: ParameterSpace, config: OptimizerConfig,
                     atm: Atmosphere = Atmosphere()):
    obj = Objective(backend, space, atm)
    if config.method == "gradient":
        return optimize_gradient(obj, config)
    if config.method == "evolutionary":
        return optimize_cmaes(obj, config)
    return optimize_bayes(obj, config)


def random_search(backend, space: ParameterSpace, n, seed,
                  atm: Atmosphere = Atmosphere()):
    """Seeded uniform random search; the reference oracle for the three
    optimizers."""
    obj = Objective(backend, space, atm)
    rng = np.random.default_rng(seed)
    for z in rng.random((n, DIM)):
        obj(z)
    return obj.best_value, obj.phi(obj.best_z)


def validate_against_dataset(result: OptimizationResult, cases, coefficients,
                             space: ParameterSpace):
    """Nearest dataset neighbor of the optimum and the dataset-wide best.

    `coefficients` maps case id -> (C_D, C_l).  Returns a comparison
    record with the neighbor's coefficients and lift-to-drag ratio.
    """
    if not cases:
        raise OptimizeError("dataset is empty")

    def eps_of(cid):
        cd, cl = coefficients[cid]
        return cl / cd if cd != 0 else math.inf

    nn, dist = nearest_neighbor(result.best_phi, cases, space)
    best_case = max(cases, key=lambda c: eps_of(c.id))
    nn_cd, nn_cl = coefficients[nn.id]
    best_cd, best_cl = coefficients[best_case.id]
    return {
        "optimum_phi": [float(v) for v in result.best_phi],
        "optimum_lift_to_drag": result.best_value,
        "nearest_neighbor": nn.to_dict(),
        "nearest_neighbor_distance": dist,
        "nearest_neighbor_coefficients": {
            "C_D": nn_cd, "C_l": nn_cl, "lift_to_drag": eps_of(nn.id)},
        "dataset_best": best_case.to_dict(),
        "dataset_best_coefficients": {
            "C_D": best_cd, "C_l": best_cl, "lift_to_drag": eps_of(best_case.id)},
        "delta_lift_to_drag": result.best_value - eps_of(nn.id),
    }
