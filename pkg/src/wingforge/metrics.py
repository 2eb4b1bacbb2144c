"""Evaluation metrics, Pareto-front extraction, and polar assembly."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np


class MetricError(ValueError):
    """Undefined metric (zero norm, constant ground truth, ...)."""


@dataclass(frozen=True)
class FieldPair:
    """Prediction and ground-truth arrays for one named field."""

    name: str
    prediction: np.ndarray
    ground_truth: np.ndarray

    def __post_init__(self):
        pred = np.asarray(self.prediction, dtype=np.float64)
        gt = np.asarray(self.ground_truth, dtype=np.float64)
        if pred.shape != gt.shape:
            raise MetricError(
                f"shape mismatch for {self.name}: {pred.shape} vs {gt.shape}")
        if not (np.isfinite(pred).all() and np.isfinite(gt).all()):
            raise MetricError(f"non-finite values in field {self.name}")
        object.__setattr__(self, "prediction", pred)
        object.__setattr__(self, "ground_truth", gt)


@dataclass(frozen=True)
class PolarPoint:
    """One case on a drag/lift polar."""

    id: str
    C_D: float
    C_l: float
    alpha_deg: float = math.nan
    sweep_deg: Optional[float] = None
    in_range: bool = True


def relative_l2(pair: FieldPair):
    """||pred - gt||_2 / ||gt||_2 with all components flattened."""
    diff = pair.prediction - pair.ground_truth
    gt_norm = np.linalg.norm(pair.ground_truth.ravel())
    if gt_norm == 0:
        raise MetricError(f"ground truth of {pair.name} has zero norm")
    return float(np.linalg.norm(diff.ravel()) / gt_norm)


def r_squared(pred, gt):
    """Coefficient of determination 1 - SS_res / SS_tot."""
    pred = np.asarray(pred, dtype=np.float64).ravel()
    gt = np.asarray(gt, dtype=np.float64).ravel()
    if len(gt) < 2 or pred.shape != gt.shape:
        raise MetricError("need at least two matching points")
    ss_tot = np.sum((gt - gt.mean()) ** 2)
    if ss_tot == 0:
        raise MetricError("R^2 undefined for constant ground truth")
    ss_res = np.sum((gt - pred) ** 2)
    return float(1.0 - ss_res / ss_tot)


def pareto_front(points):
    """Non-dominated subset under (minimize C_D, maximize C_l).

    Point p survives iff no q has C_D <= C_D(p) and C_l >= C_l(p) with at
    least one strict.  Coordinate duplicates keep the lowest id.  Output
    sorted by ascending C_D.
    """
    if not points:
        raise MetricError("need at least one point")
    # dedupe exact coordinate duplicates, lowest id wins
    best = {}
    for p in points:
        key = (p.C_D, p.C_l)
        if key not in best or p.id < best[key].id:
            best[key] = p
    pts = sorted(best.values(), key=lambda p: (p.C_D, -p.C_l, p.id))
    front = []
    best_cl = -math.inf
    for p in pts:
        if p.C_l > best_cl:
            front.append(p)
            best_cl = p.C_l
    return front


def pareto_front_bruteforce(points):
    """O(n^2) dominance filter; the independent check for pareto_front."""
    best = {}
    for p in points:
        key = (p.C_D, p.C_l)
        if key not in best or p.id < best[key].id:
            best[key] = p
    pts = list(best.values())
    out = []
    for p in pts:
        dominated = any(
            q.C_D <= p.C_D and q.C_l >= p.C_l
            and (q.C_D < p.C_D or q.C_l > p.C_l)
            for q in pts
        )
        if not dominated:
            out.append(p)
    return sorted(out, key=lambda p: p.C_D)


def best_lift_to_drag(front):
    """Tangent point of the drag-lift front: max C_l/C_D over front points."""
    return max(front, key=lambda p: p.C_l / p.C_D if p.C_D != 0 else math.inf)


def aggregate(records):
    """Mean and sample std of per-case metric values across seeds.

    `records` is an iterable of dicts with keys model, test_set, field,
    seed, value (one value per case).  Values are averaged over cases
    within each seed first; mean/std (ddof=1, std 0.0 for a single seed)
    are then taken across seeds.  Rows ordered by (test_set, model, field).
    """
    groups = {}
    for r in records:
        key = (r["test_set"], r["model"], r["field"])
        groups.setdefault(key, {}).setdefault(r["seed"], []).append(r["value"])
    rows = []
    for (test_set, model, fname) in sorted(groups):
        per_seed = [float(np.mean(v)) for _, v in sorted(groups[(test_set, model, fname)].items())]
        mean = float(np.mean(per_seed))
        std = float(np.std(per_seed, ddof=1)) if len(per_seed) > 1 else 0.0
        rows.append({
            "test_set": test_set, "model": model, "field": fname,
            "mean": mean, "std": std, "n_seeds": len(per_seed),
        })
    return rows


def assemble_polars(points):
    """Group polar points by sweep angle into alpha-sorted series.

    Returns {sweep_deg: [PolarPoint, ...]} with each series sorted by
    (alpha, id); duplicate alphas are kept.  Points without a sweep value
    are grouped under None.
    """
    groups = {}
    for p in points:
        groups.setdefault(p.sweep_deg, []).append(p)
    return {
        sweep: sorted(series, key=lambda p: (p.alpha_deg, p.id))
        for sweep, series in sorted(groups.items(),
                                    key=lambda kv: (kv[0] is None, kv[0]))
        if series
    }
