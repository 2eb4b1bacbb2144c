"""Design of experiments: uniform sampling of the 6-parameter space,
convex-hull-peeling dataset splits, parameter-scan grids, and
nearest-neighbor queries.

Hull vertices are detected exactly by per-point linear programming: a
point is extreme iff it is not a convex combination of the other points.
The implementation solves small separation LPs against a growing support
set (output-sensitive), which is equivalent to the naive per-point
feasibility LP but far cheaper; an approximate mode restricts testing to
the points farthest from the centroid for very large clouds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import linprog

from .aero import InflowConditions
from .geometry import WingDesign

PARAM_NAMES = ("c_r", "b", "taper", "sweep_deg", "U_inf", "alpha_deg")
SPLIT_LABELS = ("train", "val", "test_id_random", "test_interpolation", "test_ood")

_LP_TOL = 1e-9


class DoeError(ValueError):
    """Invalid sampling or split configuration."""


@dataclass(frozen=True)
class ParameterSpace:
    """Closed intervals for the six design/inflow parameters.

    Defaults follow the dataset sampling ranges; the angle-of-attack
    interval is an assumption (no trusted published value) and should be
    overridden when known.
    """

    c_r: tuple = (0.7, 1.2)  # m
    b: tuple = (1.0, 1.5)  # m
    taper: tuple = (0.4, 0.7)
    sweep_deg: tuple = (0.0, 40.0)
    U_inf: tuple = (150.0, 300.0)  # m/s
    alpha_deg: tuple = (-10.0, 10.0)  # assumed, see docstring

    def __post_init__(self):
        for name in PARAM_NAMES:
            lo, hi = getattr(self, name)
            if not (lo <= hi):
                raise DoeError(f"interval for {name} has lo > hi: ({lo}, {hi})")

    @property
    def bounds(self):
        return np.array([getattr(self, n) for n in PARAM_NAMES], dtype=np.float64)

    def normalize(self, raw):
        """Min-max map raw parameter vectors into [0, 1]^6 (degenerate
        axes map to 0)."""
        raw = np.atleast_2d(np.asarray(raw, dtype=np.float64))
        b = self.bounds
        span = b[:, 1] - b[:, 0]
        span = np.where(span == 0, 1.0, span)
        return (raw - b[:, 0]) / span

    def denormalize(self, z):
        z = np.asarray(z, dtype=np.float64)
        b = self.bounds
        return b[:, 0] + z * (b[:, 1] - b[:, 0])

    def to_dict(self):
        return {n: list(getattr(self, n)) for n in PARAM_NAMES}

    @classmethod
    def from_dict(cls, d):
        return cls(**{n: tuple(d[n]) for n in PARAM_NAMES})


@dataclass(frozen=True)
class CaseSpec:
    """One simulation case: stable id, geometry, inflow."""

    id: str
    design: WingDesign
    inflow: InflowConditions

    def as_vector(self):
        return np.array([
            self.design.c_r, self.design.b, self.design.taper,
            self.design.sweep_deg, self.inflow.U_inf, self.inflow.alpha_deg,
        ])

    def to_dict(self):
        return {
            "id": self.id,
            "c_r": self.design.c_r, "b": self.design.b,
            "taper": self.design.taper, "sweep_deg": self.design.sweep_deg,
            "U_inf": self.inflow.U_inf, "alpha_deg": self.inflow.alpha_deg,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            id=d["id"],
            design=WingDesign(d["c_r"], d["b"], d["taper"], d["sweep_deg"]),
            inflow=InflowConditions(d["U_inf"], d["alpha_deg"]),
        )


@dataclass
class SplitAssignment:
    """Partition of case ids over the five split labels."""

    assignments: dict  # id -> label
    seed: int
    counts: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.counts:
            self.counts = {label: 0 for label in SPLIT_LABELS}
            for label in self.assignments.values():
                self.counts[label] += 1

    def ids(self, label):
        return sorted(i for i, l in self.assignments.items() if l == label)

    def to_dict(self, space: Optional[ParameterSpace] = None):
        out = {
            "version": 1,
            "seed": self.seed,
            "counts": self.counts,
            "assignments": [{"id": i, "split": l}
                            for i, l in sorted(self.assignments.items())],
        }
        if space is not None:
            out["space"] = space.to_dict()
        return out


def sample_uniform(space: ParameterSpace, n, seed):
    """n cases with each coordinate i.i.d. uniform in its interval."""
    if n < 1:
        raise DoeError("need at least one sample")
    rng = np.random.default_rng(seed)
    b = space.bounds
    raw = rng.uniform(b[:, 0], b[:, 1], size=(n, 6))
    width = len(str(n - 1))
    return [
        CaseSpec(
            id=f"doe-s{seed}-{i:0{width}d}",
            design=WingDesign(*row[:4]),
            inflow=InflowConditions(row[4], row[5]),
        )
        for i, row in enumerate(raw)
    ]


def scan_grid(design_fixed, U_inf_fixed, alpha_values, sweep_values,
              id_prefix="scan"):
    """Cartesian sweep-by-alpha grid (sweep outer, alpha inner) for a
    fixed (c_r, b, taper) geometry and fixed speed."""
    if not alpha_values or not sweep_values:
        raise DoeError("alpha and sweep value lists must be non-empty")
    c_r, b, taper = design_fixed
    cases = []
    for sweep in sweep_values:
        for alpha in alpha_values:
            cases.append(CaseSpec(
                id=f"{id_prefix}-L{sweep:g}-a{alpha:g}",
                design=WingDesign(c_r, b, taper, sweep),
                inflow=InflowConditions(U_inf_fixed, alpha),
            ))
    return cases


def _separation_lp(x, support):
    """Max over (d, t) of d.x - t s.t. d.s - t <= 0 for s in support,
    |d|_inf <= 1.  Positive optimum => x lies outside conv(support)."""
    dim = len(x)
    # variables: d (dim), t (1); maximize d.x - t
    c = -np.concatenate([x, [-1.0]])
    a_ub = np.hstack([support, -np.ones((len(support), 1))])
    b_ub = np.zeros(len(support))
    bounds = [(-1, 1)] * dim + [(None, None)]
    res = linprog(c, A_ub=a_ub, b_ub=b_ub, bounds=bounds, method="highs")
    if res.status != 0:
        raise DoeError(f"separation LP failed: {res.message}")
    return -res.fun, res.x[:dim]


def extreme_points(points, candidates=None, rng=None):
    """Indices of convex-hull vertices of a point cloud.

    A point is extreme iff it is not a convex combination of the other
    points.  `candidates` optionally restricts which points are tested
    (untested points are reported non-extreme); separation directions are
    still certified against the full cloud.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or len(pts) == 0:
        raise DoeError("points must be a non-empty (n, d) array")
    n = len(pts)
    if n == 1:
        return [0]
    if np.allclose(pts, pts[0], atol=1e-15):
        # degenerate cloud: no point is distinguishable, report all extreme
        return list(range(n))
    # a duplicated point equals a convex combination of its twin, so it is
    # never extreme; run the search on unique rows only
    uniq, first_idx, counts = np.unique(
        pts, axis=0, return_index=True, return_counts=True)
    if len(uniq) < n:
        singles = first_idx[counts == 1]
        cand = None
        if candidates is not None:
            cand_set = set(map(tuple, pts[np.asarray(list(candidates))]))
            cand = [k for k, row in enumerate(uniq) if tuple(row) in cand_set]
        sub = extreme_points(uniq, candidates=cand, rng=rng)
        keep = set(map(int, singles))
        return sorted(int(first_idx[k]) for k in sub
                      if int(first_idx[k]) in keep)
    if rng is None:
        rng = np.random.default_rng(0)
    scale = max(1.0, np.abs(pts).max())
    tol = _LP_TOL * scale
    # generic tie-break direction for argmax over a face
    generic = rng.standard_normal(pts.shape[1]) * 1e-9

    def sharpen(d):
        """Vertex of the cloud maximizing direction d (generic tie-break)."""
        vals = pts @ d
        m = vals.max()
        ties = np.nonzero(vals >= m - tol)[0]
        if len(ties) == 1:
            return int(ties[0])
        sub = pts[ties] @ (d + generic)
        return int(ties[np.argmax(sub)])

    # seed support with coordinate extremes (always hull vertices under
    # the generic tie-break)
    support = set()
    for k in range(pts.shape[1]):
        e = np.zeros(pts.shape[1])
        e[k] = 1.0
        support.add(sharpen(e))
        support.add(sharpen(-e))

    if candidates is None:
        candidates = range(n)

    for i in candidates:
        while True:
            if i in support:
                break
            sup_idx = sorted(support)
            gap, d = _separation_lp(pts[i], pts[sup_idx])
            if gap <= tol:
                break  # inside conv(support) => non-extreme
            j = sharpen(d)
            if j == i:
                support.add(i)
                break
            if j in support:
                # numerical stall: certify i directly against everything else
                others = np.delete(np.arange(n), i)
                gap_full, _ = _separation_lp(pts[i], pts[others])
                if gap_full > tol:
                    support.add(i)
                break
            support.add(j)
    # drop support members that were never candidates but are extreme anyway:
    # they are legitimately extreme, keep them only if they pass the test
    return sorted(support)


def _is_extreme_bruteforce(pts, i, tol=_LP_TOL):
    """Direct feasibility LP: can point i be written as a convex
    combination of the others?  Used as the independent oracle."""
    n, d = pts.shape
    others = np.delete(np.arange(n), i)
    a_eq = np.vstack([pts[others].T, np.ones(len(others))])
    b_eq = np.concatenate([pts[i], [1.0]])
    res = linprog(np.zeros(len(others)), A_eq=a_eq, b_eq=b_eq,
                  bounds=[(0, None)] * len(others), method="highs")
    return res.status != 0  # infeasible => extreme


def extreme_points_bruteforce(points):
    pts = np.asarray(points, dtype=np.float64)
    if len(pts) > 1 and np.allclose(pts, pts[0], atol=1e-15):
        return list(range(len(pts)))
    return [i for i in range(len(pts)) if _is_extreme_bruteforce(pts, i)]


def peel_split(cases, n_ood, n_interp, n_id_random, n_val, seed,
               approximate=None, approx_k=4096):
    """Partition cases into train/val/ID-random/interpolation/OOD.

    Parameters are min-max normalized; OOD collects successive hull-peel
    layers from the outside (last layer truncated by descending distance
    from the normalized centroid), peeling then continues until n_interp
    innermost points remain (padded from the last removed layer by
    ascending centroid distance if the peel overshoots).  Validation and
    ID-random sets are seeded uniform draws from the remainder.
    """
    n = len(cases)
    if n_ood + n_interp + n_id_random + n_val >= n:
        raise DoeError("split counts must sum to less than the number of cases")
    if approximate is None:
        approximate = n > 10000

    raw = np.array([c.as_vector() for c in cases])
    lo, hi = raw.min(axis=0), raw.max(axis=0)
    span = np.where(hi > lo, hi - lo, 1.0)
    norm = (raw - lo) / span
    centroid = norm.mean(axis=0)
    dist = np.linalg.norm(norm - centroid, axis=1)

    rng = np.random.default_rng(seed)
    remaining = np.arange(n)
    ood = []
    last_layer = []

    # phase 1: collect OOD from outer peel layers
    while len(ood) < n_ood:
        layer = _peel_layer(norm, remaining, approximate, approx_k, rng)
        need = n_ood - len(ood)
        if len(layer) > need:
            order = sorted(layer, key=lambda i: (-dist[i], cases[i].id))
            ood.extend(order[:need])
            remaining = remaining[~np.isin(remaining, order[:need])]
        else:
            ood.extend(layer)
            remaining = remaining[~np.isin(remaining, layer)]

    # phase 2: keep peeling until only n_interp innermost remain
    while len(remaining) > n_interp:
        layer = _peel_layer(norm, remaining, approximate, approx_k, rng)
        if len(remaining) - len(layer) < n_interp:
            last_layer = layer
            keep = len(layer) - (len(remaining) - n_interp)
            # put back the `keep` layer points closest to the centroid
            order = sorted(last_layer, key=lambda i: (dist[i], cases[i].id))
            removed = order[keep:]
            remaining = remaining[~np.isin(remaining, removed)]
            break
        remaining = remaining[~np.isin(remaining, layer)]
    interp = list(remaining)

    # phase 3: random val / id-random from what's left
    used = set(ood) | set(interp)
    rest = np.array([i for i in range(n) if i not in used])
    pick = rng.permutation(len(rest))
    id_random = rest[pick[:n_id_random]]
    val = rest[pick[n_id_random:n_id_random + n_val]]

    assignments = {cases[i].id: "train" for i in range(n)}
    for i in ood:
        assignments[cases[i].id] = "test_ood"
    for i in interp:
        assignments[cases[i].id] = "test_interpolation"
    for i in id_random:
        assignments[cases[i].id] = "test_id_random"
    for i in val:
        assignments[cases[i].id] = "val"
    return SplitAssignment(assignments=assignments, seed=seed)


def _peel_layer(norm, remaining, approximate, approx_k, rng):
    """Hull-vertex indices (into the full array) of the remaining subset."""
    sub = norm[remaining]
    if len(sub) <= norm.shape[1] + 1:
        return list(remaining)
    candidates = None
    if approximate and len(sub) > approx_k:
        centroid = sub.mean(axis=0)
        d = np.linalg.norm(sub - centroid, axis=1)
        candidates = np.argsort(-d)[:approx_k]
    local = extreme_points(sub, candidates=candidates, rng=rng)
    return [int(remaining[i]) for i in local]


def nearest_neighbor(query, cases, space: ParameterSpace):
    """Case closest to the query in min-max-normalized Euclidean distance;
    ties broken by lowest id."""
    if not cases:
        raise DoeError("case list is empty")
    q = space.normalize(np.asarray(query, dtype=np.float64))[0]
    pts = space.normalize(np.array([c.as_vector() for c in cases]))
    d = np.linalg.norm(pts - q, axis=1)
    best = d.min()
    ties = np.nonzero(d <= best)[0]
    idx = min(ties, key=lambda i: cases[i].id)
    return cases[idx], float(d[idx])
