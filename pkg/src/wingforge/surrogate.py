"""Surrogate backends that map (design, inflow) to aerodynamic coefficients.

Two implementations of one contract:

* BuiltinLiftLine — an analytic swept-wing lifting-line model with
  Prandtl-Glauert compressibility, tanh stall saturation, flat-plate
  parasite drag, and fourth-power wave drag.  Fast, deterministic, and
  differentiable; a desk-scale stand-in for a learned field surrogate.
* RemoteSurrogate — HTTP client for an external field-predicting model.
  Sends low-resolution geometry cell centers and high-resolution query
  cell centers, receives per-face pressure and shear, and integrates the
  returned field locally.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import requests

from . import aero
from .aero import Atmosphere, InflowConditions, SurfaceField
from .geometry import MeshResolution, TriMesh, WingDesign, loft_wing, planform_area

MODEL_VERSION = "liftline-1"


class SurrogateError(Exception):
    """Invalid inputs or model-domain violation."""


class RemoteError(SurrogateError):
    """Remote backend failure (network, timeout)."""


class ProtocolError(RemoteError):
    """Remote response violates the wire schema."""

    def __init__(self, field_name, message):
        super().__init__(f"protocol error in field {field_name!r}: {message}")
        self.field_name = field_name


@dataclass(frozen=True)
class SurrogateRef:
    """Backend selector: builtin analytic model or remote HTTP service."""

    kind: str = "builtin-liftline"
    endpoint: Optional[str] = None
    timeout: float = 10.0
    retries: int = 3

    def __post_init__(self):
        if self.kind not in ("builtin-liftline", "remote"):
            raise SurrogateError(f"unknown backend kind {self.kind!r}")
        if self.kind == "remote" and not self.endpoint:
            raise SurrogateError("remote backend requires an endpoint")


@dataclass(frozen=True)
class LiftLineParams:
    """Tuning constants of the analytic model."""

    a0: float = 2 * math.pi  # per-radian lift slope
    e_oswald: float = 0.9
    CL_max: float = 1.2
    CD0_k: float = 0.074  # turbulent flat-plate constant
    wetted_factor: float = 2.05
    M_crit: float = 0.7
    wave_k: float = 20.0

    def __post_init__(self):
        for name in ("a0", "e_oswald", "CL_max", "CD0_k", "wetted_factor",
                     "M_crit", "wave_k"):
            if not (getattr(self, name) > 0):
                raise SurrogateError(f"{name} must be positive")


@dataclass
class Prediction:
    """Coefficients plus optional surface field and provenance."""

    coefficients: aero.AeroCoefficients
    mach: float
    reynolds: float
    surface_field: Optional[SurfaceField] = None
    mesh: Optional[TriMesh] = None
    provenance: dict = field(default_factory=dict)


def _aspect_ratio(design: WingDesign):
    # symmetry-reflected wing: span 2b, area 2S
    area = planform_area(design)
    return 2.0 * design.b**2 / area


def _model_state(design, inflow, atm, params):
    mach = inflow.U_inf / atm.speed_of_sound
    reynolds = atm.rho * inflow.U_inf * design.c_r / atm.mu
    cos_sw = math.cos(math.radians(design.sweep_deg))
    u = mach * cos_sw
    if u >= 0.999:
        raise SurrogateError(
            f"effective Mach {u:.3f} at or beyond divergence limit 0.999"
        )
    return mach, reynolds, cos_sw, u


def liftline_coefficients(design: WingDesign, inflow: InflowConditions,
                          atm: Atmosphere, params: LiftLineParams = LiftLineParams()):
    """(C_l, C_D, Mach, Reynolds) of the analytic model."""
    mach, reynolds, cos_sw, u = _model_state(design, inflow, atm, params)
    ar = _aspect_ratio(design)
    beta = math.sqrt(1.0 - u * u)
    a_eff = params.a0 * cos_sw / beta
    pie_ar = math.pi * params.e_oswald * ar
    denom = 1.0 + a_eff / pie_ar
    cl_lin = a_eff * math.radians(inflow.alpha_deg) / denom
    cl = params.CL_max * math.tanh(cl_lin / params.CL_max)
    cd0 = params.wetted_factor * params.CD0_k / reynolds**0.2
    excess = u - params.M_crit
    cd_wave = params.wave_k * excess**4 if excess > 0 else 0.0
    cd = cd0 + cl * cl / pie_ar + cd_wave
    return cl, cd, mach, reynolds


def liftline_gradient(design: WingDesign, inflow: InflowConditions,
                      atm: Atmosphere, params: LiftLineParams = LiftLineParams()):
    """Analytic d(C_l, C_D, lift_to_drag)/d(c_r, b, taper, sweep_deg, U_inf, alpha_deg).

    Returns a dict of three 6-vectors keyed 'C_l', 'C_D', 'lift_to_drag'.
    Sweep and alpha derivatives are per degree.
    """
    mach, reynolds, cos_sw, u = _model_state(design, inflow, atm, params)
    c_r, b, lam = design.c_r, design.b, design.taper
    sweep_rad = math.radians(design.sweep_deg)
    alpha_rad = math.radians(inflow.alpha_deg)
    deg = math.pi / 180.0

    ar = _aspect_ratio(design)
    beta = math.sqrt(1.0 - u * u)
    a0 = params.a0
    a_eff = a0 * cos_sw / beta
    pie = math.pi * params.e_oswald
    denom = 1.0 + a_eff / (pie * ar)
    cl_lin = a_eff * alpha_rad / denom
    t = math.tanh(cl_lin / params.CL_max)
    cl = params.CL_max * t
    cd0 = params.wetted_factor * params.CD0_k / reynolds**0.2
    excess = u - params.M_crit
    cd_wave = params.wave_k * excess**4 if excess > 0 else 0.0
    cd = cd0 + cl * cl / (pie * ar) + cd_wave

    # input -> intermediate derivative rows, order (c_r, b, taper, sweep, U, alpha)
    d_mach = np.array([0, 0, 0, 0, 1.0 / atm.speed_of_sound, 0])
    d_re = np.array([atm.rho * inflow.U_inf / atm.mu, 0, 0, 0,
                     atm.rho * c_r / atm.mu, 0])
    d_ar = np.array([-ar / c_r, ar / b, -ar / (1.0 + lam), 0, 0, 0])
    d_cos = np.array([0, 0, 0, -math.sin(sweep_rad) * deg, 0, 0])
    d_alpha = np.array([0, 0, 0, 0, 0, deg])

    d_u = cos_sw * d_mach + mach * d_cos
    d_beta = -u / beta * d_u
    d_aeff = a0 * d_cos / beta - a0 * cos_sw / beta**2 * d_beta
    # cl_lin partials: d/da_eff = alpha/denom^2, d/dAR = a_eff^2 alpha/(pie AR^2 denom^2)
    d_cllin = (alpha_rad / denom**2) * d_aeff \
        + (a_eff**2 * alpha_rad / (pie * ar**2 * denom**2)) * d_ar \
        + (a_eff / denom) * d_alpha
    d_cl = (1.0 - t * t) * d_cllin
    d_cd0 = (-0.2 * cd0 / reynolds) * d_re
    d_cdi = (2.0 * cl / (pie * ar)) * d_cl - (cl * cl / (pie * ar**2)) * d_ar
    d_cdw = (4.0 * params.wave_k * excess**3 if excess > 0 else 0.0) * d_u
    d_cd = d_cd0 + d_cdi + d_cdw
    d_eps = (d_cl * cd - cl * d_cd) / cd**2
    return {"C_l": d_cl, "C_D": d_cd, "lift_to_drag": d_eps}


def _synthesize_field(mesh: TriMesh, design, inflow, atm, cl, cd):
    """Per-face surface field whose integral reproduces the model force.

    A smooth heuristic pressure distribution supplies the chordwise shape;
    a uniform shear correction closes the gap to the exact target force.
    """
    q = 0.5 * atm.rho * inflow.U_inf**2
    a_ref = planform_area(design)
    e_drag, e_lift = aero.flow_directions(inflow.alpha_deg)
    f_target = q * a_ref * (cl * e_lift + cd * e_drag)

    cent = mesh.face_centroids
    normals = mesh.face_normals
    s = np.clip(cent[:, 1] / design.b, 0.0, 1.0)
    chord = design.c_r * (1.0 + (design.taper - 1.0) * s)
    x_off = s * design.b * math.tan(math.radians(design.sweep_deg))
    xc = np.clip((cent[:, 0] - x_off) / chord, 0.0, 1.0)
    loading = 4.0 * xc * (1.0 - xc)
    asym = np.sign(normals[:, 2]) * math.sin(math.radians(inflow.alpha_deg))
    c_p = loading * (-0.3 - 1.5 * asym)
    p_s = atm.p_inf + q * c_p

    base = SurfaceField(p_s=p_s, tau=np.zeros((len(p_s), 3)))
    f_pressure, _, _ = aero.integrate_forces(mesh, base, atm.p_inf)
    tau_corr = (f_target - f_pressure) / mesh.total_area
    return SurfaceField(p_s=p_s, tau=np.tile(tau_corr, (len(p_s), 1)))


class BuiltinLiftLine:
    """Analytic surrogate backend.  Pure and thread-safe."""

    def __init__(self, params: LiftLineParams = LiftLineParams(),
                 field_resolution: MeshResolution = MeshResolution()):
        self.params = params
        self.field_resolution = field_resolution

    def predict(self, design: WingDesign, inflow: InflowConditions,
                atm: Atmosphere = Atmosphere(), with_field=False) -> Prediction:
        cl, cd, mach, reynolds = liftline_coefficients(design, inflow, atm, self.params)
        q = 0.5 * atm.rho * inflow.U_inf**2
        a_ref = planform_area(design)
        e_drag, e_lift = aero.flow_directions(inflow.alpha_deg)
        f = q * a_ref * (cl * e_lift + cd * e_drag)
        coeffs = aero.coefficients(
            f, inflow, atm, a_ref,
            pressure_part=q * a_ref * cl * e_lift,
            friction_part=q * a_ref * cd * e_drag,
        )
        pred = Prediction(
            coefficients=coeffs, mach=mach, reynolds=reynolds,
            provenance={"backend": "builtin-liftline", "version": MODEL_VERSION},
        )
        if with_field:
            mesh = loft_wing(design, self.field_resolution)
            pred.mesh = mesh
            pred.surface_field = _synthesize_field(mesh, design, inflow, atm, cl, cd)
        return pred

    def gradient(self, design, inflow, atm=Atmosphere()):
        return liftline_gradient(design, inflow, atm, self.params)


class RemoteSurrogate:
    """HTTP client for an external field surrogate.

    Wire protocol: POST {endpoint}/predict with JSON
    {design, inflow, geometry_points, query_points}; response
    {p_s, tau, model_version}.  Responses are integrated locally over the
    query mesh.
    """

    def __init__(self, ref: SurrogateRef,
                 geometry_resolution: MeshResolution = MeshResolution(16, 8),
                 query_resolution: MeshResolution = MeshResolution(48, 24),
                 session=None):
        if ref.kind != "remote":
            raise SurrogateError("RemoteSurrogate requires a remote SurrogateRef")
        self.ref = ref
        self.geometry_resolution = geometry_resolution
        self.query_resolution = query_resolution
        self._session = session or requests.Session()

    def predict(self, design: WingDesign, inflow: InflowConditions,
                atm: Atmosphere = Atmosphere(), with_field=True) -> Prediction:
        geo_mesh = loft_wing(design, self.geometry_resolution)
        query_mesh = loft_wing(design, self.query_resolution)
        payload = {
            "design": {"c_r": design.c_r, "b": design.b,
                       "lambda": design.taper, "Lambda": design.sweep_deg},
            "inflow": {"U_inf": inflow.U_inf, "alpha": inflow.alpha_deg},
            "geometry_points": geo_mesh.face_centroids.tolist(),
            "query_points": query_mesh.face_centroids.tolist(),
        }
        body, retries_used = self._post(payload)
        field = self._validate(body, len(query_mesh.triangles))

        f, pressure_part, friction_part = aero.integrate_forces(
            query_mesh, field, atm.p_inf)
        a_ref = planform_area(design)
        coeffs = aero.coefficients(f, inflow, atm, a_ref,
                                   pressure_part=pressure_part,
                                   friction_part=friction_part)
        state = aero.freestream_state(inflow, atm, design.c_r)
        return Prediction(
            coefficients=coeffs, mach=state.mach, reynolds=state.reynolds,
            surface_field=field, mesh=query_mesh,
            provenance={"backend": "remote",
                        "version": body.get("model_version", "unknown"),
                        "retries": retries_used},
        )

    def _post(self, payload):
        url = self.ref.endpoint.rstrip("/") + "/predict"
        last_exc = None
        for attempt in range(self.ref.retries + 1):
            try:
                resp = self._session.post(url, json=payload, timeout=self.ref.timeout)
                resp.raise_for_status()
                return resp.json(), attempt
            except (requests.ConnectionError, requests.Timeout,
                    requests.HTTPError) as exc:
                last_exc = exc
                if attempt < self.ref.retries:
                    time.sleep(0.1 * 2**attempt)
        raise RemoteError(f"remote surrogate failed after "
                          f"{self.ref.retries + 1} attempts: {last_exc}")

    @staticmethod
    def _validate(body, n_query):
        if not isinstance(body, dict):
            raise ProtocolError("response", "body is not a JSON object")
        p_s = body.get("p_s")
        tau = body.get("tau")
        if not isinstance(p_s, list) or len(p_s) != n_query:
            raise ProtocolError("p_s", f"expected list of length {n_query}")
        if not isinstance(tau, list) or len(tau) != n_query:
            raise ProtocolError("tau", f"expected list of length {n_query}")
        try:
            p_arr = np.asarray(p_s, dtype=np.float64)
            tau_arr = np.asarray(tau, dtype=np.float64)
        except (TypeError, ValueError) as exc:
            raise ProtocolError("tau", f"non-numeric entries: {exc}")
        if tau_arr.shape != (n_query, 3):
            raise ProtocolError("tau", f"expected shape ({n_query}, 3), "
                                f"got {tau_arr.shape}")
        if not (np.isfinite(p_arr).all() and np.isfinite(tau_arr).all()):
            raise ProtocolError("p_s", "non-finite values in response")
        return SurfaceField(p_s=p_arr, tau=tau_arr)


def make_backend(ref: SurrogateRef, **kwargs):
    if ref.kind == "builtin-liftline":
        return BuiltinLiftLine(**kwargs)
    return RemoteSurrogate(ref, **kwargs)
