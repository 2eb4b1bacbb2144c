"""Freestream state, surface force integration, and aerodynamic coefficients.

Forces come from the closed-surface integral of gauge pressure and wall
shear stress over the triangle mesh, integrated piecewise-constant per
face.  Lift and drag are projections onto the freestream-aligned unit
vectors; coefficients are normalized by the dynamic pressure and a
reference area.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import TriMesh, WingDesign, section_transform


class AeroError(ValueError):
    """Invalid inflow, field, or coefficient inputs."""


@dataclass(frozen=True)
class InflowConditions:
    """Freestream speed [m/s] and angle of attack [deg]."""

    U_inf: float
    alpha_deg: float

    def __post_init__(self):
        if not (self.U_inf > 0):
            raise AeroError(f"freestream speed must be positive, got {self.U_inf}")


@dataclass(frozen=True)
class Atmosphere:
    """Thermodynamic state of the working fluid.  Defaults: ISA sea level."""

    rho: float = 1.225  # kg/m^3
    p_inf: float = 101325.0  # Pa
    T: float = 288.15  # K
    gamma: float = 1.4
    R_gas: float = 287.05  # J/(kg K)
    mu: float = 1.7894e-5  # Pa s

    def __post_init__(self):
        for name in ("rho", "p_inf", "T", "gamma", "R_gas", "mu"):
            if not (getattr(self, name) > 0):
                raise AeroError(f"{name} must be positive")

    @property
    def speed_of_sound(self):
        return math.sqrt(self.gamma * self.R_gas * self.T)


@dataclass(frozen=True)
class FreestreamState:
    """Derived dimensionless numbers and force-projection directions."""

    mach: float
    reynolds: float
    q: float  # dynamic pressure [Pa]
    e_drag: tuple
    e_lift: tuple


@dataclass
class SurfaceField:
    """Per-face surface pressure [Pa] and wall shear-stress vector [Pa]."""

    p_s: np.ndarray  # (F,)
    tau: np.ndarray  # (F, 3)

    def __post_init__(self):
        self.p_s = np.asarray(self.p_s, dtype=np.float64)
        self.tau = np.asarray(self.tau, dtype=np.float64)
        if self.p_s.ndim != 1 or self.tau.shape != (self.p_s.shape[0], 3):
            raise AeroError(
                f"field shape mismatch: p_s {self.p_s.shape}, tau {self.tau.shape}"
            )
        if not (np.isfinite(self.p_s).all() and np.isfinite(self.tau).all()):
            raise AeroError("surface field contains non-finite values")


UNBOUNDED = float("inf")


@dataclass(frozen=True)
class AeroCoefficients:
    """Force breakdown and dimensionless coefficients.

    lift_to_drag is +/-inf when C_D == 0 and C_l != 0 (never a silent
    division), and 0 when both vanish.
    """

    F: tuple
    F_drag: float
    F_lift: float
    C_D: float
    C_l: float
    lift_to_drag: float
    pressure_part: tuple
    friction_part: tuple


def flow_directions(alpha_deg):
    """Unit drag and lift directions for an angle of attack in degrees.

    The freestream direction is (cos a, 0, sin a); lift is its cross
    product with (0, 1, 0), giving (0, 0, 1) at a=0.
    """
    a = math.radians(alpha_deg)
    u = np.array([math.cos(a), 0.0, math.sin(a)])
    e_drag = u / np.linalg.norm(u)
    e_lift = np.cross(e_drag, np.array([0.0, 1.0, 0.0]))
    return e_drag, e_lift


def freestream_state(inflow: InflowConditions, atm: Atmosphere, c_ref):
    """Mach, Reynolds (reference length c_ref), dynamic pressure, directions."""
    if not (c_ref > 0):
        raise AeroError("reference chord must be positive")
    a = atm.speed_of_sound
    e_drag, e_lift = flow_directions(inflow.alpha_deg)
    return FreestreamState(
        mach=inflow.U_inf / a,
        reynolds=atm.rho * inflow.U_inf * c_ref / atm.mu,
        q=0.5 * atm.rho * inflow.U_inf**2,
        e_drag=tuple(e_drag),
        e_lift=tuple(e_lift),
    )


def integrate_forces(mesh: TriMesh, field: SurfaceField, p_inf):
    """Total surface force and its pressure/friction parts [N].

    F = sum_f [ -(p_s,f - p_inf) n_f + tau_f ] A_f with outward normals.
    """
    n_faces = len(mesh.triangles)
    if len(field.p_s) != n_faces:
        raise AeroError(
            f"field length {len(field.p_s)} does not match face count {n_faces}"
        )
    areas = mesh.face_areas
    normals = mesh.face_normals
    gauge = field.p_s - p_inf
    pressure_part = -(normals * (gauge * areas)[:, None]).sum(axis=0)
    friction_part = (field.tau * areas[:, None]).sum(axis=0)
    return pressure_part + friction_part, pressure_part, friction_part


def coefficients(F, inflow: InflowConditions, atm: Atmosphere, A_ref, alpha_deg=None,
                 pressure_part=None, friction_part=None):
    """Project a force vector into drag/lift and normalize to coefficients."""
    if not (A_ref > 0):
        raise AeroError("reference area must be positive")
    if alpha_deg is None:
        alpha_deg = inflow.alpha_deg
    F = np.asarray(F, dtype=np.float64)
    e_drag, e_lift = flow_directions(alpha_deg)
    F_drag = float(F @ e_drag)
    F_lift = float(F @ e_lift)
    denom = 0.5 * atm.rho * inflow.U_inf**2 * A_ref
    C_D = F_drag / denom
    C_l = F_lift / denom
    if C_D != 0.0:
        eps = C_l / C_D
    elif C_l == 0.0:
        eps = 0.0
    else:
        eps = math.copysign(UNBOUNDED, C_l)
    zero = (0.0, 0.0, 0.0)
    return AeroCoefficients(
        F=tuple(F),
        F_drag=F_drag,
        F_lift=F_lift,
        C_D=C_D,
        C_l=C_l,
        lift_to_drag=eps,
        pressure_part=tuple(pressure_part) if pressure_part is not None else zero,
        friction_part=tuple(friction_part) if friction_part is not None else zero,
    )


def surface_coefficients(field: SurfaceField, atm: Atmosphere, inflow: InflowConditions):
    """Per-face pressure coefficient (p_s - p_inf)/q and friction |tau|/q."""
    q = 0.5 * atm.rho * inflow.U_inf**2
    c_p = (field.p_s - atm.p_inf) / q
    c_f = np.linalg.norm(field.tau, axis=1) / q
    return c_p, c_f


def section_profile(mesh: TriMesh, values, y_over_b, band_width=None):
    """Chordwise profile of a per-face quantity at a normalized span station.

    Selects faces whose centroid lies within one spanwise cell of
    y_over_b * b, normalizes x by the local chord and leading-edge offset,
    and splits into upper (n_z >= 0) and lower surfaces sorted by x/c.
    Returns (upper, lower) as (N, 2) arrays of (x_over_c, value).
    """
    if not (0 < y_over_b < 1):
        raise AeroError("y/b must lie strictly inside (0, 1)")
    values = np.asarray(values, dtype=np.float64)
    if len(values) != len(mesh.triangles):
        raise AeroError("value array length does not match face count")

    meta = mesh.metadata
    try:
        design = WingDesign(**meta["design"])
        n_span = meta["resolution"]["n_span"]
    except (KeyError, TypeError):
        raise AeroError("mesh metadata with design and resolution is required")

    if band_width is None:
        band_width = design.b / n_span
    y0 = y_over_b * design.b
    cent = mesh.face_centroids
    mask = np.abs(cent[:, 1] - y0) <= band_width / 2.0
    # exclude cap faces (normals along +-y)
    mask &= np.abs(mesh.face_normals[:, 1]) < 0.999
    if not mask.any():
        raise AeroError("no faces in the spanwise band; resolution too coarse")

    chord, x_off, _ = section_transform(design, y_over_b)
    x_over_c = (cent[mask, 0] - x_off) / chord
    upper_mask = mesh.face_normals[mask, 2] >= 0
    vals = values[mask]

    def ordered(sel):
        pts = np.column_stack([x_over_c[sel], vals[sel]])
        return pts[np.argsort(pts[:, 0], kind="stable")]

    return ordered(upper_mask), ordered(~upper_mask)
