"""Parametric NACA0012 wing geometry: lofted triangle meshes, analytic
vertex Jacobians, and STL I/O.

The wing is a half-wing: the root section sits in the y=0 symmetry plane
and the tip at y=b.  Sweep is applied to the leading edge.  Angles are
degrees at every interface, radians internally.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass, field

import numpy as np

# Closed-trailing-edge coefficient set (last term -0.1036 instead of the
# classic -0.1015) so the lofted surface is watertight without a TE patch.
_NACA_COEFFS = (0.2969, -0.1260, -0.3516, 0.2843, -0.1036)
_THICKNESS = 0.12

SWEEP_CONVENTION = "leading-edge"
MESH_FORMAT_VERSION = 1


class GeometryError(ValueError):
    """Invalid design parameters, resolution, or mesh data."""


@dataclass(frozen=True)
class WingDesign:
    """Four geometry parameters of the lofted wing.

    c_r: root chord [m], b: span from symmetry plane to tip [m],
    taper: tip chord / root chord, sweep_deg: leading-edge sweep [deg].
    """

    c_r: float
    b: float
    taper: float
    sweep_deg: float

    def __post_init__(self):
        if not (self.c_r > 0):
            raise GeometryError(f"root chord must be positive, got {self.c_r}")
        if not (self.b > 0):
            raise GeometryError(f"span must be positive, got {self.b}")
        if not (0 < self.taper <= 1):
            raise GeometryError(f"taper ratio must be in (0, 1], got {self.taper}")
        if not (0 <= self.sweep_deg < 90):
            raise GeometryError(f"sweep must be in [0, 90) deg, got {self.sweep_deg}")

    def as_tuple(self):
        return (self.c_r, self.b, self.taper, self.sweep_deg)


@dataclass(frozen=True)
class MeshResolution:
    """Chordwise stations per surface side and spanwise stations."""

    n_chord: int = 48
    n_span: int = 24

    def __post_init__(self):
        if self.n_chord < 4 or self.n_span < 2:
            raise GeometryError(
                f"resolution too coarse: n_chord={self.n_chord} (min 4), "
                f"n_span={self.n_span} (min 2)"
            )

    @property
    def vertex_count(self):
        # 2*n_chord ring vertices per section, n_span+1 sections, 2 cap centers
        return 2 * self.n_chord * (self.n_span + 1) + 2

    @property
    def triangle_count(self):
        return 4 * self.n_chord * self.n_span + 4 * self.n_chord


@dataclass
class TriMesh:
    """Watertight triangle surface mesh with per-face derived quantities."""

    vertices: np.ndarray  # (V, 3) float64
    triangles: np.ndarray  # (T, 3) int
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=np.float64)
        self.triangles = np.asarray(self.triangles, dtype=np.int64)
        self._face_cache = None

    def _faces(self):
        if self._face_cache is None:
            v = self.vertices
            t = self.triangles
            a, b, c = v[t[:, 0]], v[t[:, 1]], v[t[:, 2]]
            cross = np.cross(b - a, c - a)
            double_area = np.linalg.norm(cross, axis=1)
            areas = 0.5 * double_area
            with np.errstate(invalid="ignore", divide="ignore"):
                normals = cross / double_area[:, None]
            centroids = (a + b + c) / 3.0
            self._face_cache = (normals, areas, centroids)
        return self._face_cache

    @property
    def face_normals(self):
        return self._faces()[0]

    @property
    def face_areas(self):
        return self._faces()[1]

    @property
    def face_centroids(self):
        return self._faces()[2]

    @property
    def total_area(self):
        return float(self.face_areas.sum())

    def is_watertight(self):
        """Every edge shared by exactly two triangles."""
        edges = {}
        for tri in self.triangles:
            for i in range(3):
                e = (int(tri[i]), int(tri[(i + 1) % 3]))
                key = (min(e), max(e))
                edges[key] = edges.get(key, 0) + 1
        return all(n == 2 for n in edges.values())

    def signed_volume(self):
        v = self.vertices
        t = self.triangles
        a, b, c = v[t[:, 0]], v[t[:, 1]], v[t[:, 2]]
        return float(np.einsum("ij,ij->", a, np.cross(b, c)) / 6.0)


def naca0012_half_thickness(x_over_c):
    """Dimensionless half-thickness y_t/c of the closed-TE NACA0012 profile.

    Accepts a scalar or array in [0, 1].
    """
    x = np.asarray(x_over_c, dtype=np.float64)
    if np.any(x < 0) or np.any(x > 1):
        raise GeometryError("x/c must lie in [0, 1]")
    c1, c2, c3, c4, c5 = _NACA_COEFFS
    y = 5 * _THICKNESS * (c1 * np.sqrt(x) + x * (c2 + x * (c3 + x * (c4 + x * c5))))
    if np.ndim(x_over_c) == 0:
        return float(y)
    return y


def section_transform(design: WingDesign, s):
    """Local chord, leading-edge x offset, and spanwise y at span fraction s."""
    s = np.asarray(s, dtype=np.float64)
    chord = design.c_r * (1.0 + (design.taper - 1.0) * s)
    x_offset = s * design.b * math.tan(math.radians(design.sweep_deg))
    y = s * design.b
    if s.ndim == 0:
        return float(chord), float(x_offset), float(y)
    return chord, x_offset, y


def planform_area(design: WingDesign):
    """Trapezoid planform area of the modeled half-wing [m^2]."""
    return design.b * design.c_r * (1.0 + design.taper) / 2.0


def _unit_profile(n_chord):
    """Closed unit-chord section polygon (xi, zeta), 2*n_chord points.

    Runs leading edge -> trailing edge along the upper surface, then back
    along the lower surface.  Cosine clustering toward both edges.
    """
    t = np.arange(n_chord + 1) / n_chord
    x = 0.5 * (1.0 - np.cos(np.pi * t))
    x[0], x[-1] = 0.0, 1.0
    yt = naca0012_half_thickness(x)
    xi = np.concatenate([x, x[-2:0:-1]])
    zeta = np.concatenate([yt, -yt[-2:0:-1]])
    return xi, zeta


def loft_wing(design: WingDesign, resolution: MeshResolution = MeshResolution()):
    """Loft the NACA0012 profile along the span into a watertight mesh.

    Root at y=0, tip at y=b, flat triangle-fan caps on both ends, outward
    face normals.
    """
    n_c, n_s = resolution.n_chord, resolution.n_span
    xi, zeta = _unit_profile(n_c)
    ring = 2 * n_c

    s = np.arange(n_s + 1) / n_s
    chord, x_off, y = section_transform(design, s)

    verts = np.empty(((n_s + 1) * ring + 2, 3))
    for i in range(n_s + 1):
        base = i * ring
        verts[base : base + ring, 0] = x_off[i] + chord[i] * xi
        verts[base : base + ring, 1] = y[i]
        verts[base : base + ring, 2] = chord[i] * zeta

    root_center = (n_s + 1) * ring
    tip_center = root_center + 1
    verts[root_center] = [x_off[0] + chord[0] * xi.mean(), y[0], chord[0] * zeta.mean()]
    verts[tip_center] = [x_off[-1] + chord[-1] * xi.mean(), y[-1], chord[-1] * zeta.mean()]

    tris = []
    for i in range(n_s):
        b0 = i * ring
        b1 = (i + 1) * ring
        for k in range(ring):
            k1 = (k + 1) % ring
            tris.append((b0 + k, b0 + k1, b1 + k1))
            tris.append((b0 + k, b1 + k1, b1 + k))
    for k in range(ring):
        k1 = (k + 1) % ring
        tris.append((root_center, k1, k))
        tris.append((tip_center, n_s * ring + k, n_s * ring + k1))

    mesh = TriMesh(
        vertices=verts,
        triangles=np.array(tris, dtype=np.int64),
        metadata={
            "design": {
                "c_r": design.c_r,
                "b": design.b,
                "taper": design.taper,
                "sweep_deg": design.sweep_deg,
            },
            "resolution": {"n_chord": n_c, "n_span": n_s},
            "sweep_convention": SWEEP_CONVENTION,
            "format_version": MESH_FORMAT_VERSION,
        },
    )
    return mesh


def mesh_jacobian(design: WingDesign, resolution: MeshResolution = MeshResolution()):
    """Analytic (V, 3, 4) derivative of vertex positions w.r.t.
    (c_r, b, taper, sweep_deg).

    Vertex positions are affine in the unit-profile coordinates:
    x = s*b*tan(sweep) + chord(s)*xi, y = s*b, z = chord(s)*zeta with
    chord(s) = c_r*(1 + (taper-1)*s).  The sweep derivative is taken in
    radians internally and reported per degree.
    """
    n_c, n_s = resolution.n_chord, resolution.n_span
    xi, zeta = _unit_profile(n_c)
    ring = 2 * n_c
    s = np.arange(n_s + 1) / n_s

    sweep_rad = math.radians(design.sweep_deg)
    tan_sw = math.tan(sweep_rad)
    sec2 = 1.0 / math.cos(sweep_rad) ** 2

    n_verts = (n_s + 1) * ring + 2
    jac = np.zeros((n_verts, 3, 4))

    # section rings, then cap centers (mean profile point of each end ring)
    xi_all = np.concatenate([np.tile(xi, n_s + 1), [xi.mean(), xi.mean()]])
    zeta_all = np.concatenate([np.tile(zeta, n_s + 1), [zeta.mean(), zeta.mean()]])
    s_all = np.concatenate([np.repeat(s, ring), [0.0, 1.0]])

    taper_fac = 1.0 + (design.taper - 1.0) * s_all  # chord / c_r

    # d/dc_r
    jac[:, 0, 0] = taper_fac * xi_all
    jac[:, 2, 0] = taper_fac * zeta_all
    # d/db
    jac[:, 0, 1] = s_all * tan_sw
    jac[:, 1, 1] = s_all
    # d/dtaper
    jac[:, 0, 2] = design.c_r * s_all * xi_all
    jac[:, 2, 2] = design.c_r * s_all * zeta_all
    # d/dsweep (per degree)
    jac[:, 0, 3] = s_all * design.b * sec2 * math.pi / 180.0
    return jac


def export_stl(mesh: TriMesh, path, fmt="binary"):
    """Write the mesh as STL.  Binary layout: 80-byte header, uint32
    triangle count, 50-byte little-endian records."""
    # quantize coordinates to the file's float32 precision before computing
    # normals so that export -> import -> export is byte-stable
    v = mesh.vertices.astype(np.float32).astype(np.float64)
    t = mesh.triangles
    e1 = v[t[:, 1]] - v[t[:, 0]]
    e2 = v[t[:, 2]] - v[t[:, 0]]
    cross = np.cross(e1, e2)
    lengths = np.linalg.norm(cross, axis=1)
    normals = cross / np.where(lengths > 0, lengths, 1.0)[:, None]
    if fmt == "binary":
        with open(path, "wb") as f:
            f.write(b"wingforge binary stl".ljust(80, b"\0"))
            f.write(struct.pack("<I", len(t)))
            rec = struct.Struct("<12fH")
            for i, tri in enumerate(t):
                n = normals[i]
                pts = v[tri].ravel()
                f.write(rec.pack(*n.astype(np.float32), *pts.astype(np.float32), 0))
    elif fmt == "ascii":
        with open(path, "w") as f:
            f.write("solid wingforge\n")
            for i, tri in enumerate(t):
                n = normals[i]
                f.write(f"  facet normal {n[0]:e} {n[1]:e} {n[2]:e}\n")
                f.write("    outer loop\n")
                for p in v[tri]:
                    f.write(f"      vertex {p[0]:e} {p[1]:e} {p[2]:e}\n")
                f.write("    endloop\n")
                f.write("  endfacet\n")
            f.write("endsolid wingforge\n")
    else:
        raise GeometryError(f"unknown STL format {fmt!r}")


def write_mesh_metadata(mesh: TriMesh, path):
    """JSON sidecar with design parameters, resolution, sweep convention."""
    with open(path, "w") as f:
        json.dump(mesh.metadata, f, indent=2)


def import_stl(path):
    """Read an STL file (binary or ASCII) and weld exactly matching vertices."""
    with open(path, "rb") as f:
        head = f.read(5)
    if head == b"solid":
        # could still be binary with a 'solid' header; check for ascii tokens
        with open(path, "rb") as f:
            blob = f.read()
        if b"facet" in blob[:1024]:
            return _import_stl_ascii(blob.decode("utf-8", errors="replace"))
    return _import_stl_binary(path)


def _weld(points):
    verts = []
    index = {}
    tri = []
    for p in points:
        key = (p[0], p[1], p[2])
        idx = index.get(key)
        if idx is None:
            idx = len(verts)
            index[key] = idx
            verts.append(key)
        tri.append(idx)
    tris = np.array(tri, dtype=np.int64).reshape(-1, 3)
    mesh = TriMesh(vertices=np.array(verts, dtype=np.float64), triangles=tris)
    if not mesh.is_watertight():
        raise GeometryError("welded STL surface is not watertight")
    return mesh


def _import_stl_binary(path):
    with open(path, "rb") as f:
        f.read(80)
        raw = f.read(4)
        if len(raw) < 4:
            raise GeometryError("truncated STL header")
        (count,) = struct.unpack("<I", raw)
        rec = struct.Struct("<12fH")
        points = []
        for _ in range(count):
            buf = f.read(50)
            if len(buf) < 50:
                raise GeometryError("truncated STL record")
            vals = rec.unpack(buf)
            points.extend((vals[3:6], vals[6:9], vals[9:12]))
    return _weld(points)


def _import_stl_ascii(text):
    points = []
    for line in text.splitlines():
        parts = line.split()
        if parts and parts[0] == "vertex":
            if len(parts) != 4:
                raise GeometryError(f"malformed vertex line: {line.strip()!r}")
            points.append(tuple(np.float32(x) for x in parts[1:]))
    if not points or len(points) % 3:
        raise GeometryError("malformed ASCII STL: vertex count not a multiple of 3")
    return _weld(points)
