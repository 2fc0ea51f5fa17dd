"""Canonical scalp surface with an invertible UV chart.

The scalp is the polar cap of an axis-aligned ellipsoid, parameterized by an
azimuthal-equidistant chart: the chart center ``(0.5, 0.5)`` maps to the cap
apex, and the polar angle grows linearly with chart radius up to
``cap_angle`` at chart radius 0.5.  The chart is an exact bijection onto the
cap, which keeps root baking and root sampling mutually consistent.

An import hook for an external UV-mapped scalp mesh (ASCII PLY with
per-vertex ``u``/``v`` properties) is provided as a secondary path.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

_POLE_EPS = 1e-12
_CHART_TOL = 1e-9


@dataclass(frozen=True)
class RootFrame:
    """Right-handed orthonormal frame anchored at a strand root."""

    origin: np.ndarray
    tangent: np.ndarray
    bitangent: np.ndarray
    normal: np.ndarray

    def __post_init__(self):
        for name in ("origin", "tangent", "bitangent", "normal"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=np.float64))
        R = self.rotation
        if not np.allclose(R.T @ R, np.eye(3), atol=1e-10):
            raise ValueError("frame axes are not orthonormal")
        if np.dot(np.cross(self.tangent, self.bitangent), self.normal) < 0.0:
            raise ValueError("frame is not right-handed")

    @property
    def rotation(self) -> np.ndarray:
        """Columns are (tangent, bitangent, normal)."""
        return np.stack([self.tangent, self.bitangent, self.normal], axis=1)

    def to_local(self, points) -> np.ndarray:
        return (np.asarray(points, float) - self.origin) @ self.rotation

    def to_world(self, local) -> np.ndarray:
        return self.origin + np.asarray(local, float) @ self.rotation.T


@dataclass(frozen=True)
class FrameSet:
    """Vectorized bundle of root frames: origins ``(N, 3)``, rotations
    ``(N, 3, 3)`` with frame axes in columns."""

    origins: np.ndarray
    rotations: np.ndarray

    def __len__(self) -> int:
        return self.origins.shape[0]

    def __getitem__(self, i: int) -> RootFrame:
        R = self.rotations[i]
        return RootFrame(self.origins[i], R[:, 0], R[:, 1], R[:, 2])

    def to_local(self, points) -> np.ndarray:
        """Map world points ``(N, L, 3)`` into each strand's root frame."""
        rel = np.asarray(points, float) - self.origins[:, None, :]
        return np.matmul(rel, self.rotations)

    def to_world(self, local) -> np.ndarray:
        rot = np.matmul(np.asarray(local, float), np.swapaxes(self.rotations, 1, 2))
        return rot + self.origins[:, None, :]

    def replace_origins(self, origins) -> "FrameSet":
        return FrameSet(np.asarray(origins, dtype=np.float64), self.rotations)


@dataclass(frozen=True)
class ScalpSurface:
    """Ellipsoidal head with a scalp cap of polar half-angle ``cap_angle``."""

    center: np.ndarray = field(default_factory=lambda: np.zeros(3))
    radii: np.ndarray = field(default_factory=lambda: np.array([0.075, 0.095, 0.085]))
    cap_angle: float = 1.2

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=np.float64))
        object.__setattr__(self, "radii", np.asarray(self.radii, dtype=np.float64))
        if self.center.shape != (3,) or self.radii.shape != (3,):
            raise ValueError("center and radii must be 3-vectors")
        if (self.radii <= 0.0).any():
            raise ValueError("radii must be positive")
        if not 0.0 < self.cap_angle < np.pi / 2:
            raise ValueError("cap_angle must lie in (0, pi/2)")


def default_head() -> ScalpSurface:
    """Head-sized ellipsoid (meters) whose default chart keeps texel area
    distortion under 2x."""
    return ScalpSurface()


@dataclass(frozen=True)
class ScalpMask:
    """Boolean texel grid marking chart coverage, indexed ``valid[iy, ix]``."""

    resolution: int
    valid: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.valid, dtype=bool)
        if v.shape != (self.resolution, self.resolution):
            raise ValueError("mask grid does not match resolution")
        if not v.any():
            raise ValueError("mask has no valid texels")
        object.__setattr__(self, "valid", v)


def chart_mask(surface: ScalpSurface, resolution: int = 256) -> ScalpMask:
    """Texels whose center lies inside the chart disk."""
    c = (np.arange(resolution) + 0.5) / resolution
    u, v = np.meshgrid(c, c, indexing="xy")  # valid[iy, ix]: u varies along ix
    rho = np.hypot(u - 0.5, v - 0.5)
    return ScalpMask(resolution, rho <= 0.5)


def _chart_polar(uv):
    uv = np.asarray(uv, dtype=np.float64)
    du = uv[..., 0] - 0.5
    dv = uv[..., 1] - 0.5
    rho = np.hypot(du, dv)
    return du, dv, rho


def _frames_from_uv(surface: ScalpSurface, uv: np.ndarray) -> FrameSet:
    du, dv, rho = _chart_polar(uv)
    if (rho > 0.5 + _CHART_TOL).any():
        bad = np.nonzero(np.atleast_1d(rho) > 0.5 + _CHART_TOL)[0][:8].tolist()
        raise ValueError(f"uv outside the chart disk at indices {bad}")
    cap = surface.cap_angle
    phi = 2.0 * cap * rho
    safe = np.maximum(rho, _POLE_EPS)
    cpsi = np.where(rho > _POLE_EPS, du / safe, 1.0)
    spsi = np.where(rho > _POLE_EPS, dv / safe, 0.0)
    sphi, cphi = np.sin(phi), np.cos(phi)

    nhat = np.stack([sphi * cpsi, sphi * spsi, cphi], axis=-1)
    origin = surface.center + surface.radii * nhat

    # d(nhat)/du via the chain rule; the sin(phi)/rho factor stays finite at
    # the pole, where the derivative tends to 2*cap along +x.
    dphi_du = 2.0 * cap * cpsi
    sphi_dpsi_du = np.where(rho > _POLE_EPS, -sphi * dv / (safe * safe), 0.0)
    dn_du = np.stack(
        [
            dphi_du * cphi * cpsi - sphi_dpsi_du * spsi,
            dphi_du * cphi * spsi + sphi_dpsi_du * cpsi,
            -dphi_du * sphi,
        ],
        axis=-1,
    )
    du_vec = surface.radii * dn_du

    normal = nhat / surface.radii  # gradient of the implicit ellipsoid function
    normal = normal / np.linalg.norm(normal, axis=-1, keepdims=True)
    tangent = du_vec - (du_vec * normal).sum(-1, keepdims=True) * normal
    tangent = tangent / np.linalg.norm(tangent, axis=-1, keepdims=True)
    bitangent = np.cross(normal, tangent)

    rot = np.stack([tangent, bitangent, normal], axis=-1)
    return FrameSet(np.atleast_2d(origin), rot.reshape(-1, 3, 3))


def uv_to_world(surface: ScalpSurface, uv) -> RootFrame:
    """Map a chart point to its surface frame (origin on the cap, outward
    normal, tangent along the chart u direction)."""
    fs = _frames_from_uv(surface, np.reshape(np.asarray(uv, float), (1, 2)))
    return fs[0]


def uv_to_world_many(surface: ScalpSurface, uv) -> FrameSet:
    uv = np.asarray(uv, dtype=np.float64)
    if uv.ndim != 2 or uv.shape[1] != 2:
        raise ValueError(f"expected (N, 2) uv array, got {uv.shape}")
    return _frames_from_uv(surface, uv)


def world_to_uv_many(surface: ScalpSurface, points) -> np.ndarray:
    """Inverse of the chart origin map, via radial projection onto the cap."""
    p = np.atleast_2d(np.asarray(points, dtype=np.float64))
    q = (p - surface.center) / surface.radii
    qn = np.linalg.norm(q, axis=-1)
    if (qn <= 0.0).any():
        raise ValueError("point at the ellipsoid center has no chart image")
    qhat = q / qn[:, None]
    phi = np.arccos(np.clip(qhat[:, 2], -1.0, 1.0))
    if (phi > surface.cap_angle + _CHART_TOL).any():
        bad = np.nonzero(phi > surface.cap_angle + _CHART_TOL)[0][:8].tolist()
        raise ValueError(f"points project outside the scalp cap at indices {bad}")
    rho = phi / (2.0 * surface.cap_angle)
    psi = np.arctan2(qhat[:, 1], qhat[:, 0])
    uv = np.empty((p.shape[0], 2))
    uv[:, 0] = 0.5 + rho * np.cos(psi)
    uv[:, 1] = 0.5 + rho * np.sin(psi)
    return uv


def world_to_uv(surface: ScalpSurface, point) -> np.ndarray:
    return world_to_uv_many(surface, np.reshape(np.asarray(point, float), (1, 3)))[0]


def frames_at_points(surface: ScalpSurface, points) -> FrameSet:
    """Chart-aligned frames whose origins are the given points themselves.

    Used to canonicalize strands: the rotation comes from the chart at the
    point's projection, but the origin stays at the actual root so local
    coordinates start exactly at zero.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    uv = world_to_uv_many(surface, pts)
    return _frames_from_uv(surface, uv).replace_origins(pts)


def signed_distance(surface: ScalpSurface, points) -> np.ndarray:
    """Approximate signed distance to the ellipsoid (scaled-sphere form):
    negative inside, zero on the surface, positive outside."""
    p = np.asarray(points, dtype=np.float64)
    rel = p - surface.center
    k0 = np.linalg.norm(rel / surface.radii, axis=-1)
    k1 = np.linalg.norm(rel / (surface.radii * surface.radii), axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        sd = np.where(k0 > 0.0, k0 * (k0 - 1.0) / np.where(k1 > 0.0, k1, 1.0), -surface.radii.min())
    return sd if sd.ndim else float(sd)


def project_to_offset(surface: ScalpSurface, points, margin: float) -> np.ndarray:
    """Push points below the ``margin`` shell out to exactly that shell.

    Along the scaled-radial direction the approximate signed distance is
    linear, so the projection is closed form.  Points already at or beyond
    the margin are returned unchanged.
    """
    p = np.array(points, dtype=np.float64, copy=True)
    flat = p.reshape(-1, 3)
    sd = signed_distance(surface, flat)
    inside = sd < margin
    if inside.any():
        rel = flat[inside] - surface.center
        q = rel / surface.radii
        qn = np.linalg.norm(q, axis=-1)
        qhat = np.where(qn[:, None] > 0.0, q / np.maximum(qn, 1e-300)[:, None], [0.0, 0.0, 1.0])
        g = np.linalg.norm(qhat / surface.radii, axis=-1)
        s = 1.0 + margin * g
        flat[inside] = surface.center + surface.radii * qhat * s[:, None]
    return p


# ---------------------------------------------------------------------------
# Optional mesh-backed scalp (secondary path): ASCII PLY with u, v vertex
# properties, queried by brute-force barycentric search.  Intended for small
# scalp meshes (hundreds of vertices), not whole bodies.


class MeshScalp:
    """UV-mapped triangle mesh standing in for the analytic cap."""

    def __init__(self, vertices, uvs, faces):
        self.vertices = np.asarray(vertices, dtype=np.float64)
        self.uvs = np.asarray(uvs, dtype=np.float64)
        self.faces = np.asarray(faces, dtype=np.int64)
        if self.vertices.ndim != 2 or self.vertices.shape[1] != 3:
            raise ValueError("vertices must be (V, 3)")
        if self.uvs.shape != (self.vertices.shape[0], 2):
            raise ValueError("uvs must be (V, 2)")
        if self.faces.ndim != 2 or self.faces.shape[1] != 3 or len(self.faces) == 0:
            raise ValueError("faces must be (F, 3) and non-empty")

    @classmethod
    def from_ply(cls, path) -> "MeshScalp":
        verts, props, faces = _read_ascii_ply(Path(path))
        if "u" not in props or "v" not in props:
            raise ValueError("scalp PLY needs per-vertex u and v properties")
        uvs = np.stack([props["u"], props["v"]], axis=1)
        return cls(verts, uvs, faces)

    def _bary_in_uv(self, uv):
        a = self.uvs[self.faces[:, 0]]
        b = self.uvs[self.faces[:, 1]]
        c = self.uvs[self.faces[:, 2]]
        det = (b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (c[:, 0] - a[:, 0]) * (b[:, 1] - a[:, 1])
        w1 = (uv[0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (c[:, 0] - a[:, 0]) * (uv[1] - a[:, 1])
        w2 = (b[:, 0] - a[:, 0]) * (uv[1] - a[:, 1]) - (uv[0] - a[:, 0]) * (b[:, 1] - a[:, 1])
        with np.errstate(divide="ignore", invalid="ignore"):
            w1 = w1 / det
            w2 = w2 / det
        w0 = 1.0 - w1 - w2
        return np.stack([w0, w1, w2], axis=1)

    def uv_to_world(self, uv) -> RootFrame:
        uv = np.asarray(uv, dtype=np.float64)
        bary = self._bary_in_uv(uv)
        ok = np.nonzero((bary >= -1e-9).all(axis=1))[0]
        if len(ok) == 0:
            raise ValueError(f"uv {uv.tolist()} lies outside every face")
        f = ok[0]
        w = bary[f]
        tri = self.vertices[self.faces[f]]
        origin = w @ tri
        # Linear map of the face: world = tri_a + M @ (uv - uv_a)
        uvt = self.uvs[self.faces[f]]
        duv = np.stack([uvt[1] - uvt[0], uvt[2] - uvt[0]], axis=1)
        dxyz = np.stack([tri[1] - tri[0], tri[2] - tri[0]], axis=1)
        m = dxyz @ np.linalg.inv(duv)
        normal = np.cross(tri[1] - tri[0], tri[2] - tri[0])
        normal = normal / np.linalg.norm(normal)
        tangent = m[:, 0] - (m[:, 0] @ normal) * normal
        tangent = tangent / np.linalg.norm(tangent)
        return RootFrame(origin, tangent, np.cross(normal, tangent), normal)

    def world_to_uv(self, point) -> np.ndarray:
        p = np.asarray(point, dtype=np.float64)
        tri = self.vertices[self.faces]  # (F, 3, 3)
        a, b, c = tri[:, 0], tri[:, 1], tri[:, 2]
        ab, ac, ap = b - a, c - a, p - a
        d00 = (ab * ab).sum(1)
        d01 = (ab * ac).sum(1)
        d11 = (ac * ac).sum(1)
        d20 = (ap * ab).sum(1)
        d21 = (ap * ac).sum(1)
        den = d00 * d11 - d01 * d01
        with np.errstate(divide="ignore", invalid="ignore"):
            v = np.clip((d11 * d20 - d01 * d21) / den, 0.0, 1.0)
            w = np.clip((d00 * d21 - d01 * d20) / den, 0.0, 1.0)
        scale = np.clip(v + w, 1.0, None)
        v, w = v / scale, w / scale
        closest = a + v[:, None] * ab + w[:, None] * ac
        f = int(np.argmin(((closest - p) ** 2).sum(1)))
        bary = np.array([1.0 - v[f] - w[f], v[f], w[f]])
        return bary @ self.uvs[self.faces[f]]


def _read_ascii_ply(path: Path):
    """Minimal ASCII PLY reader: vertex floats + triangular faces."""
    lines = path.read_text().splitlines()
    if not lines or lines[0].strip() != "ply":
        raise ValueError(f"{path} is not a PLY file")
    i = 1
    elements: list[tuple[str, int, list[str]]] = []
    fmt = None
    while i < len(lines):
        tok = lines[i].split()
        i += 1
        if not tok or tok[0] == "comment":
            continue
        if tok[0] == "format":
            fmt = tok[1]
        elif tok[0] == "element":
            elements.append((tok[1], int(tok[2]), []))
        elif tok[0] == "property":
            elements[-1][2].append(tok[-1])
        elif tok[0] == "end_header":
            break
    if fmt != "ascii":
        raise ValueError("only ascii PLY is supported for scalp meshes")

    verts = None
    props: dict[str, np.ndarray] = {}
    faces: list[list[int]] = []
    for name, count, names in elements:
        rows = lines[i : i + count]
        i += count
        if name == "vertex":
            data = np.array([[float(x) for x in r.split()] for r in rows])
            if data.shape != (count, len(names)):
                raise ValueError("vertex rows do not match declared properties")
            props = {n: data[:, k] for k, n in enumerate(names)}
            verts = np.stack([props["x"], props["y"], props["z"]], axis=1)
        elif name == "face":
            for r in rows:
                tok = [int(x) for x in r.split()]
                if tok[0] != 3:
                    raise ValueError("only triangular faces are supported")
                faces.append(tok[1:4])
    if verts is None:
        raise ValueError("PLY file has no vertex element")
    return verts, props, np.array(faces, dtype=np.int64).reshape(-1, 3)
