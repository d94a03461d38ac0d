"""Scene loading and per-frame mesh preparation.

Meshes are kept as triangle soup (per-corner positions/uvs/normals) because
tessellation and per-frame rigid animation both rewrite triangles wholesale.
Zero-area triangles are dropped at load with a warning. Tessellation is
longest-edge bisection in world space until every triangle's projected
screen-space area is at or below a pixel budget in every view, which bounds
rasterizer work per triangle and keeps the surface exactly (children
partition the parent).
"""

import os
import warnings
from dataclasses import dataclass, field

import numpy as np
from PIL import Image

from .kernels import common as kc


@dataclass
class Material:
    name: str = "default"
    scalars: np.ndarray = field(
        default_factory=lambda: np.array(
            [0.8, 0.8, 0.8, 0.5, 0.5, 1.0, 0.8, 0.0, 1.0], dtype=np.float32))
    textures: dict = field(default_factory=dict)  # slot name -> float32 image


@dataclass
class Mesh:
    """Triangle soup with per-corner attributes.

    tri_pos: (T,3,3) float64, tri_uv: (T,3,2) float64, tri_norm: (T,3,3)
    float64 (unit), tri_mat: (T,) int32, materials: list[Material].
    has_uv marks triangles whose uvs came from the file rather than zeros.
    """

    tri_pos: np.ndarray
    tri_uv: np.ndarray
    tri_norm: np.ndarray
    tri_mat: np.ndarray
    materials: list
    has_uv: np.ndarray  # (T,) bool

    @property
    def n_tris(self):
        return self.tri_pos.shape[0]

    def bbox(self):
        pts = self.tri_pos.reshape(-1, 3)
        return pts.min(axis=0), pts.max(axis=0)

    def world_areas(self):
        e1 = self.tri_pos[:, 1] - self.tri_pos[:, 0]
        e2 = self.tri_pos[:, 2] - self.tri_pos[:, 0]
        return 0.5 * np.linalg.norm(np.cross(e1, e2), axis=1)

    def uv_areas(self):
        e1 = self.tri_uv[:, 1] - self.tri_uv[:, 0]
        e2 = self.tri_uv[:, 2] - self.tri_uv[:, 0]
        return 0.5 * np.abs(e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])

    def face_normals(self):
        e1 = self.tri_pos[:, 1] - self.tri_pos[:, 0]
        e2 = self.tri_pos[:, 2] - self.tri_pos[:, 0]
        n = np.cross(e1, e2)
        ln = np.linalg.norm(n, axis=1, keepdims=True)
        return n / np.maximum(ln, 1e-300)

    def tangent_frames(self):
        """Per-triangle (tangent, bitangent) from the uv parameterization.

        Falls back to an arbitrary frame orthogonal to the face normal when
        uvs are missing or degenerate, so normal-neutral texels always leave
        the shading normal unchanged.
        """
        t = np.zeros((self.n_tris, 3))
        b = np.zeros((self.n_tris, 3))
        e1 = self.tri_pos[:, 1] - self.tri_pos[:, 0]
        e2 = self.tri_pos[:, 2] - self.tri_pos[:, 0]
        d1 = self.tri_uv[:, 1] - self.tri_uv[:, 0]
        d2 = self.tri_uv[:, 2] - self.tri_uv[:, 0]
        det = d1[:, 0] * d2[:, 1] - d2[:, 0] * d1[:, 1]
        ok = np.abs(det) > 1e-12
        r = np.zeros(self.n_tris)
        r[ok] = 1.0 / det[ok]
        t[ok] = (e1[ok] * d2[ok, 1:2] - e2[ok] * d1[ok, 1:2]) * r[ok, None]
        b[ok] = (e2[ok] * d1[ok, 0:1] - e1[ok] * d2[ok, 0:1]) * r[ok, None]
        n = self.face_normals()
        # orthonormalize; replace bad frames with any perpendicular pair
        t = t - n * np.sum(t * n, axis=1, keepdims=True)
        lt = np.linalg.norm(t, axis=1)
        bad = lt < 1e-9
        if np.any(bad):
            alt = np.where(np.abs(n[bad, 0:1]) < 0.9,
                           np.array([[1.0, 0.0, 0.0]]),
                           np.array([[0.0, 1.0, 0.0]]))
            t[bad] = np.cross(alt, n[bad])
            lt = np.linalg.norm(t, axis=1)
        t = t / np.maximum(lt, 1e-300)[:, None]
        lb = np.linalg.norm(b, axis=1)
        bad = lb < 1e-9
        b = np.where(bad[:, None], np.cross(n, t), b / np.maximum(lb, 1e-300)[:, None])
        return t, b

    def copy(self):
        return Mesh(self.tri_pos.copy(), self.tri_uv.copy(),
                    self.tri_norm.copy(), self.tri_mat.copy(),
                    list(self.materials), self.has_uv.copy())


def mesh_from_soup(tri_pos, tri_uv=None, tri_norm=None, tri_mat=None,
                   materials=None, has_uv=None):
    """Build a Mesh from raw arrays, synthesizing missing attributes."""
    tri_pos = np.asarray(tri_pos, dtype=np.float64)
    t = tri_pos.shape[0]
    if tri_uv is None:
        tri_uv = np.zeros((t, 3, 2))
        if has_uv is None:
            has_uv = np.zeros(t, dtype=bool)
    tri_uv = np.asarray(tri_uv, dtype=np.float64)
    if has_uv is None:
        has_uv = np.ones(t, dtype=bool)
    if tri_norm is None:
        e1 = tri_pos[:, 1] - tri_pos[:, 0]
        e2 = tri_pos[:, 2] - tri_pos[:, 0]
        n = np.cross(e1, e2)
        n = n / np.maximum(np.linalg.norm(n, axis=1, keepdims=True), 1e-300)
        tri_norm = np.repeat(n[:, None, :], 3, axis=1)
    tri_norm = np.asarray(tri_norm, dtype=np.float64)
    if tri_mat is None:
        tri_mat = np.zeros(t, dtype=np.int32)
    if materials is None:
        materials = [Material()]
    return Mesh(tri_pos, tri_uv, tri_norm,
                np.asarray(tri_mat, dtype=np.int32), materials,
                np.asarray(has_uv, dtype=bool))


def _load_texture(path):
    img = Image.open(path)
    arr = np.asarray(img.convert("RGB" if img.mode in ("RGB", "RGBA", "P") else "L"),
                     dtype=np.float32) / 255.0
    if arr.ndim == 2:
        arr = arr[:, :, None]
    return arr[::-1].copy()  # row 0 = v=0 (image bottom)


def _ns_to_roughness(ns):
    # Blinn-Phong exponent to a GGX-ish roughness
    return float(np.clip(np.sqrt(2.0 / (ns + 2.0)), 0.0, 1.0))


def load_mtl(path):
    """Parse a .mtl file into {name: Material}."""
    materials = {}
    cur = None
    base = os.path.dirname(path)
    tex_keys = {
        "map_kd": "albedo", "map_bump": "normal", "bump": "normal",
        "norm": "normal", "map_pr": "roughness", "map_ns": "roughness",
        "map_pm": "metallic", "map_ao": "ao",
    }
    with open(path, "r", encoding="utf-8", errors="replace") as fh:
        for raw in fh:
            parts = raw.split()
            if not parts or parts[0].startswith("#"):
                continue
            key = parts[0].lower()
            if key == "newmtl":
                cur = Material(name=parts[1] if len(parts) > 1 else "unnamed")
                cur.scalars = cur.scalars.copy()
                materials[cur.name] = cur
            elif cur is None:
                continue
            elif key == "kd" and len(parts) >= 4:
                cur.scalars[0:3] = [float(p) for p in parts[1:4]]
            elif key == "pr" and len(parts) >= 2:
                cur.scalars[kc.CH_ROUGH] = float(parts[1])
            elif key == "ns" and len(parts) >= 2:
                cur.scalars[kc.CH_ROUGH] = _ns_to_roughness(float(parts[1]))
            elif key == "pm" and len(parts) >= 2:
                cur.scalars[kc.CH_METAL] = float(parts[1])
            elif key in tex_keys:
                tex_path = os.path.join(base, parts[-1])
                if os.path.exists(tex_path):
                    cur.textures[tex_keys[key]] = _load_texture(tex_path)
                else:
                    warnings.warn(f"missing texture {tex_path}")
    return materials


def load_obj(path):
    """Load an OBJ (with optional MTL) into triangle soup.

    Faces are fan-triangulated; v/vt/vn indices may be negative. Triangles
    with zero world area are dropped with a count warning.
    """
    vs, vts, vns = [], [], []
    faces = []  # (corners, mat_index)
    mat_names = ["default"]
    mat_lookup = {"default": 0}
    materials = {"default": Material()}
    cur_mat = 0
    base = os.path.dirname(path)
    with open(path, "r", encoding="utf-8", errors="replace") as fh:
        for raw in fh:
            parts = raw.split()
            if not parts or parts[0].startswith("#"):
                continue
            key = parts[0]
            if key == "v":
                vs.append([float(p) for p in parts[1:4]])
            elif key == "vt":
                vts.append([float(parts[1]), float(parts[2]) if len(parts) > 2 else 0.0])
            elif key == "vn":
                vns.append([float(p) for p in parts[1:4]])
            elif key == "mtllib":
                mtl_path = os.path.join(base, " ".join(parts[1:]))
                if os.path.exists(mtl_path):
                    materials.update(load_mtl(mtl_path))
            elif key == "usemtl":
                name = parts[1] if len(parts) > 1 else "default"
                if name not in mat_lookup:
                    mat_lookup[name] = len(mat_names)
                    mat_names.append(name)
                cur_mat = mat_lookup[name]
            elif key == "f":
                corners = []
                for spec in parts[1:]:
                    ids = spec.split("/")
                    vi = int(ids[0])
                    ti = int(ids[1]) if len(ids) > 1 and ids[1] else 0
                    ni = int(ids[2]) if len(ids) > 2 and ids[2] else 0
                    corners.append((vi, ti, ni))
                for k in range(1, len(corners) - 1):
                    faces.append(((corners[0], corners[k], corners[k + 1]), cur_mat))

    vs = np.asarray(vs, dtype=np.float64).reshape(-1, 3)
    vts = np.asarray(vts, dtype=np.float64).reshape(-1, 2)
    vns = np.asarray(vns, dtype=np.float64).reshape(-1, 3)

    def _resolve(idx, n):
        return idx - 1 if idx > 0 else n + idx

    t_count = len(faces)
    tri_pos = np.zeros((t_count, 3, 3))
    tri_uv = np.zeros((t_count, 3, 2))
    tri_norm = np.zeros((t_count, 3, 3))
    tri_mat = np.zeros(t_count, dtype=np.int32)
    has_uv = np.zeros(t_count, dtype=bool)
    has_n = np.zeros(t_count, dtype=bool)
    for t, (corners, m) in enumerate(faces):
        tri_mat[t] = m
        uv_ok = True
        n_ok = True
        for c, (vi, ti, ni) in enumerate(corners):
            tri_pos[t, c] = vs[_resolve(vi, len(vs))]
            if ti and len(vts):
                tri_uv[t, c] = vts[_resolve(ti, len(vts))]
            else:
                uv_ok = False
            if ni and len(vns):
                tri_norm[t, c] = vns[_resolve(ni, len(vns))]
            else:
                n_ok = False
        has_uv[t] = uv_ok
        has_n[t] = n_ok

    # face normals where vn missing or zero
    e1 = tri_pos[:, 1] - tri_pos[:, 0]
    e2 = tri_pos[:, 2] - tri_pos[:, 0]
    fn = np.cross(e1, e2)
    areas = 0.5 * np.linalg.norm(fn, axis=1)
    fnu = fn / np.maximum(np.linalg.norm(fn, axis=1, keepdims=True), 1e-300)
    for t in range(t_count):
        if not has_n[t]:
            tri_norm[t, :] = fnu[t]
    ln = np.linalg.norm(tri_norm, axis=2, keepdims=True)
    tri_norm = np.where(ln > 1e-12, tri_norm / np.maximum(ln, 1e-300),
                        fnu[:, None, :])

    scale = float(np.max(np.abs(vs))) if len(vs) else 1.0
    keep = areas > 1e-12 * max(scale, 1.0) ** 2
    dropped = int(t_count - keep.sum())
    if dropped:
        warnings.warn(f"{path}: dropped {dropped} zero-area triangles")

    mat_list = [materials.get(n, Material(name=n)) for n in mat_names]
    return Mesh(tri_pos[keep], tri_uv[keep], tri_norm[keep], tri_mat[keep],
                mat_list, has_uv[keep])


def _max_projected_area(pos3, cams):
    """Max screen-space area (px^2) of one triangle over the cameras.

    Vertices behind the near plane contribute through a clamped depth, which
    overestimates area and therefore only drives further subdivision.
    """
    worst = 0.0
    for cam in cams:
        z = cam.d - pos3[:, 2]
        zc = np.maximum(z, cam.near)
        ndc_x = (cam.d * pos3[:, 0] - cam.ex * pos3[:, 2]) * (2.0 / cam.fw) / zc
        ndc_y = (cam.d * pos3[:, 1]) * (2.0 / cam.fh) / zc
        sx = (ndc_x + 1.0) * 0.5 * cam.width
        sy = (1.0 - ndc_y) * 0.5 * cam.height
        area = 0.5 * abs((sx[1] - sx[0]) * (sy[2] - sy[0])
                         - (sy[1] - sy[0]) * (sx[2] - sx[0]))
        if area > worst:
            worst = area
    return worst


def tessellate(mesh, cams, max_pixels=100.0, max_depth=32):
    """Longest-edge bisection until projected area <= max_pixels in all views."""
    out_pos, out_uv, out_norm, out_mat, out_has = [], [], [], [], []
    stack = [(mesh.tri_pos[t], mesh.tri_uv[t], mesh.tri_norm[t],
              int(mesh.tri_mat[t]), bool(mesh.has_uv[t]), 0)
             for t in range(mesh.n_tris)]
    while stack:
        pos, uv, nrm, mat, huv, depth = stack.pop()
        if depth < max_depth and _max_projected_area(pos, cams) > max_pixels:
            e = [np.sum((pos[(i + 1) % 3] - pos[i]) ** 2) for i in range(3)]
            i = int(np.argmax(e))
            j = (i + 1) % 3
            k = (i + 2) % 3
            mp = 0.5 * (pos[i] + pos[j])
            mu = 0.5 * (uv[i] + uv[j])
            mn = 0.5 * (nrm[i] + nrm[j])
            ln = np.linalg.norm(mn)
            mn = mn / ln if ln > 1e-12 else nrm[i]
            stack.append((np.stack([pos[i], mp, pos[k]]),
                          np.stack([uv[i], mu, uv[k]]),
                          np.stack([nrm[i], mn, nrm[k]]), mat, huv, depth + 1))
            stack.append((np.stack([mp, pos[j], pos[k]]),
                          np.stack([mu, uv[j], uv[k]]),
                          np.stack([mn, nrm[j], nrm[k]]), mat, huv, depth + 1))
        else:
            out_pos.append(pos)
            out_uv.append(uv)
            out_norm.append(nrm)
            out_mat.append(mat)
            out_has.append(huv)
    return Mesh(np.asarray(out_pos), np.asarray(out_uv), np.asarray(out_norm),
                np.asarray(out_mat, dtype=np.int32), list(mesh.materials),
                np.asarray(out_has, dtype=bool))


def rotation_matrix(axis, angle):
    axis = np.asarray(axis, dtype=np.float64)
    axis = axis / np.linalg.norm(axis)
    x, y, z = axis
    c, s = np.cos(angle), np.sin(angle)
    cc = 1.0 - c
    return np.array([
        [c + x * x * cc, x * y * cc - z * s, x * z * cc + y * s],
        [y * x * cc + z * s, c + y * y * cc, y * z * cc - x * s],
        [z * x * cc - y * s, z * y * cc + x * s, c + z * z * cc],
    ])


@dataclass
class Turntable:
    """Rigid per-frame rotation about an axis through the scene center."""

    axis: tuple = (0.0, 1.0, 0.0)
    rate: float = 0.015  # radians per frame
    pivot: tuple = (0.0, 0.0, 0.0)


def mesh_at_frame(mesh, anim, frame):
    """Pose for frame k, always rotated from the base mesh (no accumulation)."""
    if anim is None or anim.rate == 0.0 or frame == 0:
        return mesh
    rot = rotation_matrix(anim.axis, anim.rate * frame)
    pivot = np.asarray(anim.pivot, dtype=np.float64)
    pos = (mesh.tri_pos - pivot) @ rot.T + pivot
    nrm = mesh.tri_norm @ rot.T
    return Mesh(pos, mesh.tri_uv, nrm, mesh.tri_mat, mesh.materials, mesh.has_uv)
