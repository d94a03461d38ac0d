"""Bundled procedural scenes and texture synthesis.

Three scenes cover the pipeline's branches at desk scale:

  hall  — a corridor receding from the camera whose floor/walls carry a
          high-frequency tiled checker (strong minification gradient, the
          texture-filtering stress case), plus two interior boxes.
  rotor — an untextured multi-part machine (hub, angled blades, backplate)
          with significant depth complexity along the view axis.
  quad  — a single textured quad; the minimal loader/pipeline fixture.

Builders return in-memory meshes; `write_scene` serializes a scene as
OBJ + MTL + PNGs with a small JSON manifest carrying the animation, so the
CLI exercises the same loader path as external assets.
"""

from __future__ import annotations

import json
import os

import numpy as np
from PIL import Image

from . import scene as scene_mod
from .kernels import common as kc

SCENE_NAMES = ("hall", "rotor", "quad")


# ---------------------------------------------------------------------------
# texture synthesis (arrays use the loader's convention: row 0 = v=0)

def checker_texture(size=256, tiles=8, c0=(0.92, 0.91, 0.88),
                    c1=(0.18, 0.20, 0.24), line=0.05):
    """High-contrast checker with thin grid lines — an aliasing probe."""
    idx = np.arange(size)
    cell = idx * tiles // size
    board = (cell[:, None] + cell[None, :]) % 2
    img = np.where(board[..., None] == 0,
                   np.asarray(c0, dtype=np.float64),
                   np.asarray(c1, dtype=np.float64))
    edge = (idx * tiles) % size < max(1, size // 64)
    img[edge, :] = line
    img[:, edge] = line
    return img.astype(np.float32)


def stripe_texture(size=256, stripes=12, c0=(0.75, 0.72, 0.65),
                   c1=(0.35, 0.30, 0.28)):
    """Horizontal stripes (varies along v only)."""
    idx = np.arange(size)
    band = (idx * stripes // size) % 2
    img = np.where(band[:, None, None] == 0,
                   np.asarray(c0, dtype=np.float64),
                   np.asarray(c1, dtype=np.float64))
    return np.broadcast_to(img, (size, size, 3)).astype(np.float32)


def ripple_normal_texture(size=128, waves=5.0, amp=0.35):
    """Tangent-space normal map with a sinusoidal ripple, encoded [0,1]."""
    t = (np.arange(size) + 0.5) / size
    gx = amp * np.sin(2.0 * np.pi * waves * t)[None, :]
    gy = amp * np.cos(2.0 * np.pi * waves * t)[:, None]
    nx = np.broadcast_to(gx, (size, size))
    ny = np.broadcast_to(gy, (size, size))
    nz = np.sqrt(np.maximum(1.0 - nx * nx - ny * ny, 0.0))
    n = np.stack([nx, ny, nz], axis=-1)
    return ((n + 1.0) * 0.5).astype(np.float32)


def roughness_texture(size=128, tiles=4, lo=0.25, hi=0.85):
    """Checkered scalar roughness, (H, W, 1)."""
    idx = np.arange(size)
    cell = idx * tiles // size
    board = (cell[:, None] + cell[None, :]) % 2
    img = np.where(board == 0, hi, lo)
    return img[:, :, None].astype(np.float32)


# ---------------------------------------------------------------------------
# geometry helpers (triangle soup, CCW seen from the +normal side)

def _quad(corners, uv=None):
    """Two triangles from 4 corners (a, b, c, d) with matching uvs."""
    a, b, c, d = [np.asarray(p, dtype=np.float64) for p in corners]
    tris = [(a, b, c), (a, c, d)]
    if uv is None:
        uvt = [((0.0, 0.0),) * 3, ((0.0, 0.0),) * 3]
        has = False
    else:
        ua, ub, uc, ud = [np.asarray(p, dtype=np.float64) for p in uv]
        uvt = [(ua, ub, uc), (ua, uc, ud)]
        has = True
    return tris, uvt, has


class _SoupBuilder:
    """Accumulates triangle soup plus per-triangle material ids."""

    def __init__(self):
        self.pos, self.uv, self.mat, self.has_uv = [], [], [], []

    def add_quad(self, corners, uv, mat_id):
        tris, uvt, has = _quad(corners, uv)
        for t, u in zip(tris, uvt):
            self.pos.append(t)
            self.uv.append(u)
            self.mat.append(mat_id)
            self.has_uv.append(has)

    def add_box(self, center, half, mat_id, uv_tiles=0.0):
        cx, cy, cz = center
        hx, hy, hz = half
        lo = np.array([cx - hx, cy - hy, cz - hz])
        hi = np.array([cx + hx, cy + hy, cz + hz])
        # 8 corners: bit k of the index selects lo/hi on axis k
        p = [np.array([(hi if i & 1 else lo)[0],
                       (hi if i & 2 else lo)[1],
                       (hi if i & 4 else lo)[2]]) for i in range(8)]
        faces = [  # outward CCW quads
            (p[1], p[3], p[7], p[5]),  # +x
            (p[0], p[4], p[6], p[2]),  # -x
            (p[2], p[6], p[7], p[3]),  # +y
            (p[0], p[1], p[5], p[4]),  # -y
            (p[4], p[5], p[7], p[6]),  # +z
            (p[0], p[2], p[3], p[1]),  # -z
        ]
        for f in faces:
            uv = None
            if uv_tiles > 0.0:
                uv = [(0.0, 0.0), (uv_tiles, 0.0),
                      (uv_tiles, uv_tiles), (0.0, uv_tiles)]
            self.add_quad(f, uv, mat_id)

    def mesh(self, materials):
        return scene_mod.mesh_from_soup(
            np.asarray(self.pos), np.asarray(self.uv),
            tri_mat=np.asarray(self.mat, dtype=np.int32),
            materials=materials,
            has_uv=np.asarray(self.has_uv, dtype=bool))


def _material(name, albedo=(0.8, 0.8, 0.8), rough=0.8, metal=0.0,
              textures=None):
    m = scene_mod.Material(name=name)
    m.scalars = m.scalars.copy()
    m.scalars[0:3] = albedo
    m.scalars[kc.CH_ROUGH] = rough
    m.scalars[kc.CH_METAL] = metal
    m.textures = dict(textures or {})
    return m


# ---------------------------------------------------------------------------
# bundled scenes

def quad_scene(tex_size=256, tiles=8):
    """One textured unit quad facing +z at the origin."""
    mat = _material("checker", albedo=(1.0, 1.0, 1.0), rough=0.7,
                    textures={"albedo": checker_texture(tex_size, tiles)})
    b = _SoupBuilder()
    s = 1.0
    b.add_quad([(-s, -s, 0.0), (s, -s, 0.0), (s, s, 0.0), (-s, s, 0.0)],
               [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)], 0)
    mesh = b.mesh([mat])
    anim = scene_mod.Turntable(axis=(0.0, 1.0, 0.0), rate=0.01,
                               pivot=(0.0, 0.0, 0.0))
    return mesh, anim


def hall_scene(length=14.0, width=4.0, height=3.0, tiles_per_unit=1.25):
    """Corridor along -z with tiled floor/walls/ceiling and two boxes."""
    floor_mat = _material(
        "hall_floor", albedo=(1.0, 1.0, 1.0), rough=0.55,
        textures={"albedo": checker_texture(256, 8),
                  "normal": ripple_normal_texture(128),
                  "roughness": roughness_texture(128)})
    wall_mat = _material(
        "hall_wall", albedo=(1.0, 1.0, 1.0), rough=0.8,
        textures={"albedo": checker_texture(256, 6,
                                            c0=(0.85, 0.78, 0.62),
                                            c1=(0.42, 0.30, 0.22))})
    cap_mat = _material(
        "hall_cap", albedo=(1.0, 1.0, 1.0), rough=0.9,
        textures={"albedo": stripe_texture(256, 10)})
    box_mat = _material("hall_box", albedo=(0.20, 0.45, 0.85),
                        rough=0.35, metal=0.6)
    crate_mat = _material("hall_crate", albedo=(0.85, 0.35, 0.18),
                          rough=0.75, metal=0.0)
    mats = [floor_mat, wall_mat, cap_mat, box_mat, crate_mat]

    hw, hh = width * 0.5, height * 0.5
    z0, z1 = length * 0.5, -length * 0.5
    tz = tiles_per_unit * length
    tx = tiles_per_unit * width
    ty = tiles_per_unit * height
    b = _SoupBuilder()
    # floor (+y normal), ceiling (-y), side walls, back wall; u runs along z
    b.add_quad([(-hw, -hh, z0), (hw, -hh, z0), (hw, -hh, z1), (-hw, -hh, z1)],
               [(0, 0), (tx, 0), (tx, tz), (0, tz)], 0)
    b.add_quad([(-hw, hh, z1), (hw, hh, z1), (hw, hh, z0), (-hw, hh, z0)],
               [(0, 0), (tx, 0), (tx, tz), (0, tz)], 2)
    b.add_quad([(-hw, -hh, z1), (-hw, hh, z1), (-hw, hh, z0), (-hw, -hh, z0)],
               [(0, 0), (ty, 0), (ty, tz), (0, tz)], 1)
    b.add_quad([(hw, -hh, z0), (hw, hh, z0), (hw, hh, z1), (hw, -hh, z1)],
               [(0, 0), (ty, 0), (ty, tz), (0, tz)], 1)
    b.add_quad([(-hw, -hh, z1), (hw, -hh, z1), (hw, hh, z1), (-hw, hh, z1)],
               [(0, 0), (tx, 0), (tx, ty), (0, ty)], 1)
    # interior props
    b.add_box((-0.9, -hh + 0.45, -1.2), (0.45, 0.45, 0.45), 3)
    b.add_box((0.8, -hh + 0.3, -3.4), (0.3, 0.3, 0.3), 4)
    mesh = b.mesh(mats)
    anim = scene_mod.Turntable(axis=(0.0, 1.0, 0.0), rate=0.008,
                               pivot=(0.0, 0.0, 0.0))
    return mesh, anim


def rotor_scene(blades=9, radius=1.4, pitch_deg=38.0):
    """Untextured hub/blade/backplate assembly with deep overlap in z."""
    hub_mat = _material("rotor_hub", albedo=(0.55, 0.56, 0.60),
                        rough=0.45, metal=0.9)
    blade_mat = _material("rotor_blade", albedo=(0.75, 0.12, 0.10),
                          rough=0.35, metal=0.7)
    plate_mat = _material("rotor_plate", albedo=(0.12, 0.13, 0.15),
                          rough=0.85, metal=0.0)
    mats = [hub_mat, blade_mat, plate_mat]
    b = _SoupBuilder()
    b.add_box((0.0, 0.0, 0.0), (0.22, 0.22, 0.30), 0)

    pitch = np.radians(pitch_deg)
    blade_half = np.array([radius * 0.5 - 0.1, 0.16, 0.02])
    for k in range(blades):
        ang = 2.0 * np.pi * k / blades
        spin = scene_mod.rotation_matrix((0.0, 0.0, 1.0), ang)
        tilt = scene_mod.rotation_matrix((1.0, 0.0, 0.0), pitch)
        base = _SoupBuilder()
        base.add_box(((radius * 0.5 + 0.15), 0.0, 0.0), blade_half, 0)
        pos = np.asarray(base.pos)  # (12, 3, 3)
        pos = pos @ tilt.T @ spin.T
        for t in range(pos.shape[0]):
            b.pos.append(pos[t])
            b.uv.append(((0.0, 0.0),) * 3)
            b.mat.append(1)
            b.has_uv.append(False)
    # backplate: coarse disk behind the blades
    nseg = 24
    for k in range(nseg):
        a0 = 2.0 * np.pi * k / nseg
        a1 = 2.0 * np.pi * (k + 1) / nseg
        r = radius + 0.25
        zp = -0.55
        b.pos.append((np.array([0.0, 0.0, zp]),
                      np.array([r * np.cos(a0), r * np.sin(a0), zp]),
                      np.array([r * np.cos(a1), r * np.sin(a1), zp])))
        b.uv.append(((0.0, 0.0),) * 3)
        b.mat.append(2)
        b.has_uv.append(False)
    mesh = b.mesh(mats)
    anim = scene_mod.Turntable(axis=(0.0, 0.0, 1.0), rate=0.02,
                               pivot=(0.0, 0.0, 0.0))
    return mesh, anim


_BUILDERS = {"hall": hall_scene, "rotor": rotor_scene, "quad": quad_scene}


def build_scene(name):
    """(mesh, animation) for a bundled scene name."""
    if name not in _BUILDERS:
        raise ValueError(f"unknown scene {name!r}; choose from {SCENE_NAMES}")
    return _BUILDERS[name]()


# ---------------------------------------------------------------------------
# serialization: OBJ + MTL + PNG + JSON manifest

def _save_texture_png(path, img):
    """Save a float [0,1] texture; flips rows so reloading reproduces it."""
    arr = np.asarray(img)
    if arr.ndim == 3 and arr.shape[2] == 1:
        arr = arr[:, :, 0]
    q = np.clip(arr * 255.0 + 0.5, 0.0, 255.0).astype(np.uint8)
    Image.fromarray(q[::-1]).save(path)


_SLOT_MTL_KEY = {"albedo": "map_Kd", "normal": "norm",
                 "roughness": "map_Pr", "metallic": "map_Pm", "ao": "map_ao"}


def write_scene(name, out_dir):
    """Write a bundled scene as OBJ/MTL/PNG + manifest; returns manifest path."""
    mesh, anim = build_scene(name)
    os.makedirs(out_dir, exist_ok=True)
    mtl_name = f"{name}.mtl"
    obj_path = os.path.join(out_dir, f"{name}.obj")
    with open(os.path.join(out_dir, mtl_name), "w", encoding="utf-8") as fh:
        for mat in mesh.materials:
            fh.write(f"newmtl {mat.name}\n")
            kd = mat.scalars[0:3]
            fh.write(f"Kd {kd[0]:.6f} {kd[1]:.6f} {kd[2]:.6f}\n")
            fh.write(f"Pr {mat.scalars[kc.CH_ROUGH]:.6f}\n")
            fh.write(f"Pm {mat.scalars[kc.CH_METAL]:.6f}\n")
            for slot, key in _SLOT_MTL_KEY.items():
                img = mat.textures.get(slot)
                if img is None:
                    continue
                tex_file = f"{name}_{mat.name}_{slot}.png"
                _save_texture_png(os.path.join(out_dir, tex_file), img)
                fh.write(f"{key} {tex_file}\n")
            fh.write("\n")
    with open(obj_path, "w", encoding="utf-8") as fh:
        fh.write(f"mtllib {mtl_name}\n")
        normals = mesh.face_normals()
        vi = 1
        vti = 1
        cur_mat = -1
        for t in range(mesh.n_tris):
            m = int(mesh.tri_mat[t])
            if m != cur_mat:
                fh.write(f"usemtl {mesh.materials[m].name}\n")
                cur_mat = m
            for k in range(3):
                p = mesh.tri_pos[t, k]
                fh.write(f"v {p[0]:.9g} {p[1]:.9g} {p[2]:.9g}\n")
            if mesh.has_uv[t]:
                for k in range(3):
                    u = mesh.tri_uv[t, k]
                    fh.write(f"vt {u[0]:.9g} {u[1]:.9g}\n")
            n = normals[t]
            fh.write(f"vn {n[0]:.9g} {n[1]:.9g} {n[2]:.9g}\n")
            if mesh.has_uv[t]:
                fh.write(f"f {vi}/{vti}/-1 {vi + 1}/{vti + 1}/-1 "
                         f"{vi + 2}/{vti + 2}/-1\n")
                vti += 3
            else:
                fh.write(f"f {vi}//-1 {vi + 1}//-1 {vi + 2}//-1\n")
            vi += 3
    manifest = {
        "name": name,
        "obj": f"{name}.obj",
        "animation": {"axis": list(np.asarray(anim.axis, dtype=float)),
                      "rate": float(anim.rate)},
    }
    manifest_path = os.path.join(out_dir, f"{name}.scene.json")
    with open(manifest_path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
    return manifest_path


def load_scene_any(path):
    """Load a scene path: bundled name, .scene.json manifest, or bare .obj.

    Returns (mesh, animation); animation pivots on the mesh bbox center.
    """
    if path in _BUILDERS:
        mesh, anim = build_scene(path)
        return mesh, _center_animation(mesh, anim.axis, anim.rate)
    if path.endswith(".json"):
        with open(path, "r", encoding="utf-8") as fh:
            manifest = json.load(fh)
        base = os.path.dirname(path)
        mesh = scene_mod.load_obj(os.path.join(base, manifest["obj"]))
        a = manifest.get("animation", {})
        return mesh, _center_animation(mesh, tuple(a.get("axis", (0, 1, 0))),
                                       float(a.get("rate", 0.01)))
    mesh = scene_mod.load_obj(path)
    return mesh, _center_animation(mesh, (0.0, 1.0, 0.0), 0.01)


def _center_animation(mesh, axis, rate):
    lo, hi = mesh.bbox()
    pivot = tuple(0.5 * (np.asarray(lo) + np.asarray(hi)))
    return scene_mod.Turntable(axis=tuple(axis), rate=float(rate), pivot=pivot)
