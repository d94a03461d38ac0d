"""Shared builders for the test suite: tiny cameras, meshes, displays."""

import numpy as np

from lfdrender import lfd_model
from lfdrender.scene import Material, mesh_from_soup


def simple_cams(n=3, d=4.0, fw=2.0, fh=2.0, near=0.1, far=10.0,
                width=256, height=256, span=1.0):
    """Small hand-built view array looking down -z at the z=0 plane."""
    xs = lfd_model.view_positions(n, span)
    return [lfd_model.ViewCamera(ex=float(xs[i]), d=d, fw=fw, fh=fh,
                                 near=near, far=far, width=width,
                                 height=height, phase=(i + 0.5) / n, index=i)
            for i in range(n)]


def quad_soup(half_w=1.0, half_h=1.0, z=0.0, uv_max=1.0):
    """Two CCW triangles tiling [-half_w, half_w] x [-half_h, half_h] at z.

    Returns (pos (2,3,3), uv (2,3,2)); the face normal points +z.
    """
    a = (-half_w, -half_h, z)
    b = (half_w, -half_h, z)
    c = (half_w, half_h, z)
    d = (-half_w, half_h, z)
    pos = np.array([[a, b, c], [a, c, d]], dtype=np.float64)
    uv = np.array([[(0, 0), (uv_max, 0), (uv_max, uv_max)],
                   [(0, 0), (uv_max, uv_max), (0, uv_max)]], dtype=np.float64)
    return pos, uv


def flat_material(albedo=(1.0, 1.0, 1.0), rough=0.7, metal=0.0, ao=1.0,
                  textures=None):
    m = Material(name="test")
    m.scalars = m.scalars.copy()
    m.scalars[0:3] = albedo
    m.scalars[6] = rough
    m.scalars[7] = metal
    m.scalars[8] = ao
    m.textures = dict(textures or {})
    return m


def quad_mesh(half_w=1.0, half_h=1.0, z=0.0, uv_max=1.0, material=None):
    pos, uv = quad_soup(half_w, half_h, z, uv_max)
    mat = material if material is not None else flat_material()
    return mesh_from_soup(pos, uv, materials=[mat])


def ambient_shading(ambient=0.4):
    """Shading vector whose light faces away from +z surfaces.

    Surfaces with normals in the +z hemisphere receive only the ambient
    term, so expected colors are closed-form: ambient * ao * albedo.
    """
    return np.array([0.0, 0.0, -1.0, 1.0, 1.0, 1.0,
                     ambient, ambient, ambient], dtype=np.float64)


def constant_texture(value=1.0, size=4, channels=3):
    return np.full((size, size, channels), value, dtype=np.float32)


def checker_array(size=256, tiles=8, lo=0.0, hi=1.0):
    """Axis-aligned checkerboard texture in [lo, hi], float32 (size,size,3)."""
    idx = np.arange(size) * tiles // size
    cells = (idx[:, None] + idx[None, :]) % 2
    img = np.where(cells == 0, lo, hi).astype(np.float32)
    return np.repeat(img[:, :, None], 3, axis=2)


def straight_display(view_count=12, panel=(960, 540), view=(240, 135)):
    """Untilted display whose lens pitch is exactly 12 subpixels."""
    return lfd_model.LfdConfig(
        panel_width_px=panel[0], panel_height_px=panel[1],
        screen_width_mm=panel[0] * 0.09, screen_height_mm=panel[1] * 0.09,
        lens_width_mm=0.36, pixel_pitch_mm=0.09, subpixel_pitch_mm=0.03,
        lens_tilt_deg=0.0, lens_count=panel[0] * 0.09 / 0.36,
        view_count=view_count, view_width_px=view[0], view_height_px=view[1],
        viewing_distance_mm=600.0, eye_span_mm=300.0)


def halfplane_mask(cam, tri):
    """Oracle pixel coverage of one world triangle: three half-plane tests
    with the rasterizer's tie rule (top/left edges own exact-boundary pixels).
    """
    sx, sy, _ = cam.project(np.asarray(tri, dtype=np.float64))
    area2 = (sx[1] - sx[0]) * (sy[2] - sy[0]) \
        - (sy[1] - sy[0]) * (sx[2] - sx[0])
    if area2 == 0.0:
        return np.zeros((cam.height, cam.width), dtype=bool)
    if area2 < 0.0:
        sx = sx[[0, 2, 1]]
        sy = sy[[0, 2, 1]]
    pcx = (np.arange(cam.width, dtype=np.float64) + 0.5)[None, :]
    pcy = (np.arange(cam.height, dtype=np.float64) + 0.5)[:, None]
    mask = np.ones((cam.height, cam.width), dtype=bool)
    for i in range(3):
        j = (i + 1) % 3
        dx = sx[j] - sx[i]
        dy = sy[j] - sy[i]
        e = -dy * pcx + dx * pcy + (dy * sx[i] - dx * sy[i])
        mask &= (e > 0.0) | ((e == 0.0) & ((dy < 0.0)
                                           | ((dy == 0.0) & (dx > 0.0))))
    return mask


def random_triangle_mesh(n_tris, seed, center_scale=0.8, edge_scale=0.25,
                         z_range=0.5, material=None):
    """Soup of n_tris small random triangles near the focal plane."""
    rng = np.random.default_rng(seed)
    centers = rng.uniform(-center_scale, center_scale, size=(n_tris, 1, 3))
    centers[:, :, 2] = rng.uniform(-z_range, z_range, size=(n_tris, 1))
    offs = rng.uniform(-edge_scale, edge_scale, size=(n_tris, 3, 3))
    pos = centers + offs
    uv = rng.uniform(0.0, 1.0, size=(n_tris, 3, 2))
    mat = material if material is not None else flat_material(
        textures={"albedo": checker_array(64, 8, lo=0.25, hi=0.9)})
    return mesh_from_soup(pos, uv, materials=[mat])
