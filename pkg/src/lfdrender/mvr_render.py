"""Reference multi-view triangle rasterizer.

Rasterizes every triangle into every view buffer with perspective-correct
attributes, per-pixel texture fetches through the mip pyramid (optionally
anisotropic, probed along the major screen-space footprint axis), and the
same packed depth/color words and shading model as the point renderer.
Serves as the comparison baseline: no geometry is shared across views, so
its cost scales with triangle count times view count.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import backend
from .kernels import common as kc
from .splat_render import ViewBuffer


@dataclass
class RasterStats:
    """Work counters for one multi-view render."""

    views: int = 0
    triangles: int = 0
    triangles_submitted: int = 0  # triangles x views
    extra: dict = field(default_factory=dict)


def render_views(mesh, cams, atlas, shading=None, workers=1, aniso=1):
    """Rasterize `mesh` into one ViewBuffer per camera.

    aniso : texture filter probes per pixel (1 = plain trilinear).
    Returns (buffers, RasterStats).
    """
    kern = backend.kernels()
    if shading is None:
        shading = kc.default_shading()
    shading = np.ascontiguousarray(np.asarray(shading, dtype=np.float64))
    if shading.shape != (9,):
        raise ValueError("shading must be a 9-vector")

    tverts = np.ascontiguousarray(mesh.tri_pos, dtype=np.float64)
    tuv = np.ascontiguousarray(mesh.tri_uv, dtype=np.float64)
    tnrm = np.ascontiguousarray(mesh.tri_norm, dtype=np.float64)
    tan, bit = mesh.tangent_frames()
    ttan = np.ascontiguousarray(tan, dtype=np.float64)
    tbit = np.ascontiguousarray(bit, dtype=np.float64)
    tmat = np.ascontiguousarray(mesh.tri_mat, dtype=np.int64)
    (data, lvl_ptr, lvl_off, lvl_w, lvl_h,
     tex_chan, mat_tex, mat_scalar) = atlas.kernel_tables()

    buffers = [ViewBuffer.allocate(cam.width, cam.height) for cam in cams]

    def fill(i):
        cam = cams[i]
        kern.rasterize_view(
            buffers[i].words, tverts, tuv, tnrm, ttan, tbit, tmat,
            data, lvl_ptr, lvl_off, lvl_w, lvl_h, tex_chan,
            mat_tex, mat_scalar,
            float(cam.ex), float(cam.d), float(cam.fw), float(cam.fh),
            float(cam.near), float(cam.far), shading, int(aniso))
        return i

    if workers <= 1 or len(cams) <= 1:
        for i in range(len(cams)):
            fill(i)
    else:
        with ThreadPoolExecutor(max_workers=int(workers)) as pool:
            list(pool.map(fill, range(len(cams))))

    stats = RasterStats(
        views=len(cams), triangles=mesh.n_tris,
        triangles_submitted=mesh.n_tris * len(cams))
    return buffers, stats
