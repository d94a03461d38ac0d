"""Multi-view point renderer: splats a frame's point cloud into view buffers.

Each view owns a packed 64-bit buffer word per pixel: the high 32 bits hold a
quantized view-space depth key and the low 32 bits the shaded RGBA8 color.
Splats combine with an atomic-free min reduction on the whole word, so the
result is independent of point submission order and views can be filled by
independent threads without locks.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import backend
from .kernels import common as kc


@dataclass
class ViewBuffer:
    """One view's packed depth/color target plus unpack helpers."""

    words: np.ndarray  # (H, W) uint64

    @classmethod
    def allocate(cls, width, height):
        words = np.full((int(height), int(width)), kc.CLEAR_WORD, dtype=np.uint64)
        return cls(words=words)

    @property
    def height(self):
        return self.words.shape[0]

    @property
    def width(self):
        return self.words.shape[1]

    def clear(self):
        self.words[...] = kc.CLEAR_WORD

    def coverage_mask(self):
        """(H, W) bool: pixels whose depth key was written by any primitive."""
        return (self.words >> np.uint64(32)) != np.uint64(0xFFFFFFFF)

    def rgba8(self, background=0):
        """(H, W, 4) uint8 color; uncovered pixels get `background` with alpha 0."""
        lo = self.words.astype(np.uint64)
        out = np.empty(self.words.shape + (4,), dtype=np.uint8)
        out[..., 0] = ((lo >> np.uint64(24)) & np.uint64(0xFF)).astype(np.uint8)
        out[..., 1] = ((lo >> np.uint64(16)) & np.uint64(0xFF)).astype(np.uint8)
        out[..., 2] = ((lo >> np.uint64(8)) & np.uint64(0xFF)).astype(np.uint8)
        out[..., 3] = (lo & np.uint64(0xFF)).astype(np.uint8)
        holes = ~self.coverage_mask()
        if np.any(holes):
            out[holes, 0] = background
            out[holes, 1] = background
            out[holes, 2] = background
            out[holes, 3] = 0
        return out

    def rgb8(self, background=0):
        """(H, W, 3) uint8 color with holes filled by `background`."""
        return self.rgba8(background=background)[..., :3]

    def depth01(self):
        """(H, W) float64 normalized depth in [0, 1]; holes read 1.0."""
        key = (self.words >> np.uint64(32)).astype(np.float64)
        return np.minimum(key / kc.DEPTH_KEY_MAX, 1.0)


def render_views(cloud, cams, shading=None, workers=1):
    """Splat `cloud` into one ViewBuffer per camera.

    cloud    : pointgen.SplatCloud for this frame's camera array
    cams     : list of lfd_model.ViewCamera
    shading  : optional 9-vector (light dir, light rgb, ambient rgb)
    workers  : views rendered concurrently (kernels release the GIL)
    """
    kern = backend.kernels()
    if shading is None:
        shading = kc.default_shading()
    shading = np.ascontiguousarray(np.asarray(shading, dtype=np.float64))
    if shading.shape != (9,):
        raise ValueError("shading must be a 9-vector")

    pos, tri, uv, nrm, band, tvmin, tvmax = cloud.render_arrays()
    tverts = np.ascontiguousarray(cloud.tri_verts, dtype=np.float64)
    tax = np.ascontiguousarray(cloud.tri_ax, dtype=np.float64)
    tay = np.ascontiguousarray(cloud.tri_ay, dtype=np.float64)
    text = np.ascontiguousarray(cloud.tri_ext, dtype=np.float64)
    tspuv = np.ascontiguousarray(cloud.tri_spuv, dtype=np.float64)
    ttan = np.ascontiguousarray(cloud.tri_tan, dtype=np.float64)
    tbit = np.ascontiguousarray(cloud.tri_bit, dtype=np.float64)

    buffers = [ViewBuffer.allocate(cam.width, cam.height) for cam in cams]

    def fill(i):
        cam = cams[i]
        kern.fill_view_splats(
            buffers[i].words, pos, tri, uv, nrm, band, tvmin, tvmax,
            tverts, tax, tay, text, tspuv, ttan, tbit,
            float(cam.ex), float(cam.d), float(cam.fw), float(cam.fh),
            float(cam.near), float(cam.far), shading)
        return i

    if workers <= 1 or len(cams) <= 1:
        for i in range(len(cams)):
            fill(i)
    else:
        with ThreadPoolExecutor(max_workers=int(workers)) as pool:
            list(pool.map(fill, range(len(cams))))
    return buffers


def render_frame_views(mesh, cams, atlas, shading=None, workers=1, mipmap=True):
    """Convenience: point generation plus splatting for one frame.

    Returns (buffers, cloud)."""
    from .pointgen import generate_points

    cloud = generate_points(mesh, cams, atlas, mipmap=mipmap)
    return render_views(cloud, cams, shading=shading, workers=workers), cloud
