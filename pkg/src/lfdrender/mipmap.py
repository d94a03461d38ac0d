"""Mip pyramids and the packed texture atlas the kernels sample from.

Pyramids use a 2x2 box filter with edge duplication on odd dimensions and
halve each level down to 1x1. Sampling is trilinear (bilinear within a level,
linear across adjacent levels) with repeat wrap on both axes; texel centers
sit at (i+0.5)/w. The atlas flattens every pyramid level of every texture
into one float32 buffer plus index tables so the jit kernels can fetch
without Python objects.
"""

import math
from dataclasses import dataclass

import numpy as np

from .kernels import common as kc


def level_count(width, height):
    """1 + floor(log2(max(w,h))): enough levels to reach 1x1."""
    return 1 + int(math.floor(math.log2(max(width, height))))


def _box_half(img):
    """One box-filtered level: pad odd dims by edge duplication, 2x2 mean."""
    h, w, c = img.shape
    if h > 1 and h % 2:
        img = np.concatenate([img, img[-1:]], axis=0)
        h += 1
    if w > 1 and w % 2:
        img = np.concatenate([img, img[:, -1:]], axis=1)
        w += 1
    nh, nw = max(1, h // 2), max(1, w // 2)
    if h == 1:
        out = img.reshape(1, nw, 2, c).mean(axis=2)
    elif w == 1:
        out = img.reshape(nh, 2, 1, c).mean(axis=1)
    else:
        out = img.reshape(nh, 2, nw, 2, c).mean(axis=(1, 3))
    return out.astype(np.float32)


def build_pyramid(image):
    """List of float32 (h,w,c) levels, base first, final level 1x1."""
    img = np.asarray(image, dtype=np.float32)
    if img.ndim == 2:
        img = img[:, :, None]
    levels = [img]
    n = level_count(img.shape[1], img.shape[0])
    for _ in range(n - 1):
        levels.append(_box_half(levels[-1]))
    assert levels[-1].shape[:2] == (1, 1)
    return levels


def sample_bilinear(level, u, v):
    """Bilinear fetch with repeat wrap; u, v arrays broadcast together."""
    h, w, _ = level.shape
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    fx = u * w - 0.5
    fy = v * h - 0.5
    x0 = np.floor(fx)
    y0 = np.floor(fy)
    tx = fx - x0
    ty = fy - y0
    x0 = x0.astype(np.int64) % w
    y0 = y0.astype(np.int64) % h
    x1 = (x0 + 1) % w
    y1 = (y0 + 1) % h
    c00 = level[y0, x0].astype(np.float64)
    c10 = level[y0, x1].astype(np.float64)
    c01 = level[y1, x0].astype(np.float64)
    c11 = level[y1, x1].astype(np.float64)
    top = c00 + (c10 - c00) * tx[..., None]
    bot = c01 + (c11 - c01) * tx[..., None]
    return top + (bot - top) * ty[..., None]


def sample_trilinear(pyramid, u, v, lod):
    """Trilinear fetch: lod clamped to [0, levels-1], linear between levels."""
    n = len(pyramid)
    lod = np.clip(np.asarray(lod, dtype=np.float64), 0.0, n - 1.0)
    l0 = np.floor(lod).astype(np.int64)
    l1 = np.minimum(l0 + 1, n - 1)
    f = lod - l0
    if np.ndim(f) == 0:
        a = sample_bilinear(pyramid[int(l0)], u, v)
        b = sample_bilinear(pyramid[int(l1)], u, v)
        return a + (b - a) * float(f)
    out = None
    for lev in np.unique(np.stack([l0, l1])):
        pick0 = l0 == lev
        pick1 = l1 == lev
        val = sample_bilinear(pyramid[int(lev)], u, v)
        if out is None:
            out = np.zeros(val.shape, dtype=np.float64)
        out[pick0] += val[pick0] * (1.0 - f[pick0, None])
        out[pick1] += val[pick1] * f[pick1, None]
    return out


@dataclass
class TextureAtlas:
    """Flattened pyramids + per-material tables, ready for the kernels.

    data: all levels of all textures, row-major, channel-interleaved.
    For texture t, levels occupy rows lvl_ptr[t] .. lvl_ptr[t+1] of the
    per-level tables. mat_tex holds a texture id per material slot (-1 when
    the slot is scalar-only); mat_scalar holds the 9 channel factors that
    multiply fetched texels (or stand in for them when there is no texture).
    """

    data: np.ndarray       # (total_texels*channels,) float32
    lvl_ptr: np.ndarray    # (n_tex+1,) int64
    lvl_off: np.ndarray    # (n_levels_total,) int64 offsets into data
    lvl_w: np.ndarray      # (n_levels_total,) int32
    lvl_h: np.ndarray      # (n_levels_total,) int32
    tex_chan: np.ndarray   # (n_tex,) int32
    mat_tex: np.ndarray    # (n_mat, 5) int32 texture id or -1 per slot
    mat_scalar: np.ndarray  # (n_mat, 9) float32
    pyramids: list         # python-side pyramids, same texture ids

    def texture_size(self, tex_id):
        p = int(self.lvl_ptr[tex_id])
        return int(self.lvl_w[p]), int(self.lvl_h[p])

    def texture_levels(self, tex_id):
        return int(self.lvl_ptr[tex_id + 1] - self.lvl_ptr[tex_id])

    def kernel_tables(self):
        """Arrays in the dtypes the render kernels take, converted once."""
        if not hasattr(self, "_ktables"):
            self._ktables = (
                np.ascontiguousarray(self.data, dtype=np.float32),
                self.lvl_ptr.astype(np.int64),
                self.lvl_off.astype(np.int64),
                self.lvl_w.astype(np.int64),
                self.lvl_h.astype(np.int64),
                self.tex_chan.astype(np.int64),
                self.mat_tex.astype(np.int64),
                self.mat_scalar.astype(np.float64),
            )
        return self._ktables


def build_atlas(materials):
    """Pack the materials' textures (by slot) into one atlas.

    `materials` is a sequence of objects with `.scalars` (9 float) and
    `.textures` (dict slot-name -> float32 image in [0,1] or None).
    """
    slot_names = ("albedo", "normal", "roughness", "metallic", "ao")
    pyramids = []
    chunks = []
    lvl_off, lvl_w, lvl_h, lvl_ptr, tex_chan = [], [], [], [0], []
    mat_tex = np.full((max(len(materials), 1), kc.N_SLOTS), -1, dtype=np.int32)
    mat_scalar = np.zeros((max(len(materials), 1), kc.N_CHANNELS), dtype=np.float32)
    mat_scalar[:, kc.CH_NORMAL:kc.CH_NORMAL + 3] = (0.5, 0.5, 1.0)
    mat_scalar[:, kc.CH_AO] = 1.0
    offset = 0
    for m, mat in enumerate(materials):
        mat_scalar[m] = np.asarray(mat.scalars, dtype=np.float32)
        for s, name in enumerate(slot_names):
            img = mat.textures.get(name)
            if img is None:
                continue
            want = kc.SLOT_CHANNELS[s][1]
            img = np.asarray(img, dtype=np.float32)
            if img.ndim == 2:
                img = img[:, :, None]
            if img.shape[2] < want:
                img = np.repeat(img[:, :, :1], want, axis=2)
            img = img[:, :, :want]
            pyr = build_pyramid(img)
            tex_id = len(pyramids)
            pyramids.append(pyr)
            tex_chan.append(want)
            for lev in pyr:
                h, w, c = lev.shape
                lvl_off.append(offset)
                lvl_w.append(w)
                lvl_h.append(h)
                chunks.append(lev.reshape(-1))
                offset += h * w * c
            lvl_ptr.append(len(lvl_off))
            mat_tex[m, s] = tex_id
    data = np.concatenate(chunks) if chunks else np.zeros(1, dtype=np.float32)
    return TextureAtlas(
        data=data.astype(np.float32),
        lvl_ptr=np.asarray(lvl_ptr, dtype=np.int64),
        lvl_off=np.asarray(lvl_off, dtype=np.int64),
        lvl_w=np.asarray(lvl_w, dtype=np.int32),
        lvl_h=np.asarray(lvl_h, dtype=np.int32),
        tex_chan=np.asarray(tex_chan, dtype=np.int32),
        mat_tex=mat_tex,
        mat_scalar=mat_scalar,
        pyramids=pyramids,
    )
