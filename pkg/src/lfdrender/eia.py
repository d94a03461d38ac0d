"""Elemental image array construction for slanted-lenticular panels.

Interleaving routes every panel subpixel to a view through the lens-phase
mapping in `lfd_model`, optionally reconstructing with a truncated-Gaussian
filter jittered in screen space (diameter 2.25 view pixels) and in view
phase (support two view intervals), a fixed number of seeded samples per
subpixel. The inverse routing (`deinterleave`) exists for validation of the
direct mode and for phase audits.

All randomness is counter-based — (seed, subpixel, sample, dimension) — so
output is independent of row chunking and worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import backend, lfd_model
from .kernels import common as kc

RECON_MODES = ("none", "spatial", "view", "view_spatial")

_SQRT2 = math.sqrt(2.0)


@dataclass
class ReconstructionConfig:
    """Gaussian reconstruction settings for the interleave pass.

    mode               : none | spatial | view | view_spatial — which of the
                         two jitter dimensions (screen space, view phase) are
                         sampled; `none` is the direct nearest mapping.
    samples            : jittered samples per output subpixel.
    filter_diameter_px : spatial Gaussian filter diameter in view pixels
                         (sigma = diameter / 4).
    sigma_angular      : angular Gaussian sigma in view intervals (support is
                         clipped to one interval each side regardless).
    radius_sigmas      : truncation radius of both Gaussians, in sigmas.
    seed               : RNG seed; fully determines the sample pattern.
    """

    mode: str = "view_spatial"
    samples: int = 8
    filter_diameter_px: float = 2.25
    sigma_angular: float = 0.5
    radius_sigmas: float = 2.0
    seed: int = 0

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.mode not in RECON_MODES:
            raise ValueError(f"unknown reconstruction mode {self.mode!r}")
        if self.mode != "none" and self.samples < 1:
            raise ValueError("reconstruction needs at least one sample")
        if self.filter_diameter_px <= 0 or self.sigma_angular <= 0 \
                or self.radius_sigmas <= 0:
            raise ValueError("filter parameters must be positive")

    @property
    def sigma_spatial_px(self):
        return self.filter_diameter_px / 4.0


def as_view_stack(views):
    """Normalize a view collection to a (V, h, w, 3) uint8 array."""
    if isinstance(views, np.ndarray):
        stack = views
    else:
        frames = []
        for v in views:
            if isinstance(v, np.ndarray):
                frames.append(v)
            else:  # ViewBuffer
                frames.append(v.rgb8())
        stack = np.stack(frames, axis=0)
    if stack.ndim != 4 or stack.shape[3] != 3:
        raise ValueError("views must stack to (V, height, width, 3)")
    if stack.dtype != np.uint8:
        raise ValueError("views must be uint8 (quantized) images")
    return np.ascontiguousarray(stack)


def _phase_setup(cfg, n_views, phases, display_views):
    """Resolve (phases, uniform flag, display view count) for a view stack."""
    if phases is None:
        if display_views is not None and int(display_views) != n_views:
            raise ValueError("uniform interleave requires one view per display view")
        ph = (np.arange(n_views, dtype=np.float64) + 0.5) / n_views
        return np.ascontiguousarray(ph), 1, n_views
    ph = np.ascontiguousarray(np.asarray(phases, dtype=np.float64))
    if ph.shape != (n_views,):
        raise ValueError("phases must provide one value per view")
    if np.any(np.diff(ph) < 0.0):
        raise ValueError("phases must be sorted ascending")
    if np.any(ph < 0.0) or np.any(ph >= 1.0):
        raise ValueError("phases must lie in [0, 1)")
    n_display = int(display_views) if display_views is not None else int(cfg.view_count)
    return ph, 0, n_display


def _recon_scalars(recon, vw, vh):
    """Kernel scalar block for a reconstruction config and view raster size."""
    if recon is None or recon.mode == "none":
        return dict(n_samples=0, jit_space=0, jit_view=0,
                    sx_scale=0.0, sy_scale=0.0, clo_s=0.0, chi_s=1.0,
                    a_scale=0.0, clo_a=0.0, chi_a=1.0, seed=0)
    recon.validate()
    clo, chi = kc.trunc_gauss_cdf_bounds(1.0, recon.radius_sigmas)
    sig_px = recon.sigma_spatial_px
    return dict(
        n_samples=int(recon.samples),
        jit_space=1 if recon.mode in ("spatial", "view_spatial") else 0,
        jit_view=1 if recon.mode in ("view", "view_spatial") else 0,
        sx_scale=sig_px / vw * _SQRT2,
        sy_scale=sig_px / vh * _SQRT2,
        clo_s=clo, chi_s=chi,
        a_scale=recon.sigma_angular * _SQRT2,
        clo_a=clo, chi_a=chi,
        seed=int(recon.seed))


def _row_chunks(height, workers):
    if workers <= 1:
        return [(0, height)]
    step = max(1, (height + workers - 1) // workers)
    return [(y, min(y + step, height)) for y in range(0, height, step)]


def interleave(cfg, views, recon=None, phases=None, display_views=None,
               workers=1):
    """Build the panel subpixel image from a view stack.

    cfg           : lfd_model.LfdConfig
    views         : list of ViewBuffer / uint8 arrays, or (V, h, w, 3) uint8
    recon         : ReconstructionConfig or None (direct nearest mapping)
    phases        : per-view lens phases when the stack is not the display's
                    uniform array (angular supersampling); sorted in [0, 1)
    display_views : display view count defining the phase interval when
                    `phases` is given (defaults to cfg.view_count)
    Returns (panel_height, panel_width, 3) uint8.
    """
    stack = as_view_stack(views)
    n_views, vh, vw, _ = stack.shape
    if phases is None and n_views != cfg.view_count and display_views is None:
        raise ValueError(
            f"got {n_views} views for a {cfg.view_count}-view display; pass "
            "phases= for supersampled stacks or display_views= to override")
    ph, uniform, n_display = _phase_setup(cfg, n_views, phases, display_views)
    sc = _recon_scalars(recon, vw, vh)

    out = np.empty((cfg.panel_height_px, cfg.panel_width_px, 3), dtype=np.uint8)
    kern = backend.kernels()
    tan_tilt = math.tan(cfg.lens_tilt_rad)
    ratio = cfg.pixel_pitch_mm / cfg.subpixel_pitch_mm
    l_sub = cfg.subpixels_per_lens
    interval = 1.0 / n_display

    def run(span):
        y0, y1 = span
        kern.interleave_views(
            out, stack, ph, y0, y1, tan_tilt, ratio, l_sub,
            n_display, uniform,
            sc["n_samples"], sc["jit_space"], sc["jit_view"],
            sc["sx_scale"], sc["sy_scale"], sc["clo_s"], sc["chi_s"],
            sc["a_scale"], sc["clo_a"], sc["chi_a"], interval, sc["seed"])

    chunks = _row_chunks(cfg.panel_height_px, workers)
    if len(chunks) == 1:
        run(chunks[0])
    else:
        with ThreadPoolExecutor(max_workers=int(workers)) as pool:
            list(pool.map(run, chunks))
    return out


def interleave_weight_audit(cfg, view_size, recon=None, phases=None,
                            display_views=None, n_views=None, workers=1):
    """Per-subpixel sum of normalized sample weights (should be 1).

    view_size : (width, height) of the view raster the stack would have.
    n_views   : stack view count when `phases` is None (defaults to
                cfg.view_count).
    Returns (panel_height, panel_width, 3) float64.
    """
    vw, vh = int(view_size[0]), int(view_size[1])
    if n_views is None:
        n_views = len(phases) if phases is not None else cfg.view_count
    ph, uniform, n_display = _phase_setup(cfg, int(n_views), phases,
                                          display_views)
    sc = _recon_scalars(recon, vw, vh)
    out_w = np.empty((cfg.panel_height_px, cfg.panel_width_px, 3),
                     dtype=np.float64)
    kern = backend.kernels()
    tan_tilt = math.tan(cfg.lens_tilt_rad)
    ratio = cfg.pixel_pitch_mm / cfg.subpixel_pitch_mm
    l_sub = cfg.subpixels_per_lens
    interval = 1.0 / n_display

    def run(span):
        y0, y1 = span
        kern.interleave_weights(
            out_w, vh, vw, ph, y0, y1, tan_tilt, ratio, l_sub,
            n_display, uniform,
            sc["n_samples"], sc["jit_space"], sc["jit_view"],
            sc["sx_scale"], sc["sy_scale"], sc["clo_s"], sc["chi_s"],
            sc["a_scale"], sc["clo_a"], sc["chi_a"], interval, sc["seed"])

    chunks = _row_chunks(cfg.panel_height_px, workers)
    if len(chunks) == 1:
        run(chunks[0])
    else:
        with ThreadPoolExecutor(max_workers=int(workers)) as pool:
            list(pool.map(run, chunks))
    return out_w


def deinterleave(cfg, eia, view_count=None, view_size=None, recon=None):
    """Route panel subpixels back to (view, pixel) — inverse of direct mode.

    Only the direct (mode none) mapping is invertible; reconstruction modes
    are rejected. Returns (views, mask): views is (V, vh, vw, 3) uint8 and
    mask marks the positions that received at least one subpixel.
    """
    if recon is not None and recon.mode != "none":
        raise ValueError("only mode-none EIAs can be deinterleaved")
    eia = np.asarray(eia)
    h_p, w_p = cfg.panel_height_px, cfg.panel_width_px
    if eia.shape != (h_p, w_p, 3):
        raise ValueError("EIA shape does not match the display config")
    v_count = int(view_count) if view_count is not None else cfg.view_count
    if view_size is not None:
        vw, vh = int(view_size[0]), int(view_size[1])
    else:
        vw, vh = cfg.view_width_px, cfg.view_height_px
    wsub = w_p * 3

    views = np.zeros((v_count, vh, vw, 3), dtype=eia.dtype)
    mask = np.zeros((v_count, vh, vw, 3), dtype=bool)
    ys, xs = np.meshgrid(np.arange(h_p, dtype=np.int64),
                         np.arange(w_p, dtype=np.int64), indexing="ij")
    ny = (ys.astype(np.float64) + 0.5) / h_p
    py = np.minimum((ny * vh).astype(np.int64), vh - 1)
    for ch in range(3):
        xsub = xs * 3 + ch
        v = lfd_model.subpixel_to_view(cfg, xsub, ys, view_count=v_count)
        nx = (xsub.astype(np.float64) + 0.5) / wsub
        px = np.minimum((nx * vw).astype(np.int64), vw - 1)
        views[v, py, px, ch] = eia[..., ch]
        mask[v, py, px, ch] = True
    return views, mask


def view_assignment_counts(cfg, view_count=None):
    """Subpixels routed to each view by the direct mapping — (V,) int64."""
    v_count = int(view_count) if view_count is not None else cfg.view_count
    h_p, w_p = cfg.panel_height_px, cfg.panel_width_px
    counts = np.zeros(v_count, dtype=np.int64)
    ys, xs = np.meshgrid(np.arange(h_p, dtype=np.int64),
                         np.arange(w_p, dtype=np.int64), indexing="ij")
    for ch in range(3):
        v = lfd_model.subpixel_to_view(cfg, xs * 3 + ch, ys,
                                       view_count=v_count)
        counts += np.bincount(v.ravel(), minlength=v_count)
    return counts


def downsample_supersampled(views_2x):
    """Unweighted 2x2 block average, (V, 2h, 2w, 3) -> (V, h, w, 3).

    Accepts a single image (3D) or a stack (4D); uint8 inputs quantize back
    to uint8 (round half up), float inputs stay float64.
    """
    arr = np.asarray(views_2x)
    single = arr.ndim == 3
    if single:
        arr = arr[None]
    if arr.ndim != 4:
        raise ValueError("expected (V, h, w, c) or (h, w, c)")
    v, h, w, c = arr.shape
    if h % 2 or w % 2:
        raise ValueError("supersampled dimensions must be even")
    f = arr.astype(np.float64)
    mean = (f[:, 0::2, 0::2] + f[:, 0::2, 1::2]
            + f[:, 1::2, 0::2] + f[:, 1::2, 1::2]) * 0.25
    if arr.dtype == np.uint8:
        out = (mean + 0.5).astype(np.uint8)
    else:
        out = mean
    return out[0] if single else out


def gaussian_downsample(image, out_size, samples=32,
                        filter_diameter_px=2.25, radius_sigmas=2.0, seed=0):
    """Resample an image with a jittered truncated-Gaussian filter.

    image    : (H, W, 3) uint8
    out_size : (width, height) of the result; filter diameter is in output
               pixels.
    Used to bring the gold standard's high-resolution views down to the
    comparison raster with the same reconstruction filter the EIA pass uses.
    """
    src = np.ascontiguousarray(np.asarray(image))
    if src.dtype != np.uint8 or src.ndim != 3 or src.shape[2] != 3:
        raise ValueError("image must be (H, W, 3) uint8")
    wo, ho = int(out_size[0]), int(out_size[1])
    out = np.empty((ho, wo, 3), dtype=np.uint8)
    sig = filter_diameter_px / 4.0
    clo, chi = kc.trunc_gauss_cdf_bounds(1.0, radius_sigmas)
    kern = backend.kernels()
    kern.gauss_resample(out, src, int(samples),
                        sig / wo * _SQRT2, sig / ho * _SQRT2,
                        clo, chi, int(seed))
    return out
