"""Display geometry: panel/lenticular parameters, view cameras, subpixel phases.

The display model maps panel subpixels to view indices through the slanted
lens sheet, and builds the shared-focal-plane camera array the renderers use.
All cameras sit on a horizontal line and look down -z with off-axis frusta
that share one zero-parallax rectangle at z=0, so a focal-plane point lands on
the same normalized image position in every view.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

# Display config file schema: key -> converter. Files are plain text,
# one `key = value` per line, '#' starts a comment.
_CFG_SCHEMA = {
    "panel_width_px": int,
    "panel_height_px": int,
    "screen_width_mm": float,
    "screen_height_mm": float,
    "lens_width_mm": float,
    "pixel_pitch_mm": float,
    "subpixel_pitch_mm": float,
    "lens_tilt_deg": float,
    "lens_count": float,
    "view_count": int,
    "view_width_px": int,
    "view_height_px": int,
    "viewing_distance_mm": float,
    "eye_span_mm": float,
}


@dataclass
class LfdConfig:
    """Physical and logical parameters of one lenticular display."""

    panel_width_px: int
    panel_height_px: int
    screen_width_mm: float
    screen_height_mm: float
    lens_width_mm: float
    pixel_pitch_mm: float
    subpixel_pitch_mm: float
    lens_tilt_deg: float
    lens_count: float  # effective count; fractional by calibration
    view_count: int
    view_width_px: int
    view_height_px: int
    viewing_distance_mm: float
    eye_span_mm: float

    def __post_init__(self):
        self.validate()

    def validate(self):
        if min(self.panel_width_px, self.panel_height_px, self.view_count,
               self.view_width_px, self.view_height_px) <= 0:
            raise ValueError("pixel counts and view count must be positive")
        for name in ("screen_width_mm", "screen_height_mm", "lens_width_mm",
                     "pixel_pitch_mm", "subpixel_pitch_mm",
                     "viewing_distance_mm"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.eye_span_mm < 0:
            raise ValueError("eye_span_mm must be non-negative")
        if not math.isclose(3.0 * self.subpixel_pitch_mm, self.pixel_pitch_mm,
                            rel_tol=1e-6):
            raise ValueError("pixel pitch must equal 3x subpixel pitch (RGB stripes)")
        if abs(self.lens_count * self.lens_width_mm - self.screen_width_mm) \
                > 0.01 * self.screen_width_mm:
            raise ValueError("lens_count * lens_width must match screen width within 1%")

    @property
    def subpixels_per_lens(self):
        """Horizontal subpixels under one lens at the panel (may be fractional)."""
        return (self.screen_width_mm / self.lens_count) / self.subpixel_pitch_mm

    @property
    def lens_tilt_rad(self):
        return math.radians(self.lens_tilt_deg)

    @classmethod
    def from_file(cls, path):
        values = {}
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ValueError(f"{path}:{lineno}: expected 'key = value'")
                key, val = (s.strip() for s in line.split("=", 1))
                if key not in _CFG_SCHEMA:
                    raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
                values[key] = _CFG_SCHEMA[key](val)
        missing = sorted(set(_CFG_SCHEMA) - set(values))
        if missing:
            raise ValueError(f"{path}: missing keys: {', '.join(missing)}")
        return cls(**values)

    def to_file(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("# lenticular display configuration\n")
            for key in _CFG_SCHEMA:
                val = getattr(self, key)
                fh.write(f"{key} = {val}\n")

    def with_overrides(self, view_count=None, view_res=None):
        cfg = self
        if view_count is not None:
            cfg = replace(cfg, view_count=int(view_count))
        if view_res is not None:
            w, h = view_res
            cfg = replace(cfg, view_width_px=int(w), view_height_px=int(h))
        return cfg


def subpixel_view_phase(cfg, x_sub, y_pix):
    """Lens phase u in [0,1) for panel subpixel column x_sub on pixel row y_pix.

    The slant is expressed as a per-row shift of the subpixel grid against the
    lens pitch: u = frac((x_sub - tan(tilt) * y * pixel/subpixel) / L_sub).
    Accepts scalars or arrays.
    """
    x_sub = np.asarray(x_sub, dtype=np.float64)
    y_pix = np.asarray(y_pix, dtype=np.float64)
    ratio = cfg.pixel_pitch_mm / cfg.subpixel_pitch_mm
    l_sub = cfg.subpixels_per_lens
    t = (x_sub - math.tan(cfg.lens_tilt_rad) * y_pix * ratio) / l_sub
    return t - np.floor(t)


def subpixel_to_view(cfg, x_sub, y_pix, view_count=None):
    """View index for each panel subpixel: v = floor(u * V), clamped to V-1."""
    v_count = cfg.view_count if view_count is None else int(view_count)
    u = subpixel_view_phase(cfg, x_sub, y_pix)
    v = np.floor(u * v_count).astype(np.int64)
    return np.minimum(v, v_count - 1)


@dataclass
class SceneFraming:
    """World-space viewing geometry: focal rectangle at z=0, eyes at z=dist."""

    focal_w: float
    focal_h: float
    distance: float
    span: float
    near: float
    far: float


def frame_scene(cfg, bbox_min, bbox_max, margin=1.10):
    """Fit the focal rectangle to a scene bounding box.

    The focal rectangle is centered at the origin in the z=0 plane and sized
    to contain the box's x/y extent at the view aspect; viewing distance and
    eye span scale from the display's physical values by similar triangles.
    """
    bbox_min = np.asarray(bbox_min, dtype=np.float64)
    bbox_max = np.asarray(bbox_max, dtype=np.float64)
    ext = np.maximum(bbox_max - bbox_min, 1e-9)
    aspect = cfg.view_width_px / cfg.view_height_px
    focal_w = margin * max(ext[0], ext[1] * aspect)
    focal_h = focal_w / aspect
    scale = focal_w / cfg.screen_width_mm
    distance = cfg.viewing_distance_mm * scale
    span = cfg.eye_span_mm * scale
    near = 0.05 * distance
    depth_back = distance - float(bbox_min[2])
    far = max(1.5 * depth_back, 2.0 * near)
    return SceneFraming(focal_w=focal_w, focal_h=focal_h, distance=distance,
                        span=span, near=near, far=far)


@dataclass
class ViewCamera:
    """One off-axis view: eye at (ex, 0, d) looking -z at the z=0 focal rect."""

    ex: float
    d: float
    fw: float
    fh: float
    near: float
    far: float
    width: int
    height: int
    phase: float = 0.5  # lens-phase center of this view in [0,1)
    index: int = 0

    @property
    def eye(self):
        return np.array([self.ex, 0.0, self.d])

    @property
    def shear(self):
        """Horizontal frustum shear (off-axis offset over distance)."""
        return self.ex / self.d

    def project(self, pts):
        """World points (N,3) -> (sx, sy, zv): screen pixels (y down), view depth."""
        pts = np.asarray(pts, dtype=np.float64).reshape(-1, 3)
        zv = self.d - pts[:, 2]
        ndc_x = (self.d * pts[:, 0] - self.ex * pts[:, 2]) * (2.0 / self.fw) / zv
        ndc_y = (self.d * pts[:, 1]) * (2.0 / self.fh) / zv
        sx = (ndc_x + 1.0) * 0.5 * self.width
        sy = (1.0 - ndc_y) * 0.5 * self.height
        return sx, sy, zv

    def unproject_to_plane(self, sx, sy, plane_n, plane_c):
        """Intersect pixel rays (screen coords) with plane n.X = c -> (N,3) points."""
        sx = np.atleast_1d(np.asarray(sx, dtype=np.float64))
        sy = np.atleast_1d(np.asarray(sy, dtype=np.float64))
        ndc_x = 2.0 * sx / self.width - 1.0
        ndc_y = 1.0 - 2.0 * sy / self.height
        focal = np.stack([ndc_x * self.fw * 0.5, ndc_y * self.fh * 0.5,
                          np.zeros_like(ndc_x)], axis=-1)
        eye = self.eye
        direc = focal - eye
        denom = direc @ np.asarray(plane_n, dtype=np.float64)
        denom = np.where(np.abs(denom) < 1e-300, 1e-300, denom)
        t = (plane_c - eye @ np.asarray(plane_n, dtype=np.float64)) / denom
        return eye + t[..., None] * direc

    def frustum_planes(self):
        """Six planes (a,b,c,k); a point p is inside when a*px+b*py+c*pz+k >= 0."""
        ex, d, fw, fh = self.ex, self.d, self.fw, self.fh
        return np.array([
            [d, 0.0, -(fw * 0.5 + ex), d * fw * 0.5],    # left
            [-d, 0.0, ex - fw * 0.5, d * fw * 0.5],      # right
            [0.0, d, -fh * 0.5, d * fh * 0.5],           # bottom
            [0.0, -d, -fh * 0.5, d * fh * 0.5],          # top
            [0.0, 0.0, -1.0, d - self.near],             # near
            [0.0, 0.0, 1.0, self.far - d],               # far
        ])


def view_positions(view_count, span):
    """Eye x positions: fencepost spacing span/(V-1), single view centered."""
    if view_count == 1:
        return np.zeros(1)
    step = span / (view_count - 1)
    return -span * 0.5 + step * np.arange(view_count)


def build_view_array(cfg, framing, view_count=None, width=None, height=None):
    """Uniform camera array across the eye span, one camera per view."""
    v_count = cfg.view_count if view_count is None else int(view_count)
    width = cfg.view_width_px if width is None else int(width)
    height = cfg.view_height_px if height is None else int(height)
    xs = view_positions(v_count, framing.span)
    cams = []
    for v in range(v_count):
        cams.append(ViewCamera(
            ex=float(xs[v]), d=framing.distance, fw=framing.focal_w,
            fh=framing.focal_h, near=framing.near, far=framing.far,
            width=width, height=height, phase=(v + 0.5) / v_count, index=v))
    return cams


def build_jittered_view_array(cfg, framing, factor, seed, width=None, height=None):
    """Angularly supersampled array: `factor` cameras per view interval.

    Phases are drawn uniformly inside each interval from a counter-based
    stream keyed by (seed, interval, slot), then sorted, so the array is
    reproducible and independent of construction order.
    """
    from .kernels import common as kc

    v_count = cfg.view_count
    total = v_count * factor
    phases = np.empty(total)
    for i in range(v_count):
        for s in range(factor):
            xi = kc.rng_uniform_py(seed, 0x4A177E5, i, s)
            phases[i * factor + s] = (i + xi) / v_count
    phases.sort()
    width = cfg.view_width_px if width is None else int(width)
    height = cfg.view_height_px if height is None else int(height)
    cams = []
    for k, p in enumerate(phases):
        # same phase->eye map the uniform array induces
        if v_count == 1:
            ex = 0.0
        else:
            ex = -framing.span * 0.5 + (p * v_count - 0.5) * framing.span / (v_count - 1)
        cams.append(ViewCamera(
            ex=float(ex), d=framing.distance, fw=framing.focal_w,
            fh=framing.focal_h, near=framing.near, far=framing.far,
            width=width, height=height, phase=float(p), index=k))
    return cams


def camera_phases(cams):
    return np.array([c.phase for c in cams])
