"""Frame-specific splat point generation.

For each frame the triangles are probed in every view to find how densely the
screen samples them, that density is cut back to the texel density where the
texture cannot resolve more detail, and a sampling grid aligned to each
triangle's plane emits one shaded-attribute splat point per cell. Points carry
a prefetched texel level band so rendering never touches the textures again.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import backend
from .kernels import common as kc

# One emitted point: 80 bytes. Everything per-triangle (sampling frame,
# extents, tangent basis, material) lives in the cloud's sidecar instead,
# reached through `tri`.
RECORD_DTYPE = np.dtype([
    ("pos", "<f4", (3,)),
    ("tri", "<u4"),
    ("uv", "<f4", (2,)),
    ("normal", "<f4", (3,)),
    ("band", "<f4", (2,)),
    ("tvmin", "<f2", (9,)),
    ("tvmax", "<f2", (9,)),
])
assert RECORD_DTYPE.itemsize == 80

# splat half-extent in units of grid spacing: adjacent splats tile the
# sampling plane, overlapping by a relative margin so that pixel centers
# landing exactly on a tile boundary cannot fall between two splats when
# their projected edges disagree by an ulp; boundary-clamped emission seals
# the triangle edges the tiling cannot reach
SPLAT_EXTENT = 0.5 * (1.0 + 1e-6)

_MAX_CELLS_AXIS = 4096


def closest_point_on_triangle(a, b, c, p):
    """Closest point to p on each triangle (a, b, c); all (T,3), p (3,)."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    c = np.asarray(c, dtype=np.float64)
    p = np.asarray(p, dtype=np.float64)
    ab = b - a
    ac = c - a
    ap = p[None, :] - a
    d1 = np.einsum("ij,ij->i", ab, ap)
    d2 = np.einsum("ij,ij->i", ac, ap)
    bp = p[None, :] - b
    d3 = np.einsum("ij,ij->i", ab, bp)
    d4 = np.einsum("ij,ij->i", ac, bp)
    cp = p[None, :] - c
    d5 = np.einsum("ij,ij->i", ab, cp)
    d6 = np.einsum("ij,ij->i", ac, cp)
    vc = d1 * d4 - d3 * d2
    vb = d5 * d2 - d1 * d6
    va = d3 * d6 - d5 * d4

    out = np.empty_like(a)
    done = np.zeros(a.shape[0], dtype=bool)

    def take(m, val):
        m = m & ~done
        if m.any():
            out[m] = val[m] if val.ndim == 2 else val
            done[m] = True

    def safe_div(num, den):
        with np.errstate(divide="ignore", invalid="ignore"):
            return num / np.where(den != 0.0, den, 1.0)

    take((d1 <= 0.0) & (d2 <= 0.0), a)
    take((d3 >= 0.0) & (d4 <= d3), b)
    t = safe_div(d1, d1 - d3)
    take((vc <= 0.0) & (d1 >= 0.0) & (d3 <= 0.0), a + t[:, None] * ab)
    take((d6 >= 0.0) & (d5 <= d6), c)
    t = safe_div(d2, d2 - d6)
    take((vb <= 0.0) & (d2 >= 0.0) & (d6 <= 0.0), a + t[:, None] * ac)
    t = safe_div(d4 - d3, (d4 - d3) + (d5 - d6))
    take((va <= 0.0) & (d4 - d3 >= 0.0) & (d5 - d6 >= 0.0),
         b + t[:, None] * (c - b))
    den = va + vb + vc
    v = safe_div(vb, den)
    w = safe_div(vc, den)
    take(np.ones_like(done), a + v[:, None] * ab + w[:, None] * ac)
    return out


def align_frames(normals):
    """Rotation per triangle mapping its normal to (0,0,-1), then spinning
    about z so the projected world x-axis (world y when x is degenerate)
    lands on the frame's +x (+y) axis. Returns (T,3,3)."""
    n = np.asarray(normals, dtype=np.float64)
    t_count = n.shape[0]
    # rotate n onto f = (0,0,-1): axis = n x f = (-ny, nx, 0)
    kx = -n[:, 1]
    ky = n[:, 0]
    s = np.sqrt(kx * kx + ky * ky)
    cang = -n[:, 2]
    r1 = np.zeros((t_count, 3, 3))
    deg = s < 1e-12
    with np.errstate(divide="ignore", invalid="ignore"):
        ux = np.where(deg, 1.0, kx / np.where(deg, 1.0, s))
        uy = np.where(deg, 0.0, ky / np.where(deg, 1.0, s))
    # Rodrigues with axis (ux, uy, 0), sin = s, cos = cang
    one_c = 1.0 - cang
    r1[:, 0, 0] = cang + ux * ux * one_c
    r1[:, 0, 1] = ux * uy * one_c
    r1[:, 0, 2] = uy * s
    r1[:, 1, 0] = ux * uy * one_c
    r1[:, 1, 1] = cang + uy * uy * one_c
    r1[:, 1, 2] = -ux * s
    r1[:, 2, 0] = -uy * s
    r1[:, 2, 1] = ux * s
    r1[:, 2, 2] = cang
    # degenerate: n == -f -> identity; n == f -> half turn about x
    ident = np.eye(3)
    halfx = np.diag([1.0, -1.0, -1.0])
    r1[deg & (cang > 0.0)] = ident
    r1[deg & (cang <= 0.0)] = halfx

    tx = r1[:, :, 0]  # image of world x-axis
    pl = np.sqrt(tx[:, 0] * tx[:, 0] + tx[:, 1] * tx[:, 1])
    use_y = pl < 1e-6
    ty = r1[:, :, 1]
    phi_x = np.arctan2(tx[:, 1], tx[:, 0])
    phi_y = np.arctan2(ty[:, 1], ty[:, 0])
    alpha = np.where(use_y, 0.5 * math.pi - phi_y, -phi_x)
    ca = np.cos(alpha)
    sa = np.sin(alpha)
    r2 = np.zeros((t_count, 3, 3))
    r2[:, 0, 0] = ca
    r2[:, 0, 1] = -sa
    r2[:, 1, 0] = sa
    r2[:, 1, 1] = ca
    r2[:, 2, 2] = 1.0
    return np.einsum("tij,tjk->tik", r2, r1)


@dataclass
class TriangleSetup:
    """Per-triangle sampling state for one frame."""

    active: np.ndarray        # (T,) uint8
    v2d: np.ndarray           # (T,3,2) frame-plane vertex coords
    grid: np.ndarray          # (T,4) origin x, y and spacing x, y
    ncell: np.ndarray         # (T,2) int64 cells per axis
    cent: np.ndarray          # (T,3) centroids
    ax: np.ndarray            # (T,3) frame x axis in world
    ay: np.ndarray            # (T,3) frame y axis in world
    ext: np.ndarray           # (T,2) splat half extents (world)
    spuv: np.ndarray          # (T,) splat area in texture uv units
    uvr: np.ndarray           # (T,) uv area over world area
    band: np.ndarray          # (T,2) view-pixel uv-area band (min,max)
    lodmin: np.ndarray        # (T,5) per-slot lod at band min
    lodmax: np.ndarray        # (T,5)
    density: np.ndarray       # (T,2) final per-axis sampling density
    size_xy: np.ndarray       # (T,) finest view-pixel world area
    size_uv: np.ndarray       # (T,) world area per texel (0 untextured)
    reduced: np.ndarray       # (T,) bool, texel-density cut applied
    stats: dict = field(default_factory=dict)


def triangle_setup(mesh, cams, atlas, mipmap=True):
    """Probe every triangle in every view and lay out its sampling grid."""
    pos = mesh.tri_pos.astype(np.float64)
    t_count = pos.shape[0]
    n_views = len(cams)
    a = pos[:, 0]
    b = pos[:, 1]
    c = pos[:, 2]
    normals = mesh.face_normals()
    cent = pos.mean(axis=1)
    area_ws = mesh.world_areas()
    area_ts = mesh.uv_areas()
    plane_c = np.einsum("ij,ij->i", normals, a)

    inv_lh_max = np.zeros(t_count)
    inv_lv_max = np.zeros(t_count)
    size_xy = np.full(t_count, np.inf)
    band_lo = np.full(t_count, np.inf)
    band_hi = np.zeros(t_count)
    any_vis = np.zeros(t_count, dtype=bool)

    uvr = np.zeros(t_count)
    nz = area_ws > 0.0
    uvr[nz] = area_ts[nz] / area_ws[nz]

    for cam in cams:
        eye = cam.eye
        q = closest_point_on_triangle(a, b, c, eye)
        facing = np.einsum("ij,j->i", normals, eye) > plane_c
        planes = cam.frustum_planes()
        outside = np.zeros(t_count, dtype=bool)
        for pl in planes:
            dist = pos @ pl[:3] + pl[3]
            outside |= np.all(dist < 0.0, axis=1)
        zvq = cam.d - q[:, 2]
        # probe from the centroid when the closest point projects behind
        # the eye plane (triangle straddling the camera)
        use_cent = zvq <= cam.near
        qprobe = np.where(use_cent[:, None], cent, q)
        zvp = cam.d - qprobe[:, 2]
        vis = facing & ~outside & (zvp > cam.near)
        if not vis.any():
            continue
        sx, sy, _ = cam.project(qprobe)

        def plane_hit(sxa, sya):
            ndc_x = 2.0 * sxa / cam.width - 1.0
            ndc_y = 1.0 - 2.0 * sya / cam.height
            fx = ndc_x * cam.fw * 0.5
            fy = ndc_y * cam.fh * 0.5
            dirx = fx - eye[0]
            diry = fy - eye[1]
            dirz = 0.0 - eye[2]
            den = dirx * normals[:, 0] + diry * normals[:, 1] \
                + dirz * normals[:, 2]
            num = plane_c - (eye[0] * normals[:, 0] + eye[1] * normals[:, 1]
                             + eye[2] * normals[:, 2])
            with np.errstate(divide="ignore", invalid="ignore"):
                t = num / np.where(den != 0.0, den, 1.0)
            okp = (den != 0.0) & (t > 0.0) & np.isfinite(t)
            px = eye[0] + t * dirx
            py = eye[1] + t * diry
            pz = eye[2] + t * dirz
            return np.stack([px, py, pz], axis=1), okp

        pr, ok_r = plane_hit(sx + 0.5, sy)
        plf, ok_l = plane_hit(sx - 0.5, sy)
        pd, ok_d = plane_hit(sx, sy + 0.5)
        pu, ok_u = plane_hit(sx, sy - 0.5)
        dh = pr - plf
        dv = pd - pu
        l_h = np.sqrt(np.einsum("ij,ij->i", dh, dh))
        l_v = np.sqrt(np.einsum("ij,ij->i", dv, dv))
        bad_h = ~(ok_r & ok_l) | ~np.isfinite(l_h) | (l_h <= 0.0)
        bad_v = ~(ok_d & ok_u) | ~np.isfinite(l_v) | (l_v <= 0.0)
        l_h = np.where(bad_h, 1e12, np.minimum(l_h, 1e12))
        l_v = np.where(bad_v, 1e12, np.minimum(l_v, 1e12))

        inv_lh_max = np.where(vis, np.maximum(inv_lh_max, 1.0 / l_h),
                              inv_lh_max)
        inv_lv_max = np.where(vis, np.maximum(inv_lv_max, 1.0 / l_v),
                              inv_lv_max)
        pix_area = l_h * l_v
        size_xy = np.where(vis, np.minimum(size_xy, pix_area), size_xy)
        vp_uv = pix_area * uvr
        band_lo = np.where(vis, np.minimum(band_lo, vp_uv), band_lo)
        band_hi = np.where(vis, np.maximum(band_hi, vp_uv), band_hi)
        any_vis |= vis

    active = any_vis & (area_ws > 0.0)
    size_xy = np.where(np.isfinite(size_xy), size_xy, 0.0)
    band_lo = np.where(np.isfinite(band_lo), band_lo, 0.0)

    # texture-limited density: world area per texel of the busiest texture
    _, lvl_ptr, _, lvl_w, lvl_h, _, mat_tex, _ = atlas.kernel_tables()
    n_mat = mat_tex.shape[0]
    mat_texels = np.zeros(n_mat)
    mat_levels = np.ones((n_mat, kc.N_SLOTS))
    slot_texels = np.zeros((n_mat, kc.N_SLOTS))
    for m in range(n_mat):
        for s in range(kc.N_SLOTS):
            tex = int(mat_tex[m, s])
            if tex < 0:
                continue
            p0 = int(lvl_ptr[tex])
            texels = float(lvl_w[p0]) * float(lvl_h[p0])
            slot_texels[m, s] = texels
            mat_texels[m] = max(mat_texels[m], texels)
            mat_levels[m, s] = float(lvl_ptr[tex + 1] - lvl_ptr[tex])
    tmat = mesh.tri_mat.astype(np.int64)
    n_tex = area_ts * mat_texels[tmat]
    size_uv = np.zeros(t_count)
    has_tex = n_tex > 0.0
    size_uv[has_tex] = area_ws[has_tex] / n_tex[has_tex]

    dens_h = inv_lh_max.copy()
    dens_v = inv_lv_max.copy()
    reduced = has_tex & (size_uv > size_xy) & (size_xy > 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        fac = np.sqrt(np.where(reduced, size_xy / np.where(
            reduced, size_uv, 1.0), 1.0))
    dens_h = dens_h * fac
    dens_v = dens_v * fac

    # per-slot texel lod band from the view-pixel uv-area band
    lodmin = np.zeros((t_count, kc.N_SLOTS))
    lodmax = np.zeros((t_count, kc.N_SLOTS))
    if mipmap:
        for s in range(kc.N_SLOTS):
            texels = slot_texels[tmat, s]
            levels = mat_levels[tmat, s]
            has = texels > 0.0
            with np.errstate(divide="ignore", invalid="ignore"):
                lmin = 0.5 * np.log2(np.where(has, band_lo * texels, 1.0))
                lmax = 0.5 * np.log2(np.where(has, band_hi * texels, 1.0))
            lmin = np.where(np.isfinite(lmin), lmin, 0.0)
            lmax = np.where(np.isfinite(lmax), lmax, 0.0)
            top = np.maximum(levels - 1.0, 0.0)
            lodmin[:, s] = np.where(has, np.minimum(np.maximum(lmin, 0.0), top), 0.0)
            lodmax[:, s] = np.where(has, np.minimum(np.maximum(lmax, 0.0), top), 0.0)

    # sampling frame, plane coords, grid
    rot = align_frames(normals)
    axw = rot[:, 0, :]
    ayw = rot[:, 1, :]
    rel = pos - cent[:, None, :]
    v2d = np.einsum("tij,tvj->tvi", rot, rel)[:, :, :2]
    bb_min = v2d.min(axis=1)
    bb_max = v2d.max(axis=1)
    span = bb_max - bb_min
    with np.errstate(divide="ignore", invalid="ignore"):
        gx = np.where(dens_h > 0.0, 1.0 / np.where(dens_h > 0.0, dens_h, 1.0),
                      np.maximum(span[:, 0], 1.0))
        gy = np.where(dens_v > 0.0, 1.0 / np.where(dens_v > 0.0, dens_v, 1.0),
                      np.maximum(span[:, 1], 1.0))
    gx = np.maximum(gx, 1e-12)
    gy = np.maximum(gy, 1e-12)
    nx = np.ceil(span[:, 0] / gx).astype(np.int64)
    ny = np.ceil(span[:, 1] / gy).astype(np.int64)
    nx = np.minimum(np.maximum(nx, 1), _MAX_CELLS_AXIS)
    ny = np.minimum(np.maximum(ny, 1), _MAX_CELLS_AXIS)

    grid = np.stack([bb_min[:, 0], bb_min[:, 1], gx, gy], axis=1)
    ncell = np.stack([nx, ny], axis=1)
    ext = np.stack([gx * SPLAT_EXTENT, gy * SPLAT_EXTENT], axis=1)
    spuv = uvr * ((2.0 * ext[:, 0]) * (2.0 * ext[:, 1]))
    band = np.stack([band_lo, band_hi], axis=1)

    stats = {
        "n_triangles": int(t_count),
        "n_active": int(active.sum()),
        "n_reduced": int((reduced & active).sum()),
        "n_views": n_views,
    }
    return TriangleSetup(
        active=active.astype(np.uint8), v2d=np.ascontiguousarray(v2d),
        grid=grid, ncell=ncell, cent=cent, ax=np.ascontiguousarray(axw),
        ay=np.ascontiguousarray(ayw), ext=ext, spuv=spuv, uvr=uvr, band=band,
        lodmin=lodmin, lodmax=lodmax,
        density=np.stack([dens_h, dens_v], axis=1),
        size_xy=size_xy, size_uv=size_uv, reduced=reduced, stats=stats)


@dataclass
class SplatCloud:
    """Emitted points plus the per-triangle sidecar the renderer needs."""

    records: np.ndarray       # structured RECORD_DTYPE
    tri_verts: np.ndarray     # (T,3,3) float64
    tri_ax: np.ndarray        # (T,3)
    tri_ay: np.ndarray        # (T,3)
    tri_ext: np.ndarray       # (T,2)
    tri_spuv: np.ndarray      # (T,)
    tri_tan: np.ndarray       # (T,3)
    tri_bit: np.ndarray       # (T,3)
    tri_mat: np.ndarray       # (T,) int32
    counts: np.ndarray        # (T,) int64 points per triangle
    setup: TriangleSetup
    stats: dict = field(default_factory=dict)

    @property
    def n_points(self):
        return self.records.shape[0]

    def render_arrays(self):
        """Contiguous float64 views of the record fields for the kernels."""
        r = self.records
        return (
            np.ascontiguousarray(r["pos"].astype(np.float64)),
            np.ascontiguousarray(r["tri"].astype(np.int64)),
            np.ascontiguousarray(r["uv"].astype(np.float64)),
            np.ascontiguousarray(r["normal"].astype(np.float64)),
            np.ascontiguousarray(r["band"].astype(np.float64)),
            np.ascontiguousarray(r["tvmin"].astype(np.float64)),
            np.ascontiguousarray(r["tvmax"].astype(np.float64)),
        )


def generate_points(mesh, cams, atlas, mipmap=True):
    """Build the frame's splat cloud for the given camera array."""
    setup = triangle_setup(mesh, cams, atlas, mipmap=mipmap)
    kern = backend.kernels()
    counts = np.asarray(kern.count_grid_points(
        setup.v2d, setup.grid, setup.ncell, setup.active), dtype=np.int64)
    total = int(counts.sum())
    offsets = np.zeros(counts.shape[0], dtype=np.int64)
    np.cumsum(counts[:-1], out=offsets[1:])

    out_pos = np.zeros((total, 3), dtype=np.float32)
    out_uv = np.zeros((total, 2), dtype=np.float32)
    out_nrm = np.zeros((total, 3), dtype=np.float32)
    out_band = np.zeros((total, 2), dtype=np.float32)
    out_tvmin = np.zeros((total, kc.N_CHANNELS), dtype=np.float32)
    out_tvmax = np.zeros((total, kc.N_CHANNELS), dtype=np.float32)
    out_tri = np.zeros(total, dtype=np.uint32)

    data, lvl_ptr, lvl_off, lvl_w, lvl_h, tex_chan, mat_tex, mat_scalar = \
        atlas.kernel_tables()
    tan, bit = mesh.tangent_frames()
    pos64 = mesh.tri_pos.astype(np.float64)
    if total:
        kern.emit_grid_points(
            offsets, setup.v2d, setup.grid, setup.ncell, setup.active,
            setup.cent, setup.ax, setup.ay,
            np.ascontiguousarray(mesh.tri_uv.astype(np.float64)),
            np.ascontiguousarray(mesh.tri_norm.astype(np.float64)),
            mesh.tri_mat.astype(np.int64), setup.band,
            setup.lodmin, setup.lodmax,
            data, lvl_ptr, lvl_off, lvl_w, lvl_h, tex_chan,
            mat_tex, mat_scalar,
            out_pos, out_uv, out_nrm, out_band,
            out_tvmin, out_tvmax, out_tri)

    records = np.zeros(total, dtype=RECORD_DTYPE)
    records["pos"] = out_pos
    records["tri"] = out_tri
    records["uv"] = out_uv
    records["normal"] = out_nrm
    records["band"] = out_band
    records["tvmin"] = out_tvmin.astype(np.float16)
    records["tvmax"] = out_tvmax.astype(np.float16)

    stats = dict(setup.stats)
    stats.update({
        "n_points": total,
        "bytes_per_point": RECORD_DTYPE.itemsize,
        "points_min": int(counts[setup.active == 1].min()) if total else 0,
        "points_max": int(counts.max()) if total else 0,
    })
    return SplatCloud(
        records=records,
        tri_verts=np.ascontiguousarray(pos64),
        tri_ax=setup.ax, tri_ay=setup.ay, tri_ext=setup.ext,
        tri_spuv=setup.spuv, tri_tan=tan.astype(np.float64),
        tri_bit=bit.astype(np.float64),
        tri_mat=mesh.tri_mat.astype(np.int32),
        counts=counts, setup=setup, stats=stats)
