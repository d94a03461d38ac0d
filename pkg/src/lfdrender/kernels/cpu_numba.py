"""numba implementations of the hot kernels.

Mirrors cpu_numpy.py operation-for-operation (same float64 arithmetic, same
clamping and rounding order) so both backends produce bit-identical output.
No fastmath: reassociation would break that contract.

Conventions shared by every kernel here:
  * screen pixels are y-down, pixel (i,j) center at (i+0.5, j+0.5)
  * half-plane edge e(p) = A*px + B*py + C with A=-dy, B=dx, C=dy*xa-dx*ya;
    interior is e > 0 for screen winding normalized to positive doubled area,
    ties (e == 0) land inside only on top/left edges: dy < 0, or dy == 0
    and dx > 0
  * view-buffer words pack (depth_key << 32) | rgba8; smaller word wins, so
    fills commute and any submission order gives the same buffer
"""

import math

import numpy as np
import numba
from numba import njit, prange  # noqa: F401  (prange kept for parity with examples)

from .common import GOLD, MIX1, MIX2, DEPTH_KEY_MAX, ROUGH_FLOOR

JIT = {"cache": True, "nogil": True}

INV255 = 1.0 / 255.0
PI = math.pi


# ---------------------------------------------------------------- rng / erfinv

@njit(**JIT)
def _mix64(z):
    z = (z ^ (z >> np.uint64(30))) * MIX1
    z = (z ^ (z >> np.uint64(27))) * MIX2
    return z ^ (z >> np.uint64(31))


@njit(**JIT)
def _rng_u01(seed, i0, i1, i2):
    z = _mix64(seed + GOLD * i0)
    z = _mix64(z + GOLD * i1)
    z = _mix64(z + GOLD * i2)
    return np.float64(z >> np.uint64(11)) * (2.0 ** -53)


@njit(**JIT)
def _erfinv(x):
    w = -math.log((1.0 - x) * (1.0 + x))
    if w < 5.0:
        w = w - 2.5
        p = 2.81022636e-08
        p = p * w + 3.43273939e-07
        p = p * w + -3.5233877e-06
        p = p * w + -4.39150654e-06
        p = p * w + 0.00021858087
        p = p * w + -0.00125372503
        p = p * w + -0.00417768164
        p = p * w + 0.246640727
        p = p * w + 1.50140941
    else:
        w = math.sqrt(w) - 3.0
        p = -0.000200214257
        p = p * w + 0.000100950558
        p = p * w + 0.00134934322
        p = p * w + -0.00367342844
        p = p * w + 0.00573950773
        p = p * w + -0.0076224613
        p = p * w + 0.00943887047
        p = p * w + 1.00167406
        p = p * w + 2.83297682
    return p * x


@njit(**JIT)
def _trunc_gauss(xi, scale, clo, chi):
    """scale * erfinv of the truncated CDF window; scale = sigma*sqrt(2)."""
    t = clo + xi * (chi - clo)
    return scale * _erfinv(2.0 * t - 1.0)


# ------------------------------------------------------------------- shading

@njit(**JIT)
def _shade(ar, ag, ab, rough, metal, ao,
           nx, ny, nz, vx, vy, vz, shading, out3):
    lx = shading[0]
    ly = shading[1]
    lz = shading[2]
    rough_c = min(max(rough, ROUGH_FLOOR), 1.0)
    alpha = rough_c * rough_c
    a2 = alpha * alpha
    ndl = nx * lx + ny * ly + nz * lz
    ndv = nx * vx + ny * vy + nz * vz
    out3[0] = shading[6] * ao * ar
    out3[1] = shading[7] * ao * ag
    out3[2] = shading[8] * ao * ab
    if ndl > 0.0 and ndv > 0.0:
        hx = lx + vx
        hy = ly + vy
        hz = lz + vz
        hl = math.sqrt(hx * hx + hy * hy + hz * hz)
        if hl > 1e-12:
            hx = hx / hl
            hy = hy / hl
            hz = hz / hl
            ndh = max(nx * hx + ny * hy + nz * hz, 0.0)
            hdv = max(hx * vx + hy * vy + hz * vz, 0.0)
            den = ndh * ndh * (a2 - 1.0) + 1.0
            dterm = a2 / (PI * den * den)
            k = (rough_c + 1.0)
            k = k * k / 8.0
            g1 = ndl / (ndl * (1.0 - k) + k)
            g2 = ndv / (ndv * (1.0 - k) + k)
            gterm = g1 * g2
            f1 = 1.0 - hdv
            f2 = f1 * f1
            f5 = f2 * f2 * f1
            dg = dterm * gterm / (4.0 * ndl * ndv + 1e-7)
            f0r = 0.04 * (1.0 - metal) + ar * metal
            f0g = 0.04 * (1.0 - metal) + ag * metal
            f0b = 0.04 * (1.0 - metal) + ab * metal
            km = (1.0 - metal) * (1.0 / PI)
            out3[0] += (ar * km + dg * (f0r + (1.0 - f0r) * f5)) * shading[3] * ndl
            out3[1] += (ag * km + dg * (f0g + (1.0 - f0g) * f5)) * shading[4] * ndl
            out3[2] += (ab * km + dg * (f0b + (1.0 - f0b) * f5)) * shading[5] * ndl


@njit(**JIT)
def _pack_word(r, g, b, key):
    r8 = np.uint64(min(max(r, 0.0), 1.0) * 255.0 + 0.5)
    g8 = np.uint64(min(max(g, 0.0), 1.0) * 255.0 + 0.5)
    b8 = np.uint64(min(max(b, 0.0), 1.0) * 255.0 + 0.5)
    rgba = (r8 << np.uint64(24)) | (g8 << np.uint64(16)) \
        | (b8 << np.uint64(8)) | np.uint64(0xFF)
    return (key << np.uint64(32)) | rgba


# ------------------------------------------------------------- texture fetch

@njit(**JIT)
def _bilinear_acc(data, off, w, h, nch, u, v, c0, cn, weight, out9):
    """Accumulate weight * bilinear texel (repeat wrap) into out9[c0:c0+cn]."""
    fx = u * w - 0.5
    fy = v * h - 0.5
    x0f = math.floor(fx)
    y0f = math.floor(fy)
    tx = fx - x0f
    ty = fy - y0f
    x0 = int(x0f) % w
    y0 = int(y0f) % h
    x1 = (x0 + 1) % w
    y1 = (y0 + 1) % h
    b00 = off + (y0 * w + x0) * nch
    b10 = off + (y0 * w + x1) * nch
    b01 = off + (y1 * w + x0) * nch
    b11 = off + (y1 * w + x1) * nch
    for c in range(cn):
        c00 = np.float64(data[b00 + c])
        c10 = np.float64(data[b10 + c])
        c01 = np.float64(data[b01 + c])
        c11 = np.float64(data[b11 + c])
        top = c00 + (c10 - c00) * tx
        bot = c01 + (c11 - c01) * tx
        out9[c0 + c] += weight * (top + (bot - top) * ty)


@njit(**JIT)
def _trilinear_slot(data, lvl_ptr, lvl_off, lvl_w, lvl_h, nch,
                    tex, u, v, lod, c0, cn, weight, out9):
    p0 = lvl_ptr[tex]
    nlev = lvl_ptr[tex + 1] - p0
    lo = min(max(lod, 0.0), np.float64(nlev - 1))
    l0 = int(math.floor(lo))
    l1 = min(l0 + 1, nlev - 1)
    f = lo - l0
    _bilinear_acc(data, lvl_off[p0 + l0], lvl_w[p0 + l0], lvl_h[p0 + l0],
                  nch, u, v, c0, cn, weight * (1.0 - f), out9)
    _bilinear_acc(data, lvl_off[p0 + l1], lvl_w[p0 + l1], lvl_h[p0 + l1],
                  nch, u, v, c0, cn, weight * f, out9)


SLOT_C0 = np.array([0, 3, 6, 7, 8], dtype=np.int64)
SLOT_CN = np.array([3, 3, 1, 1, 1], dtype=np.int64)


@njit(**JIT)
def _material_channels(data, lvl_ptr, lvl_off, lvl_w, lvl_h, tex_chan,
                       mat_tex, mat_scalar, m, u, v, lods, aniso_n,
                       dua, dva, out9):
    """All 9 texel channels of material m at (u,v): factor * fetch per slot.

    lods holds a lod per slot; aniso_n > 1 averages that many trilinear
    probes along the (dua, dva) texture-space anisotropy axis.
    """
    for s in range(5):
        c0 = SLOT_C0[s]
        cn = SLOT_CN[s]
        tex = mat_tex[m, s]
        if tex < 0:
            for c in range(cn):
                out9[c0 + c] = mat_scalar[m, c0 + c]
        else:
            for c in range(cn):
                out9[c0 + c] = 0.0
            nch = tex_chan[tex]
            if aniso_n > 1:
                wgt = 1.0 / aniso_n
                for k in range(aniso_n):
                    t = (k + 0.5) / aniso_n - 0.5
                    _trilinear_slot(data, lvl_ptr, lvl_off, lvl_w, lvl_h,
                                    nch, tex, u + t * dua, v + t * dva,
                                    lods[s], c0, cn, wgt, out9)
            else:
                _trilinear_slot(data, lvl_ptr, lvl_off, lvl_w, lvl_h,
                                nch, tex, u, v, lods[s], c0, cn, 1.0, out9)
            for c in range(cn):
                out9[c0 + c] = out9[c0 + c] * mat_scalar[m, c0 + c]


# ------------------------------------------------------------ splat rendering

@njit(**JIT)
def _tri_screen_edges(tverts, ex, d, c2fw, c2fh, near, w_px, h_px,
                      ea, eb, ec, edx, edy, valid):
    """Per-triangle screen-space edge coefficients for splat clipping."""
    t_count = tverts.shape[0]
    for t in range(t_count):
        ok = True
        sx0 = sy0 = sx1 = sy1 = sx2 = sy2 = 0.0
        for i in range(3):
            x = tverts[t, i, 0]
            y = tverts[t, i, 1]
            z = tverts[t, i, 2]
            zv = d - z
            if zv <= near:
                ok = False
                break
            ndcx = (d * x - ex * z) * c2fw / zv
            ndcy = (d * y) * c2fh / zv
            sx = (ndcx + 1.0) * 0.5 * w_px
            sy = (1.0 - ndcy) * 0.5 * h_px
            if i == 0:
                sx0, sy0 = sx, sy
            elif i == 1:
                sx1, sy1 = sx, sy
            else:
                sx2, sy2 = sx, sy
        if ok:
            area2 = (sx1 - sx0) * (sy2 - sy0) - (sy1 - sy0) * (sx2 - sx0)
            if area2 == 0.0:
                ok = False
            elif area2 < 0.0:
                sx1, sy1, sx2, sy2 = sx2, sy2, sx1, sy1
        if not ok:
            valid[t] = 0
            continue
        valid[t] = 1
        for e in range(3):
            if e == 0:
                xa, ya, xb, yb = sx0, sy0, sx1, sy1
            elif e == 1:
                xa, ya, xb, yb = sx1, sy1, sx2, sy2
            else:
                xa, ya, xb, yb = sx2, sy2, sx0, sy0
            dx = xb - xa
            dy = yb - ya
            ea[t, e] = -dy
            eb[t, e] = dx
            ec[t, e] = dy * xa - dx * ya
            edx[t, e] = dx
            edy[t, e] = dy
    return 0


@njit(**JIT)
def _edge_inside(e, dx, dy):
    if e > 0.0:
        return True
    if e == 0.0:
        if dy < 0.0:
            return True
        if dy == 0.0 and dx > 0.0:
            return True
    return False


@njit(**JIT)
def fill_view_splats(words, ppos, ptri, puv, pnrm, pband, ptvmin, ptvmax,
                     tverts, tax, tay, text, tspuv, ttan, tbit,
                     ex, d, fw, fh, near, far, shading):
    """Splat every point into one view buffer (min-word depth resolve).

    Quads are the per-triangle sampling-frame rectangles projected to screen
    and clipped against the owning triangle's projected edges; texel values
    come from the per-point prefetched level band, interpolated by the area
    the splat covers in this view.
    """
    h_px, w_px = words.shape
    n_pts = ppos.shape[0]
    t_count = tverts.shape[0]
    c2fw = 2.0 / fw
    c2fh = 2.0 / fh
    inv_range = 1.0 / (far - near)

    ea = np.empty((t_count, 3))
    eb = np.empty((t_count, 3))
    ec = np.empty((t_count, 3))
    edx = np.empty((t_count, 3))
    edy = np.empty((t_count, 3))
    tvalid = np.empty(t_count, dtype=np.uint8)
    _tri_screen_edges(tverts, ex, d, c2fw, c2fh, near, w_px, h_px,
                      ea, eb, ec, edx, edy, tvalid)

    csx = np.empty(4)
    csy = np.empty(4)
    cnx = np.empty(4)
    cny = np.empty(4)
    qa = np.empty(4)
    qb = np.empty(4)
    qc = np.empty(4)
    qdx = np.empty(4)
    qdy = np.empty(4)
    tv = np.empty(9)
    rgb = np.empty(3)

    for p in range(n_pts):
        t = ptri[p]
        px = ppos[p, 0]
        py = ppos[p, 1]
        pz = ppos[p, 2]
        zv = d - pz
        if zv <= near or zv > far:
            continue
        ex_x = text[t, 0]
        ex_y = text[t, 1]
        ok = True
        for k in range(4):
            sxs = 1.0 if (k == 1 or k == 2) else -1.0
            sys = 1.0 if (k == 2 or k == 3) else -1.0
            cx = px + sxs * ex_x * tax[t, 0] + sys * ex_y * tay[t, 0]
            cy = py + sxs * ex_x * tax[t, 1] + sys * ex_y * tay[t, 1]
            cz = pz + sxs * ex_x * tax[t, 2] + sys * ex_y * tay[t, 2]
            czv = d - cz
            if czv <= near:
                ok = False
                break
            ndcx = (d * cx - ex * cz) * c2fw / czv
            ndcy = (d * cy) * c2fh / czv
            cnx[k] = ndcx
            cny[k] = ndcy
            csx[k] = (ndcx + 1.0) * 0.5 * w_px
            csy[k] = (1.0 - ndcy) * 0.5 * h_px
        if not ok:
            continue

        sh_ndc = 0.0
        sh_scr = 0.0
        for k in range(4):
            k2 = (k + 1) % 4
            sh_ndc += cnx[k] * cny[k2] - cnx[k2] * cny[k]
            sh_scr += csx[k] * csy[k2] - csx[k2] * csy[k]
        size_ndc = 0.5 * abs(sh_ndc)

        if sh_scr < 0.0:
            # reverse corner order so doubled screen area is positive
            csx[0], csx[3] = csx[3], csx[0]
            csy[0], csy[3] = csy[3], csy[0]
            csx[1], csx[2] = csx[2], csx[1]
            csy[1], csy[2] = csy[2], csy[1]

        min_x = min(min(csx[0], csx[1]), min(csx[2], csx[3]))
        max_x = max(max(csx[0], csx[1]), max(csx[2], csx[3]))
        min_y = min(min(csy[0], csy[1]), min(csy[2], csy[3]))
        max_y = max(max(csy[0], csy[1]), max(csy[2], csy[3]))
        px0 = int(math.ceil(min_x - 0.5))
        px1 = int(math.floor(max_x - 0.5))
        py0 = int(math.ceil(min_y - 0.5))
        py1 = int(math.floor(max_y - 0.5))
        if px0 < 0:
            px0 = 0
        if py0 < 0:
            py0 = 0
        if px1 > w_px - 1:
            px1 = w_px - 1
        if py1 > h_px - 1:
            py1 = h_px - 1
        if px0 > px1 or py0 > py1:
            continue

        for k in range(4):
            k2 = (k + 1) % 4
            dx = csx[k2] - csx[k]
            dy = csy[k2] - csy[k]
            qa[k] = -dy
            qb[k] = dx
            qc[k] = dy * csx[k] - dx * csy[k]
            qdx[k] = dx
            qdy[k] = dy

        # level-band texel interpolation by covered view area
        cover = size_ndc * 0.25 * w_px * h_px
        if cover > 1.0:
            cover = 1.0
        b0 = pband[p, 0]
        b1 = pband[p, 1]
        if cover <= 1e-300:
            vs = b1
        else:
            vs = tspuv[t] / cover
        if vs < b0:
            vs = b0
        if vs > b1:
            vs = b1
        if b1 > b0:
            tfac = (vs - b0) / (b1 - b0)
        else:
            tfac = 0.0
        for c in range(9):
            a = ptvmin[p, c]
            b = ptvmax[p, c]
            val = a + (b - a) * tfac
            lo = min(a, b)
            hi = max(a, b)
            tv[c] = min(max(val, lo), hi)

        # shading normal: tangent-frame perturbation by the normal channels
        tnx = 2.0 * tv[3] - 1.0
        tny = 2.0 * tv[4] - 1.0
        tnz = 2.0 * tv[5] - 1.0
        nx = tnx * ttan[t, 0] + tny * tbit[t, 0] + tnz * pnrm[p, 0]
        ny = tnx * ttan[t, 1] + tny * tbit[t, 1] + tnz * pnrm[p, 1]
        nz = tnx * ttan[t, 2] + tny * tbit[t, 2] + tnz * pnrm[p, 2]
        nl = math.sqrt(nx * nx + ny * ny + nz * nz)
        if nl > 1e-12:
            nx = nx / nl
            ny = ny / nl
            nz = nz / nl
        else:
            nx = pnrm[p, 0]
            ny = pnrm[p, 1]
            nz = pnrm[p, 2]
        vx = ex - px
        vy = 0.0 - py
        vz = d - pz
        vl = math.sqrt(vx * vx + vy * vy + vz * vz)
        vx = vx / vl
        vy = vy / vl
        vz = vz / vl
        _shade(tv[0], tv[1], tv[2], tv[6], tv[7], tv[8],
               nx, ny, nz, vx, vy, vz, shading, rgb)

        kf = (zv - near) * inv_range
        kf = min(max(kf, 0.0), 1.0)
        key = np.uint64(kf * DEPTH_KEY_MAX)
        word = _pack_word(rgb[0], rgb[1], rgb[2], key)

        for yy in range(py0, py1 + 1):
            pcy = yy + 0.5
            for xx in range(px0, px1 + 1):
                pcx = xx + 0.5
                inside = True
                for k in range(4):
                    e = qa[k] * pcx + qb[k] * pcy + qc[k]
                    if not _edge_inside(e, qdx[k], qdy[k]):
                        inside = False
                        break
                if not inside:
                    continue
                # clip against the owning triangle's projected edges; when the
                # triangle itself cannot be projected (vertex behind the near
                # plane, degenerate screen area) the quad alone decides
                if tvalid[t] == 1:
                    for k in range(3):
                        e = ea[t, k] * pcx + eb[t, k] * pcy + ec[t, k]
                        if not _edge_inside(e, edx[t, k], edy[t, k]):
                            inside = False
                            break
                if not inside:
                    continue
                if word < words[yy, xx]:
                    words[yy, xx] = word
    return 0


# --------------------------------------------------------------- rasterizer

@njit(**JIT)
def _clip_near(pos, uvs, nrm, d, near, out_pos, out_uv, out_nrm):
    """Clip one triangle against zv >= near; returns vertex count (0, 3 or 4)."""
    n_out = 0
    for i in range(3):
        j = (i + 1) % 3
        zi = d - pos[i, 2]
        zj = d - pos[j, 2]
        in_i = zi > near
        in_j = zj > near
        if in_i:
            out_pos[n_out, 0] = pos[i, 0]
            out_pos[n_out, 1] = pos[i, 1]
            out_pos[n_out, 2] = pos[i, 2]
            out_uv[n_out, 0] = uvs[i, 0]
            out_uv[n_out, 1] = uvs[i, 1]
            for c in range(3):
                out_nrm[n_out, c] = nrm[i, c]
            n_out += 1
        if in_i != in_j:
            t = (zi - near) / (zi - zj)
            out_pos[n_out, 0] = pos[i, 0] + (pos[j, 0] - pos[i, 0]) * t
            out_pos[n_out, 1] = pos[i, 1] + (pos[j, 1] - pos[i, 1]) * t
            out_pos[n_out, 2] = pos[i, 2] + (pos[j, 2] - pos[i, 2]) * t
            out_uv[n_out, 0] = uvs[i, 0] + (uvs[j, 0] - uvs[i, 0]) * t
            out_uv[n_out, 1] = uvs[i, 1] + (uvs[j, 1] - uvs[i, 1]) * t
            for c in range(3):
                out_nrm[n_out, c] = nrm[i, c] + (nrm[j, c] - nrm[i, c]) * t
            n_out += 1
    return n_out


@njit(**JIT)
def rasterize_view(words, tverts, tuv, tnrm, ttan, tbit, tmat,
                   atlas_data, lvl_ptr, lvl_off, lvl_w, lvl_h, tex_chan,
                   mat_tex, mat_scalar,
                   ex, d, fw, fh, near, far, shading, aniso_n):
    """Scanline-rasterize every triangle into one view buffer.

    Perspective-correct attributes, per-pixel texture lod from analytic
    screen-space uv derivatives, trilinear fetches (aniso_n > 1 averages that
    many probes along the anisotropy axis), same shading and word packing as
    the splat path.
    """
    h_px, w_px = words.shape
    t_count = tverts.shape[0]
    c2fw = 2.0 / fw
    c2fh = 2.0 / fh
    inv_range = 1.0 / (far - near)

    cp = np.empty((4, 3))
    cu = np.empty((4, 2))
    cn = np.empty((4, 3))
    vsx = np.empty(3)
    vsy = np.empty(3)
    vinvz = np.empty(3)
    vu = np.empty(3)
    vv = np.empty(3)
    vnx = np.empty(3)
    vny = np.empty(3)
    vnz = np.empty(3)
    lods = np.empty(5)
    tv = np.empty(9)
    rgb = np.empty(3)

    # texture base sizes per material slot (for lod in texel units)
    n_mat = mat_tex.shape[0]
    tex_w = np.zeros((n_mat, 5))
    tex_h = np.zeros((n_mat, 5))
    for m in range(n_mat):
        for s in range(5):
            tex = mat_tex[m, s]
            if tex >= 0:
                p0 = lvl_ptr[tex]
                tex_w[m, s] = np.float64(lvl_w[p0])
                tex_h[m, s] = np.float64(lvl_h[p0])

    for t in range(t_count):
        m = tmat[t]
        nv = _clip_near(tverts[t], tuv[t], tnrm[t], d, near, cp, cu, cn)
        if nv < 3:
            continue
        for sub in range(nv - 2):
            i0 = 0
            i1 = sub + 1
            i2 = sub + 2
            ok = True
            for c in range(3):
                idx = i0 if c == 0 else (i1 if c == 1 else i2)
                x = cp[idx, 0]
                y = cp[idx, 1]
                z = cp[idx, 2]
                zv = d - z
                if zv <= 0.0:
                    ok = False
                    break
                ndcx = (d * x - ex * z) * c2fw / zv
                ndcy = (d * y) * c2fh / zv
                vsx[c] = (ndcx + 1.0) * 0.5 * w_px
                vsy[c] = (1.0 - ndcy) * 0.5 * h_px
                inv_z = 1.0 / zv
                vinvz[c] = inv_z
                vu[c] = cu[idx, 0] * inv_z
                vv[c] = cu[idx, 1] * inv_z
                vnx[c] = cn[idx, 0] * inv_z
                vny[c] = cn[idx, 1] * inv_z
                vnz[c] = cn[idx, 2] * inv_z
            if not ok:
                continue
            area2 = (vsx[1] - vsx[0]) * (vsy[2] - vsy[0]) \
                - (vsy[1] - vsy[0]) * (vsx[2] - vsx[0])
            if area2 == 0.0:
                continue
            if area2 < 0.0:
                vsx[1], vsx[2] = vsx[2], vsx[1]
                vsy[1], vsy[2] = vsy[2], vsy[1]
                vinvz[1], vinvz[2] = vinvz[2], vinvz[1]
                vu[1], vu[2] = vu[2], vu[1]
                vv[1], vv[2] = vv[2], vv[1]
                vnx[1], vnx[2] = vnx[2], vnx[1]
                vny[1], vny[2] = vny[2], vny[1]
                vnz[1], vnz[2] = vnz[2], vnz[1]
                area2 = -area2

            # edge coefficients; lambda_i pairs with the edge opposite vertex i
            e0a = e0b = e0c = e0dx = e0dy = 0.0
            e1a = e1b = e1c = e1dx = e1dy = 0.0
            e2a = e2b = e2c = e2dx = e2dy = 0.0
            for e in range(3):
                if e == 0:
                    xa, ya, xb, yb = vsx[0], vsy[0], vsx[1], vsy[1]
                elif e == 1:
                    xa, ya, xb, yb = vsx[1], vsy[1], vsx[2], vsy[2]
                else:
                    xa, ya, xb, yb = vsx[2], vsy[2], vsx[0], vsy[0]
                dx = xb - xa
                dy = yb - ya
                a = -dy
                b = dx
                cc = dy * xa - dx * ya
                if e == 0:
                    e0a, e0b, e0c, e0dx, e0dy = a, b, cc, dx, dy
                elif e == 1:
                    e1a, e1b, e1c, e1dx, e1dy = a, b, cc, dx, dy
                else:
                    e2a, e2b, e2c, e2dx, e2dy = a, b, cc, dx, dy

            inv_area = 1.0 / area2
            # linear coefficients of q/zv attributes: lam0 <- edge1, lam1 <- edge2, lam2 <- edge0
            aw = (vinvz[0] * e1a + vinvz[1] * e2a + vinvz[2] * e0a) * inv_area
            bw = (vinvz[0] * e1b + vinvz[1] * e2b + vinvz[2] * e0b) * inv_area
            cw = (vinvz[0] * e1c + vinvz[1] * e2c + vinvz[2] * e0c) * inv_area
            au = (vu[0] * e1a + vu[1] * e2a + vu[2] * e0a) * inv_area
            bu = (vu[0] * e1b + vu[1] * e2b + vu[2] * e0b) * inv_area
            cuc = (vu[0] * e1c + vu[1] * e2c + vu[2] * e0c) * inv_area
            av = (vv[0] * e1a + vv[1] * e2a + vv[2] * e0a) * inv_area
            bv = (vv[0] * e1b + vv[1] * e2b + vv[2] * e0b) * inv_area
            cv = (vv[0] * e1c + vv[1] * e2c + vv[2] * e0c) * inv_area
            anx = (vnx[0] * e1a + vnx[1] * e2a + vnx[2] * e0a) * inv_area
            bnx = (vnx[0] * e1b + vnx[1] * e2b + vnx[2] * e0b) * inv_area
            cnx2 = (vnx[0] * e1c + vnx[1] * e2c + vnx[2] * e0c) * inv_area
            any_ = (vny[0] * e1a + vny[1] * e2a + vny[2] * e0a) * inv_area
            bny = (vny[0] * e1b + vny[1] * e2b + vny[2] * e0b) * inv_area
            cny2 = (vny[0] * e1c + vny[1] * e2c + vny[2] * e0c) * inv_area
            anz = (vnz[0] * e1a + vnz[1] * e2a + vnz[2] * e0a) * inv_area
            bnz = (vnz[0] * e1b + vnz[1] * e2b + vnz[2] * e0b) * inv_area
            cnz2 = (vnz[0] * e1c + vnz[1] * e2c + vnz[2] * e0c) * inv_area

            min_x = min(min(vsx[0], vsx[1]), vsx[2])
            max_x = max(max(vsx[0], vsx[1]), vsx[2])
            min_y = min(min(vsy[0], vsy[1]), vsy[2])
            max_y = max(max(vsy[0], vsy[1]), vsy[2])
            px0 = max(int(math.ceil(min_x - 0.5)), 0)
            px1 = min(int(math.floor(max_x - 0.5)), w_px - 1)
            py0 = max(int(math.ceil(min_y - 0.5)), 0)
            py1 = min(int(math.floor(max_y - 0.5)), h_px - 1)

            for yy in range(py0, py1 + 1):
                pcy = yy + 0.5
                for xx in range(px0, px1 + 1):
                    pcx = xx + 0.5
                    e0 = e0a * pcx + e0b * pcy + e0c
                    if not _edge_inside(e0, e0dx, e0dy):
                        continue
                    e1 = e1a * pcx + e1b * pcy + e1c
                    if not _edge_inside(e1, e1dx, e1dy):
                        continue
                    e2 = e2a * pcx + e2b * pcy + e2c
                    if not _edge_inside(e2, e2dx, e2dy):
                        continue
                    wlin = aw * pcx + bw * pcy + cw
                    if wlin <= 0.0:
                        continue
                    zv = 1.0 / wlin
                    if zv <= near or zv > far:
                        continue
                    ulin = au * pcx + bu * pcy + cuc
                    vlin = av * pcx + bv * pcy + cv
                    u = ulin / wlin
                    v = vlin / wlin
                    # analytic screen derivatives of (u, v)
                    iz2 = 1.0 / (wlin * wlin)
                    dudx = (au * wlin - ulin * aw) * iz2
                    dvdx = (av * wlin - vlin * aw) * iz2
                    dudy = (bu * wlin - ulin * bw) * iz2
                    dvdy = (bv * wlin - vlin * bw) * iz2
                    dua = dudx
                    dva = dvdx
                    for s in range(5):
                        tex = mat_tex[m, s]
                        if tex < 0:
                            lods[s] = 0.0
                        else:
                            xt = tex_w[m, s]
                            yt = tex_h[m, s]
                            gx = dudx * xt
                            gy = dvdx * yt
                            rx = math.sqrt(gx * gx + gy * gy)
                            gx = dudy * xt
                            gy = dvdy * yt
                            ry = math.sqrt(gx * gx + gy * gy)
                            rmax = max(rx, ry)
                            rmin = min(rx, ry)
                            if aniso_n > 1:
                                rho = max(rmin, rmax / aniso_n)
                            else:
                                rho = rmax
                            lods[s] = math.log2(max(rho, 1e-12))
                    dx2 = dudx * dudx + dvdx * dvdx
                    dy2 = dudy * dudy + dvdy * dvdy
                    if dy2 > dx2:
                        dua = dudy
                        dva = dvdy
                    _material_channels(atlas_data, lvl_ptr, lvl_off, lvl_w,
                                       lvl_h, tex_chan, mat_tex, mat_scalar,
                                       m, u, v, lods, aniso_n, dua, dva, tv)
                    nxl = anx * pcx + bnx * pcy + cnx2
                    nyl = any_ * pcx + bny * pcy + cny2
                    nzl = anz * pcx + bnz * pcy + cnz2
                    nx = nxl / wlin
                    ny = nyl / wlin
                    nz = nzl / wlin
                    nl = math.sqrt(nx * nx + ny * ny + nz * nz)
                    if nl > 1e-12:
                        nx = nx / nl
                        ny = ny / nl
                        nz = nz / nl
                    tnx = 2.0 * tv[3] - 1.0
                    tny = 2.0 * tv[4] - 1.0
                    tnz = 2.0 * tv[5] - 1.0
                    pnx = tnx * ttan[t, 0] + tny * tbit[t, 0] + tnz * nx
                    pny = tnx * ttan[t, 1] + tny * tbit[t, 1] + tnz * ny
                    pnz = tnx * ttan[t, 2] + tny * tbit[t, 2] + tnz * nz
                    nl = math.sqrt(pnx * pnx + pny * pny + pnz * pnz)
                    if nl > 1e-12:
                        pnx = pnx / nl
                        pny = pny / nl
                        pnz = pnz / nl
                    else:
                        pnx, pny, pnz = nx, ny, nz
                    # world position from zv: x = ex + (xf - ex) * zv/d style,
                    # but derive directly from screen ray at depth zv
                    ndcx = 2.0 * pcx / w_px - 1.0
                    ndcy = 1.0 - 2.0 * pcy / h_px
                    xf = ndcx * fw * 0.5
                    yf = ndcy * fh * 0.5
                    s_ray = zv / d
                    wx = ex + (xf - ex) * s_ray
                    wy = yf * s_ray
                    wz = d - zv
                    vx = ex - wx
                    vy = 0.0 - wy
                    vz = d - wz
                    vl = math.sqrt(vx * vx + vy * vy + vz * vz)
                    vx = vx / vl
                    vy = vy / vl
                    vz = vz / vl
                    _shade(tv[0], tv[1], tv[2], tv[6], tv[7], tv[8],
                           pnx, pny, pnz, vx, vy, vz, shading, rgb)
                    kf = (zv - near) * inv_range
                    kf = min(max(kf, 0.0), 1.0)
                    key = np.uint64(kf * DEPTH_KEY_MAX)
                    word = _pack_word(rgb[0], rgb[1], rgb[2], key)
                    if word < words[yy, xx]:
                        words[yy, xx] = word
    return 0


# ------------------------------------------------------------ point emission

@njit(**JIT)
def _inside_2d(v2d, t, cx, cy):
    """Closed-inclusive point-in-triangle in sampling-plane coords."""
    x0 = v2d[t, 0, 0]
    y0 = v2d[t, 0, 1]
    x1 = v2d[t, 1, 0]
    y1 = v2d[t, 1, 1]
    x2 = v2d[t, 2, 0]
    y2 = v2d[t, 2, 1]
    d0 = (x1 - x0) * (cy - y0) - (y1 - y0) * (cx - x0)
    d1 = (x2 - x1) * (cy - y1) - (y2 - y1) * (cx - x1)
    d2 = (x0 - x2) * (cy - y2) - (y0 - y2) * (cx - x2)
    area = (x1 - x0) * (y2 - y0) - (y1 - y0) * (x2 - x0)
    if area >= 0.0:
        return d0 >= 0.0 and d1 >= 0.0 and d2 >= 0.0
    return d0 <= 0.0 and d1 <= 0.0 and d2 <= 0.0


@njit(**JIT)
def _closest_on_tri2d(ax, ay, bx, by, cx, cy, px, py):
    """Closest point of the 2D triangle (a, b, c) to (px, py)."""
    abx = bx - ax
    aby = by - ay
    acx = cx - ax
    acy = cy - ay
    apx = px - ax
    apy = py - ay
    d1 = abx * apx + aby * apy
    d2 = acx * apx + acy * apy
    if d1 <= 0.0 and d2 <= 0.0:
        return ax, ay
    bpx = px - bx
    bpy = py - by
    d3 = abx * bpx + aby * bpy
    d4 = acx * bpx + acy * bpy
    if d3 >= 0.0 and d4 <= d3:
        return bx, by
    vc = d1 * d4 - d3 * d2
    if vc <= 0.0 and d1 >= 0.0 and d3 <= 0.0:
        s = d1 / (d1 - d3)
        return ax + s * abx, ay + s * aby
    cpx = px - cx
    cpy = py - cy
    d5 = abx * cpx + aby * cpy
    d6 = acx * cpx + acy * cpy
    if d6 >= 0.0 and d5 <= d6:
        return cx, cy
    vb = d5 * d2 - d1 * d6
    if vb <= 0.0 and d2 >= 0.0 and d6 <= 0.0:
        s = d2 / (d2 - d6)
        return ax + s * acx, ay + s * acy
    va = d3 * d6 - d5 * d4
    if va <= 0.0 and (d4 - d3) >= 0.0 and (d5 - d6) >= 0.0:
        s = (d4 - d3) / ((d4 - d3) + (d5 - d6))
        return bx + s * (cx - bx), by + s * (cy - by)
    denom = 1.0 / (va + vb + vc)
    sv = vb * denom
    sw = vc * denom
    return ax + abx * sv + acx * sw, ay + aby * sv + acy * sw


@njit(**JIT)
def count_grid_points(v2d, grid, ncell, active):
    """Points each triangle will emit (the rule emit_grid_points applies)."""
    t_count = v2d.shape[0]
    counts = np.zeros(t_count, dtype=np.int64)
    for t in range(t_count):
        if active[t] == 0:
            continue
        if ncell[t, 0] * ncell[t, 1] == 1:
            counts[t] = 1
            continue
        bx = grid[t, 0]
        by = grid[t, 1]
        gx = grid[t, 2]
        gy = grid[t, 3]
        # boundary clamping works in cell units so anisotropic grids keep
        # the same reach per axis; half the unit-cell diagonal squared
        igx = 1.0 / gx
        igy = 1.0 / gy
        ax0 = v2d[t, 0, 0] * igx
        ay0 = v2d[t, 0, 1] * igy
        ax1 = v2d[t, 1, 0] * igx
        ay1 = v2d[t, 1, 1] * igy
        ax2 = v2d[t, 2, 0] * igx
        ay2 = v2d[t, 2, 1] * igy
        n = 0
        for j in range(ncell[t, 1]):
            cy = by + (j + 0.5) * gy
            for i in range(ncell[t, 0]):
                cx = bx + (i + 0.5) * gx
                if _inside_2d(v2d, t, cx, cy):
                    n += 1
                else:
                    qx, qy = _closest_on_tri2d(ax0, ay0, ax1, ay1, ax2, ay2,
                                               cx * igx, cy * igy)
                    ddx = cx * igx - qx
                    ddy = cy * igy - qy
                    if ddx * ddx + ddy * ddy <= 0.5:
                        n += 1
        counts[t] = n if n > 0 else 1
    return counts


@njit(**JIT)
def emit_grid_points(offsets, v2d, grid, ncell, active,
                     tcent, tax, tay, tuv, tnrm, tmat, tband,
                     tlodmin, tlodmax,
                     atlas_data, lvl_ptr, lvl_off, lvl_w, lvl_h, tex_chan,
                     mat_tex, mat_scalar,
                     out_pos, out_uv, out_nrm, out_band,
                     out_tvmin, out_tvmax, out_tri):
    """Emit splat points on each active triangle's sampling grid.

    Deterministic order: by (triangle, row, column). Cells whose centers lie
    inside the triangle emit at the center; a boundary cell whose center is
    within half a cell diagonal of the triangle emits at the closest surface
    point instead, so that edge-clipped splats still seal shared edges; a
    single-cell grid emits the centroid. Texel level-band values are
    prefetched here at the triangle's min/max lods.
    """
    t_count = v2d.shape[0]
    tvmin = np.empty(9)
    tvmax = np.empty(9)
    third = 1.0 / 3.0
    for t in range(t_count):
        if active[t] == 0:
            continue
        w = offsets[t]
        m = tmat[t]
        bx = grid[t, 0]
        by = grid[t, 1]
        gx = grid[t, 2]
        gy = grid[t, 3]
        x0 = v2d[t, 0, 0]
        y0 = v2d[t, 0, 1]
        x1 = v2d[t, 1, 0]
        y1 = v2d[t, 1, 1]
        x2 = v2d[t, 2, 0]
        y2 = v2d[t, 2, 1]
        darea = (x1 - x0) * (y2 - y0) - (y1 - y0) * (x2 - x0)
        if ncell[t, 0] * ncell[t, 1] == 1:
            ccx = (x0 + x1 + x2) * third
            ccy = (y0 + y1 + y2) * third
            _write_point(w, t, m, ccx, ccy, third, third, third,
                         tcent, tax, tay, tuv, tnrm, tband,
                         tlodmin, tlodmax,
                         atlas_data, lvl_ptr, lvl_off, lvl_w, lvl_h,
                         tex_chan, mat_tex, mat_scalar, tvmin, tvmax,
                         out_pos, out_uv, out_nrm, out_band,
                         out_tvmin, out_tvmax, out_tri)
            continue
        igx = 1.0 / gx
        igy = 1.0 / gy
        ax0 = x0 * igx
        ay0 = y0 * igy
        ax1 = x1 * igx
        ay1 = y1 * igy
        ax2 = x2 * igx
        ay2 = y2 * igy
        emitted = 0
        for j in range(ncell[t, 1]):
            cy = by + (j + 0.5) * gy
            for i in range(ncell[t, 0]):
                cx = bx + (i + 0.5) * gx
                if _inside_2d(v2d, t, cx, cy):
                    px = cx
                    py = cy
                else:
                    qx, qy = _closest_on_tri2d(ax0, ay0, ax1, ay1, ax2, ay2,
                                               cx * igx, cy * igy)
                    ddx = cx * igx - qx
                    ddy = cy * igy - qy
                    if ddx * ddx + ddy * ddy > 0.5:
                        continue
                    px = qx * gx
                    py = qy * gy
                # barycentric in plane coords
                l0 = ((x1 - px) * (y2 - py) - (y1 - py) * (x2 - px)) / darea
                l1 = ((x2 - px) * (y0 - py) - (y2 - py) * (x0 - px)) / darea
                l2 = 1.0 - l0 - l1
                _write_point(w, t, m, px, py, l0, l1, l2,
                             tcent, tax, tay, tuv, tnrm, tband,
                             tlodmin, tlodmax,
                             atlas_data, lvl_ptr, lvl_off, lvl_w, lvl_h,
                             tex_chan, mat_tex, mat_scalar, tvmin, tvmax,
                             out_pos, out_uv, out_nrm, out_band,
                             out_tvmin, out_tvmax, out_tri)
                w += 1
                emitted += 1
        if emitted == 0:
            ccx = (x0 + x1 + x2) * third
            ccy = (y0 + y1 + y2) * third
            _write_point(w, t, m, ccx, ccy, third, third, third,
                         tcent, tax, tay, tuv, tnrm, tband,
                         tlodmin, tlodmax,
                         atlas_data, lvl_ptr, lvl_off, lvl_w, lvl_h,
                         tex_chan, mat_tex, mat_scalar, tvmin, tvmax,
                         out_pos, out_uv, out_nrm, out_band,
                         out_tvmin, out_tvmax, out_tri)
    return 0


@njit(**JIT)
def _write_point(w, t, m, cx, cy, l0, l1, l2,
                 tcent, tax, tay, tuv, tnrm, tband, tlodmin, tlodmax,
                 atlas_data, lvl_ptr, lvl_off, lvl_w, lvl_h, tex_chan,
                 mat_tex, mat_scalar, tvmin, tvmax,
                 out_pos, out_uv, out_nrm, out_band,
                 out_tvmin, out_tvmax, out_tri):
    out_tri[w] = t
    for c in range(3):
        out_pos[w, c] = tcent[t, c] + cx * tax[t, c] + cy * tay[t, c]
    u = l0 * tuv[t, 0, 0] + l1 * tuv[t, 1, 0] + l2 * tuv[t, 2, 0]
    v = l0 * tuv[t, 0, 1] + l1 * tuv[t, 1, 1] + l2 * tuv[t, 2, 1]
    out_uv[w, 0] = u
    out_uv[w, 1] = v
    nx = l0 * tnrm[t, 0, 0] + l1 * tnrm[t, 1, 0] + l2 * tnrm[t, 2, 0]
    ny = l0 * tnrm[t, 0, 1] + l1 * tnrm[t, 1, 1] + l2 * tnrm[t, 2, 1]
    nz = l0 * tnrm[t, 0, 2] + l1 * tnrm[t, 1, 2] + l2 * tnrm[t, 2, 2]
    nl = math.sqrt(nx * nx + ny * ny + nz * nz)
    if nl > 1e-12:
        nx = nx / nl
        ny = ny / nl
        nz = nz / nl
    out_nrm[w, 0] = nx
    out_nrm[w, 1] = ny
    out_nrm[w, 2] = nz
    out_band[w, 0] = tband[t, 0]
    out_band[w, 1] = tband[t, 1]
    for s in range(5):
        c0 = SLOT_C0[s]
        cnum = SLOT_CN[s]
        tex = mat_tex[m, s]
        if tex < 0:
            for c in range(cnum):
                tvmin[c0 + c] = mat_scalar[m, c0 + c]
                tvmax[c0 + c] = mat_scalar[m, c0 + c]
        else:
            for c in range(cnum):
                tvmin[c0 + c] = 0.0
                tvmax[c0 + c] = 0.0
            nch = tex_chan[tex]
            _trilinear_slot(atlas_data, lvl_ptr, lvl_off, lvl_w, lvl_h, nch,
                            tex, u, v, tlodmin[t, s], c0, cnum, 1.0, tvmin)
            _trilinear_slot(atlas_data, lvl_ptr, lvl_off, lvl_w, lvl_h, nch,
                            tex, u, v, tlodmax[t, s], c0, cnum, 1.0, tvmax)
            for c in range(cnum):
                tvmin[c0 + c] = tvmin[c0 + c] * mat_scalar[m, c0 + c]
                tvmax[c0 + c] = tvmax[c0 + c] * mat_scalar[m, c0 + c]
    for c in range(9):
        out_tvmin[w, c] = tvmin[c]
        out_tvmax[w, c] = tvmax[c]


# -------------------------------------------------------------- interleaving

@njit(**JIT)
def _bilinear_view(views, vi, fx, fy, ch, w, h):
    x0f = math.floor(fx)
    y0f = math.floor(fy)
    tx = fx - x0f
    ty = fy - y0f
    x0 = int(x0f)
    y0 = int(y0f)
    x1 = x0 + 1
    y1 = y0 + 1
    if x0 < 0:
        x0 = 0
    if y0 < 0:
        y0 = 0
    if x1 < 0:
        x1 = 0
    if y1 < 0:
        y1 = 0
    if x0 > w - 1:
        x0 = w - 1
    if x1 > w - 1:
        x1 = w - 1
    if y0 > h - 1:
        y0 = h - 1
    if y1 > h - 1:
        y1 = h - 1
    c00 = np.float64(views[vi, y0, x0, ch]) * INV255
    c10 = np.float64(views[vi, y0, x1, ch]) * INV255
    c01 = np.float64(views[vi, y1, x0, ch]) * INV255
    c11 = np.float64(views[vi, y1, x1, ch]) * INV255
    top = c00 + (c10 - c00) * tx
    bot = c01 + (c11 - c01) * tx
    return top + (bot - top) * ty


@njit(**JIT)
def _phase_neighbors(phases, ps):
    """searchsorted-left neighbor pair around phase ps."""
    n = phases.shape[0]
    lo = 0
    hi = n
    while lo < hi:
        mid = (lo + hi) // 2
        if phases[mid] < ps:
            lo = mid + 1
        else:
            hi = mid
    j = lo
    if j == 0:
        return 0, 0, 1.0, 0.0
    if j == n:
        return n - 1, n - 1, 1.0, 0.0
    p0 = phases[j - 1]
    p1 = phases[j]
    den = p1 - p0
    if den <= 1e-15:
        return j - 1, j - 1, 1.0, 0.0
    w1 = (ps - p0) / den
    return j - 1, j, 1.0 - w1, w1


@njit(**JIT)
def interleave_views(out, views, phases, y0, y1,
                     tan_tilt, ratio, l_sub, n_display, uniform,
                     n_samples, jit_space, jit_view,
                     sx_scale, sy_scale, clo_s, chi_s,
                     a_scale, clo_a, chi_a, interval, seed):
    """Fill panel rows [y0, y1) of the subpixel image from the views.

    n_samples == 0 is the direct mapping (nearest pixel of the phase-selected
    view). Otherwise each subpixel averages n_samples jittered samples,
    bilinear in the view image and linearly weighted between the two
    phase-neighbor views; view weights farther than one interval from the
    subpixel's own phase are zeroed (2-interval angular support).
    """
    h_p, w_p, _ = out.shape
    n_views, vh, vw, _ = views.shape
    wsub = w_p * 3
    inv_display = 1.0 / n_display
    seedu = np.uint64(seed)
    for yy in range(y0, y1):
        for xx in range(w_p):
            for ch in range(3):
                xsub = xx * 3 + ch
                tphase = (xsub - tan_tilt * yy * ratio) / l_sub
                u0 = tphase - math.floor(tphase)
                nx = (xsub + 0.5) / wsub
                ny = (yy + 0.5) / h_p
                if n_samples == 0:
                    if uniform == 1:
                        vi = int(u0 * n_display)
                        if vi > n_views - 1:
                            vi = n_views - 1
                    else:
                        va, vb, wa, wb = _phase_neighbors(phases, u0)
                        vi = va if wa >= wb else vb
                    sx = int(nx * vw)
                    if sx > vw - 1:
                        sx = vw - 1
                    sy = int(ny * vh)
                    if sy > vh - 1:
                        sy = vh - 1
                    out[yy, xx, ch] = views[vi, sy, sx, ch]
                    continue
                sidx = np.uint64(yy * wsub + xsub)
                acc = 0.0
                wsum = 0.0
                for k in range(n_samples):
                    ku = np.uint64(k)
                    pxn = nx
                    pyn = ny
                    if jit_space == 1:
                        xi1 = _rng_u01(seedu, sidx, ku, np.uint64(0))
                        xi2 = _rng_u01(seedu, sidx, ku, np.uint64(1))
                        pxn = nx + _trunc_gauss(xi1, sx_scale, clo_s, chi_s)
                        pyn = ny + _trunc_gauss(xi2, sy_scale, clo_s, chi_s)
                    ps = u0
                    if jit_view == 1:
                        xi3 = _rng_u01(seedu, sidx, ku, np.uint64(2))
                        ps = u0 + _trunc_gauss(xi3, a_scale, clo_a, chi_a) \
                            * inv_display
                    va, vb, wa, wb = _phase_neighbors(phases, ps)
                    if abs(phases[va] - u0) > interval * (1.0 + 1e-9):
                        wa = 0.0
                    if abs(phases[vb] - u0) > interval * (1.0 + 1e-9):
                        wb = 0.0
                    fx = pxn * vw - 0.5
                    fy = pyn * vh - 0.5
                    if wa > 0.0:
                        acc += wa * _bilinear_view(views, va, fx, fy, ch, vw, vh)
                        wsum += wa
                    if wb > 0.0 and vb != va:
                        acc += wb * _bilinear_view(views, vb, fx, fy, ch, vw, vh)
                        wsum += wb
                if wsum <= 0.0:
                    # every sample was zeroed: nearest view, nearest pixel
                    best = 0
                    bestd = abs(phases[0] - u0)
                    for vi in range(1, n_views):
                        dd = abs(phases[vi] - u0)
                        if dd < bestd:
                            bestd = dd
                            best = vi
                    sx = int(nx * vw)
                    if sx > vw - 1:
                        sx = vw - 1
                    sy = int(ny * vh)
                    if sy > vh - 1:
                        sy = vh - 1
                    out[yy, xx, ch] = views[best, sy, sx, ch]
                    continue
                val = acc / wsum
                val = min(max(val, 0.0), 1.0)
                out[yy, xx, ch] = np.uint8(val * 255.0 + 0.5)
    return 0


@njit(**JIT)
def interleave_weights(out_w, views_shape_vh, views_shape_vw, phases, y0, y1,
                       tan_tilt, ratio, l_sub, n_display, uniform,
                       n_samples, jit_space, jit_view,
                       sx_scale, sy_scale, clo_s, chi_s,
                       a_scale, clo_a, chi_a, interval, seed):
    """Audit twin of interleave_views: sum of normalized sample weights."""
    h_p, w_p, _ = out_w.shape
    wsub = w_p * 3
    inv_display = 1.0 / n_display
    n_views = phases.shape[0]
    seedu = np.uint64(seed)
    for yy in range(y0, y1):
        for xx in range(w_p):
            for ch in range(3):
                xsub = xx * 3 + ch
                tphase = (xsub - tan_tilt * yy * ratio) / l_sub
                u0 = tphase - math.floor(tphase)
                if n_samples == 0:
                    out_w[yy, xx, ch] = 1.0
                    continue
                sidx = np.uint64(yy * wsub + xsub)
                wsum = 0.0
                for k in range(n_samples):
                    ku = np.uint64(k)
                    ps = u0
                    if jit_view == 1:
                        xi3 = _rng_u01(seedu, sidx, ku, np.uint64(2))
                        ps = u0 + _trunc_gauss(xi3, a_scale, clo_a, chi_a) \
                            * inv_display
                    va, vb, wa, wb = _phase_neighbors(phases, ps)
                    if abs(phases[va] - u0) > interval * (1.0 + 1e-9):
                        wa = 0.0
                    if abs(phases[vb] - u0) > interval * (1.0 + 1e-9):
                        wb = 0.0
                    if wa > 0.0:
                        wsum += wa
                    if wb > 0.0 and vb != va:
                        wsum += wb
                if wsum <= 0.0:
                    out_w[yy, xx, ch] = 1.0
                    continue
                total = 0.0
                for k in range(n_samples):
                    ku = np.uint64(k)
                    ps = u0
                    if jit_view == 1:
                        xi3 = _rng_u01(seedu, sidx, ku, np.uint64(2))
                        ps = u0 + _trunc_gauss(xi3, a_scale, clo_a, chi_a) \
                            * inv_display
                    va, vb, wa, wb = _phase_neighbors(phases, ps)
                    if abs(phases[va] - u0) > interval * (1.0 + 1e-9):
                        wa = 0.0
                    if abs(phases[vb] - u0) > interval * (1.0 + 1e-9):
                        wb = 0.0
                    if wa > 0.0:
                        total += wa / wsum
                    if wb > 0.0 and vb != va:
                        total += wb / wsum
                out_w[yy, xx, ch] = total
    return 0


@njit(**JIT)
def gauss_resample(out, src, n_samples, gx_scale, gy_scale, clo, chi, seed):
    """Downsample with a jittered truncated-Gaussian reconstruction filter."""
    ho, wo, _ = out.shape
    hs, ws, _ = src.shape
    seedu = np.uint64(seed)
    for yy in range(ho):
        for xx in range(wo):
            sidx = np.uint64(yy * wo + xx)
            for ch in range(3):
                acc = 0.0
                for k in range(n_samples):
                    ku = np.uint64(k)
                    xi1 = _rng_u01(seedu, sidx, ku, np.uint64(0))
                    xi2 = _rng_u01(seedu, sidx, ku, np.uint64(1))
                    nx = (xx + 0.5) / wo + _trunc_gauss(xi1, gx_scale, clo, chi)
                    ny = (yy + 0.5) / ho + _trunc_gauss(xi2, gy_scale, clo, chi)
                    fx = nx * ws - 0.5
                    fy = ny * hs - 0.5
                    acc += _bilinear_view(src.reshape(1, hs, ws, 3),
                                          0, fx, fy, ch, ws, hs)
                val = acc / n_samples
                val = min(max(val, 0.0), 1.0)
                out[yy, xx, ch] = np.uint8(val * 255.0 + 0.5)
    return 0
