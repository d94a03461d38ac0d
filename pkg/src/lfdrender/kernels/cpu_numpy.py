"""Pure-numpy implementations of the hot kernels.

Operation-for-operation mirror of cpu_numba.py: identical float64 arithmetic
in the same order on every lane, so the two backends produce bit-identical
buffers. Vectorized where the access pattern allows; scatter writes go
through np.minimum.at, which matches the single-threaded min-word semantics.
"""

import math

import numpy as np

from .common import GOLD, MIX1, MIX2, DEPTH_KEY_MAX, ROUGH_FLOOR

INV255 = 1.0 / 255.0
PI = math.pi

_U11 = np.uint64(11)
_U27 = np.uint64(27)
_U30 = np.uint64(30)
_U31 = np.uint64(31)
_U32 = np.uint64(32)

SLOT_C0 = (0, 3, 6, 7, 8)
SLOT_CN = (3, 3, 1, 1, 1)


# ---------------------------------------------------------------- rng / erfinv

def _mix64(z):
    with np.errstate(over="ignore"):
        z = (z ^ (z >> _U30)) * MIX1
        z = (z ^ (z >> _U27)) * MIX2
        return z ^ (z >> _U31)


def _rng_u01(seed, i0, i1, i2):
    seed = np.uint64(seed)
    with np.errstate(over="ignore"):
        z = _mix64(seed + GOLD * i0)
        z = _mix64(z + GOLD * i1)
        z = _mix64(z + GOLD * i2)
    return (z >> _U11).astype(np.float64) * (2.0 ** -53)


def _erfinv(x):
    x = np.asarray(x, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        w = -np.log((1.0 - x) * (1.0 + x))
        ws = w - 2.5
        p = np.full_like(ws, 2.81022636e-08)
        p = p * ws + 3.43273939e-07
        p = p * ws + -3.5233877e-06
        p = p * ws + -4.39150654e-06
        p = p * ws + 0.00021858087
        p = p * ws + -0.00125372503
        p = p * ws + -0.00417768164
        p = p * ws + 0.246640727
        p = p * ws + 1.50140941
        wb = np.sqrt(w) - 3.0
        q = np.full_like(wb, -0.000200214257)
        q = q * wb + 0.000100950558
        q = q * wb + 0.00134934322
        q = q * wb + -0.00367342844
        q = q * wb + 0.00573950773
        q = q * wb + -0.0076224613
        q = q * wb + 0.00943887047
        q = q * wb + 1.00167406
        q = q * wb + 2.83297682
        return np.where(w < 5.0, p, q) * x


def _trunc_gauss(xi, scale, clo, chi):
    t = clo + xi * (chi - clo)
    return scale * _erfinv(2.0 * t - 1.0)


# ------------------------------------------------------------------- shading

def _shade(alb, rough, metal, ao, nrm, vvec, shading):
    """Vector twin of the scalar shade: alb (N,3), nrm/vvec (N,3) unit."""
    lx, ly, lz = shading[0], shading[1], shading[2]
    light = shading[3:6]
    amb = shading[6:9]
    rough_c = np.minimum(np.maximum(rough, ROUGH_FLOOR), 1.0)
    alpha = rough_c * rough_c
    a2 = alpha * alpha
    ndl = nrm[:, 0] * lx + nrm[:, 1] * ly + nrm[:, 2] * lz
    ndv = nrm[:, 0] * vvec[:, 0] + nrm[:, 1] * vvec[:, 1] + nrm[:, 2] * vvec[:, 2]
    out = (amb[None, :] * ao[:, None]) * alb

    hx = lx + vvec[:, 0]
    hy = ly + vvec[:, 1]
    hz = lz + vvec[:, 2]
    hl = np.sqrt(hx * hx + hy * hy + hz * hz)
    cond = (ndl > 0.0) & (ndv > 0.0) & (hl > 1e-12)
    with np.errstate(divide="ignore", invalid="ignore"):
        hls = np.where(hl > 1e-12, hl, 1.0)
        hx = hx / hls
        hy = hy / hls
        hz = hz / hls
        ndh = np.maximum(nrm[:, 0] * hx + nrm[:, 1] * hy + nrm[:, 2] * hz, 0.0)
        hdv = np.maximum(hx * vvec[:, 0] + hy * vvec[:, 1] + hz * vvec[:, 2], 0.0)
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
        km = (1.0 - metal) * (1.0 / PI)
        f0 = 0.04 * (1.0 - metal)[:, None] + alb * metal[:, None]
        spec = f0 + (1.0 - f0) * f5[:, None]
        contrib = (alb * km[:, None] + dg[:, None] * spec) \
            * light[None, :] * ndl[:, None]
    out = out + np.where(cond[:, None], contrib, 0.0)
    return out


def _pack_word(rgb, key):
    with np.errstate(invalid="ignore"):
        r8 = (np.minimum(np.maximum(rgb[:, 0], 0.0), 1.0) * 255.0 + 0.5).astype(np.uint64)
        g8 = (np.minimum(np.maximum(rgb[:, 1], 0.0), 1.0) * 255.0 + 0.5).astype(np.uint64)
        b8 = (np.minimum(np.maximum(rgb[:, 2], 0.0), 1.0) * 255.0 + 0.5).astype(np.uint64)
    rgba = (r8 << np.uint64(24)) | (g8 << np.uint64(16)) \
        | (b8 << np.uint64(8)) | np.uint64(0xFF)
    return (key << _U32) | rgba


def _edge_inside(e, dx, dy):
    return (e > 0.0) | ((e == 0.0) & ((dy < 0.0) | ((dy == 0.0) & (dx > 0.0))))


# ------------------------------------------------------------- texture fetch

def _bilinear_gather(data, off, w, h, nch, u, v):
    """(K, nch) bilinear fetch with repeat wrap; mirrors the scalar order."""
    fx = u * w - 0.5
    fy = v * h - 0.5
    x0f = np.floor(fx)
    y0f = np.floor(fy)
    tx = fx - x0f
    ty = fy - y0f
    x0 = x0f.astype(np.int64) % w
    y0 = y0f.astype(np.int64) % h
    x1 = (x0 + 1) % w
    y1 = (y0 + 1) % h
    b00 = off + (y0 * w + x0) * nch
    b10 = off + (y0 * w + x1) * nch
    b01 = off + (y1 * w + x0) * nch
    b11 = off + (y1 * w + x1) * nch
    cidx = np.arange(nch, dtype=np.int64)
    c00 = data[b00[:, None] + cidx].astype(np.float64)
    c10 = data[b10[:, None] + cidx].astype(np.float64)
    c01 = data[b01[:, None] + cidx].astype(np.float64)
    c11 = data[b11[:, None] + cidx].astype(np.float64)
    txc = tx[:, None]
    tyc = ty[:, None]
    top = c00 + (c10 - c00) * txc
    bot = c01 + (c11 - c01) * txc
    return top + (bot - top) * tyc


def _trilinear_acc(data, lvl_ptr, lvl_off, lvl_w, lvl_h, nch, tex,
                   u, v, lod, weight, out):
    """Accumulate weight * trilinear fetch into out (K, nch), in place.

    Adds the two level terms separately — (weight*(1-f))*bilinear(l0) then
    (weight*f)*bilinear(l1) — so the per-lane addition sequence matches the
    scalar backend exactly.
    """
    p0 = int(lvl_ptr[tex])
    nlev = int(lvl_ptr[tex + 1]) - p0
    lod = np.asarray(lod, dtype=np.float64)
    if lod.ndim == 0:
        lod = np.full(u.shape[0], float(lod))
    lo = np.minimum(np.maximum(lod, 0.0), float(nlev - 1))
    l0 = np.floor(lo).astype(np.int64)
    l1 = np.minimum(l0 + 1, nlev - 1)
    f = lo - l0
    w0 = weight * (1.0 - f)
    w1 = weight * f
    for lev, ww in ((l0, w0), (l1, w1)):
        for lv in np.unique(lev):
            sel = np.nonzero(lev == lv)[0]
            li = p0 + int(lv)
            val = _bilinear_gather(data, int(lvl_off[li]), int(lvl_w[li]),
                                   int(lvl_h[li]), nch, u[sel], v[sel])
            out[sel] += ww[sel][:, None] * val


def _material_channels(atlas_data, lvl_ptr, lvl_off, lvl_w, lvl_h, tex_chan,
                       mat_tex, mat_scalar, m, u, v, lods, aniso_n, dua, dva):
    """(K, 9) material texel channels; lods is (K, 5), dua/dva (K,)."""
    k_n = u.shape[0]
    out = np.empty((k_n, 9))
    for s in range(5):
        c0 = SLOT_C0[s]
        cn = SLOT_CN[s]
        tex = int(mat_tex[m, s])
        if tex < 0:
            out[:, c0:c0 + cn] = mat_scalar[m, c0:c0 + cn][None, :]
            continue
        nch = int(tex_chan[tex])
        acc = np.zeros((k_n, nch))
        if aniso_n > 1:
            wgt = 1.0 / aniso_n
            for k in range(aniso_n):
                t = (k + 0.5) / aniso_n - 0.5
                _trilinear_acc(atlas_data, lvl_ptr, lvl_off, lvl_w, lvl_h,
                               nch, tex, u + t * dua, v + t * dva,
                               lods[:, s], wgt, acc)
        else:
            _trilinear_acc(atlas_data, lvl_ptr, lvl_off, lvl_w, lvl_h,
                           nch, tex, u, v, lods[:, s], 1.0, acc)
        out[:, c0:c0 + cn] = acc * mat_scalar[m, c0:c0 + cn][None, :]
    return out


# ------------------------------------------------------------ splat rendering

_QSX = np.array([-1.0, 1.0, 1.0, -1.0])
_QSY = np.array([-1.0, -1.0, 1.0, 1.0])


def _tri_screen_edges(tverts, ex, d, c2fw, c2fh, near, w_px, h_px):
    tz = tverts[:, :, 2]
    tzv = d - tz
    ok = np.all(tzv > near, axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        ndcx = (d * tverts[:, :, 0] - ex * tz) * c2fw / tzv
        ndcy = (d * tverts[:, :, 1]) * c2fh / tzv
    sx = (ndcx + 1.0) * 0.5 * w_px
    sy = (1.0 - ndcy) * 0.5 * h_px
    area2 = (sx[:, 1] - sx[:, 0]) * (sy[:, 2] - sy[:, 0]) \
        - (sy[:, 1] - sy[:, 0]) * (sx[:, 2] - sx[:, 0])
    valid = ok & (area2 != 0.0) & np.isfinite(area2)
    flip = valid & (area2 < 0.0)
    sx[flip, 1], sx[flip, 2] = sx[flip, 2], sx[flip, 1].copy()
    sy[flip, 1], sy[flip, 2] = sy[flip, 2], sy[flip, 1].copy()
    ia = np.array([0, 1, 2])
    ib = np.array([1, 2, 0])
    dx = sx[:, ib] - sx[:, ia]
    dy = sy[:, ib] - sy[:, ia]
    ea = -dy
    eb = dx
    ec = dy * sx[:, ia] - dx * sy[:, ia]
    return ea, eb, ec, dx, dy, valid.astype(np.uint8)


def fill_view_splats(words, ppos, ptri, puv, pnrm, pband, ptvmin, ptvmax,
                     tverts, tax, tay, text, tspuv, ttan, tbit,
                     ex, d, fw, fh, near, far, shading):
    """Splat every point into one view buffer (min-word depth resolve)."""
    h_px, w_px = words.shape
    c2fw = 2.0 / fw
    c2fh = 2.0 / fh
    inv_range = 1.0 / (far - near)

    ea, eb, ec, edx, edy, tvalid = _tri_screen_edges(
        tverts, ex, d, c2fw, c2fh, near, w_px, h_px)

    t = ptri.astype(np.int64)
    zvp = d - ppos[:, 2]
    valid = (zvp > near) & (zvp <= far)

    ext = text[t]
    axp = tax[t]
    ayp = tay[t]
    ox = ext[:, 0:1] * _QSX[None, :]
    oy = ext[:, 1:2] * _QSY[None, :]
    cx = ppos[:, 0:1] + ox * axp[:, 0:1] + oy * ayp[:, 0:1]
    cy = ppos[:, 1:2] + ox * axp[:, 1:2] + oy * ayp[:, 1:2]
    cz = ppos[:, 2:3] + ox * axp[:, 2:3] + oy * ayp[:, 2:3]
    czv = d - cz
    valid &= np.all(czv > near, axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        cnx = (d * cx - ex * cz) * c2fw / czv
        cny = (d * cy) * c2fh / czv
    csx = (cnx + 1.0) * 0.5 * w_px
    csy = (1.0 - cny) * 0.5 * h_px

    def shoelace(xs, ys):
        return (xs[:, 0] * ys[:, 1] - xs[:, 1] * ys[:, 0]) \
            + (xs[:, 1] * ys[:, 2] - xs[:, 2] * ys[:, 1]) \
            + (xs[:, 2] * ys[:, 3] - xs[:, 3] * ys[:, 2]) \
            + (xs[:, 3] * ys[:, 0] - xs[:, 0] * ys[:, 3])

    sh_ndc = shoelace(cnx, cny)
    sh_scr = shoelace(csx, csy)
    size_ndc = 0.5 * np.abs(sh_ndc)

    flipq = sh_scr < 0.0
    csx[flipq] = csx[flipq][:, ::-1]
    csy[flipq] = csy[flipq][:, ::-1]

    with np.errstate(invalid="ignore"):
        min_x = np.min(csx, axis=1)
        max_x = np.max(csx, axis=1)
        min_y = np.min(csy, axis=1)
        max_y = np.max(csy, axis=1)
    valid &= np.isfinite(min_x) & np.isfinite(max_x) \
        & np.isfinite(min_y) & np.isfinite(max_y)
    safe_x0 = np.where(valid, min_x, 0.0)
    safe_x1 = np.where(valid, max_x, -1.0)
    safe_y0 = np.where(valid, min_y, 0.0)
    safe_y1 = np.where(valid, max_y, -1.0)
    px0 = np.maximum(np.ceil(safe_x0 - 0.5).astype(np.int64), 0)
    px1 = np.minimum(np.floor(safe_x1 - 0.5).astype(np.int64), w_px - 1)
    py0 = np.maximum(np.ceil(safe_y0 - 0.5).astype(np.int64), 0)
    py1 = np.minimum(np.floor(safe_y1 - 0.5).astype(np.int64), h_px - 1)
    valid &= (px0 <= px1) & (py0 <= py1)

    roll = [1, 2, 3, 0]
    qdx = csx[:, roll] - csx
    qdy = csy[:, roll] - csy
    qa = -qdy
    qb = qdx
    qc = qdy * csx - qdx * csy

    # level-band interpolation factor from covered view area
    cover = np.minimum(size_ndc * 0.25 * w_px * h_px, 1.0)
    b0 = pband[:, 0]
    b1 = pband[:, 1]
    with np.errstate(divide="ignore", invalid="ignore"):
        vs = np.where(cover <= 1e-300, b1, tspuv[t] / np.where(
            cover <= 1e-300, 1.0, cover))
    vs = np.minimum(np.maximum(vs, b0), b1)
    with np.errstate(divide="ignore", invalid="ignore"):
        tfac = np.where(b1 > b0, (vs - b0) / np.where(b1 > b0, b1 - b0, 1.0), 0.0)
    a = ptvmin
    b = ptvmax
    tv = a + (b - a) * tfac[:, None]
    lo = np.minimum(a, b)
    hi = np.maximum(a, b)
    tv = np.minimum(np.maximum(tv, lo), hi)

    tnx = 2.0 * tv[:, 3] - 1.0
    tny = 2.0 * tv[:, 4] - 1.0
    tnz = 2.0 * tv[:, 5] - 1.0
    tanp = ttan[t]
    bitp = tbit[t]
    nx = tnx * tanp[:, 0] + tny * bitp[:, 0] + tnz * pnrm[:, 0]
    ny = tnx * tanp[:, 1] + tny * bitp[:, 1] + tnz * pnrm[:, 1]
    nz = tnx * tanp[:, 2] + tny * bitp[:, 2] + tnz * pnrm[:, 2]
    nl = np.sqrt(nx * nx + ny * ny + nz * nz)
    small = nl <= 1e-12
    with np.errstate(divide="ignore", invalid="ignore"):
        nls = np.where(small, 1.0, nl)
        nx = np.where(small, pnrm[:, 0], nx / nls)
        ny = np.where(small, pnrm[:, 1], ny / nls)
        nz = np.where(small, pnrm[:, 2], nz / nls)
    vx = ex - ppos[:, 0]
    vy = 0.0 - ppos[:, 1]
    vz = d - ppos[:, 2]
    vl = np.sqrt(vx * vx + vy * vy + vz * vz)
    with np.errstate(divide="ignore", invalid="ignore"):
        vx = vx / vl
        vy = vy / vl
        vz = vz / vl
    rgb = _shade(tv[:, 0:3], tv[:, 6], tv[:, 7], tv[:, 8],
                 np.stack([nx, ny, nz], axis=1),
                 np.stack([vx, vy, vz], axis=1), shading)
    rgb = np.where(valid[:, None], rgb, 0.0)
    kf = np.minimum(np.maximum((zvp - near) * inv_range, 0.0), 1.0)
    key = (kf * DEPTH_KEY_MAX).astype(np.uint64)
    word = _pack_word(rgb, key)

    sel = np.nonzero(valid)[0]
    if sel.size == 0:
        return 0
    wflat = words.reshape(-1)

    def scatter(idx):
        if idx.size == 0:
            return
        bpx0 = px0[idx]
        bpx1 = px1[idx]
        bpy0 = py0[idx]
        bpy1 = py1[idx]
        bqa = qa[idx]
        bqb = qb[idx]
        bqc = qc[idx]
        bqdx = qdx[idx]
        bqdy = qdy[idx]
        bt = t[idx]
        bword = word[idx]
        btv = tvalid[bt] == 1
        bea = ea[bt]
        beb = eb[bt]
        bec = ec[bt]
        bedx = edx[bt]
        bedy = edy[bt]
        max_w = int(np.max(bpx1 - bpx0)) + 1
        max_h = int(np.max(bpy1 - bpy0)) + 1
        for dy_o in range(max_h):
            yy = bpy0 + dy_o
            rowm = yy <= bpy1
            if not rowm.any():
                continue
            pcy = yy + 0.5
            for dx_o in range(max_w):
                xx = bpx0 + dx_o
                m = rowm & (xx <= bpx1)
                if not m.any():
                    continue
                pcx = xx + 0.5
                inside = m.copy()
                for k in range(4):
                    e = bqa[:, k] * pcx + bqb[:, k] * pcy + bqc[:, k]
                    inside &= _edge_inside(e, bqdx[:, k], bqdy[:, k])
                    if not inside.any():
                        break
                if not inside.any():
                    continue
                tri_in = np.ones_like(inside)
                for k in range(3):
                    e = bea[:, k] * pcx + beb[:, k] * pcy + bec[:, k]
                    tri_in &= _edge_inside(e, bedx[:, k], bedy[:, k])
                inside &= np.where(btv, tri_in, True)
                if not inside.any():
                    continue
                flat = yy * w_px + xx
                np.minimum.at(wflat, flat[inside], bword[inside])

    area_px = (px1[sel] - px0[sel] + 1) * (py1[sel] - py0[sel] + 1)
    small_sel = sel[area_px <= 1024]
    big_sel = sel[area_px > 1024]
    scatter(small_sel)
    for p in big_sel:
        scatter(np.array([p], dtype=np.int64))
    return 0


# --------------------------------------------------------------- rasterizer

def _clip_near(pos, uvs, nrm, d, near):
    out_pos = []
    out_uv = []
    out_nrm = []
    for i in range(3):
        j = (i + 1) % 3
        zi = d - pos[i][2]
        zj = d - pos[j][2]
        in_i = zi > near
        in_j = zj > near
        if in_i:
            out_pos.append(list(pos[i]))
            out_uv.append(list(uvs[i]))
            out_nrm.append(list(nrm[i]))
        if in_i != in_j:
            tt = (zi - near) / (zi - zj)
            out_pos.append([pos[i][c] + (pos[j][c] - pos[i][c]) * tt
                            for c in range(3)])
            out_uv.append([uvs[i][c] + (uvs[j][c] - uvs[i][c]) * tt
                           for c in range(2)])
            out_nrm.append([nrm[i][c] + (nrm[j][c] - nrm[i][c]) * tt
                            for c in range(3)])
    return out_pos, out_uv, out_nrm


def rasterize_view(words, tverts, tuv, tnrm, ttan, tbit, tmat,
                   atlas_data, lvl_ptr, lvl_off, lvl_w, lvl_h, tex_chan,
                   mat_tex, mat_scalar,
                   ex, d, fw, fh, near, far, shading, aniso_n):
    """Scanline-rasterize every triangle into one view buffer."""
    h_px, w_px = words.shape
    t_count = tverts.shape[0]
    c2fw = 2.0 / fw
    c2fh = 2.0 / fh
    inv_range = 1.0 / (far - near)
    wflat = words.reshape(-1)

    n_mat = mat_tex.shape[0]
    tex_w = np.zeros((n_mat, 5))
    tex_h = np.zeros((n_mat, 5))
    for m in range(n_mat):
        for s in range(5):
            tex = int(mat_tex[m, s])
            if tex >= 0:
                p0 = int(lvl_ptr[tex])
                tex_w[m, s] = float(lvl_w[p0])
                tex_h[m, s] = float(lvl_h[p0])

    for tidx in range(t_count):
        m = int(tmat[tidx])
        cp, cu, cn = _clip_near(tverts[tidx], tuv[tidx], tnrm[tidx], d, near)
        nv = len(cp)
        if nv < 3:
            continue
        for sub in range(nv - 2):
            idxs = (0, sub + 1, sub + 2)
            vsx = [0.0] * 3
            vsy = [0.0] * 3
            vinvz = [0.0] * 3
            vu = [0.0] * 3
            vv = [0.0] * 3
            vnx = [0.0] * 3
            vny = [0.0] * 3
            vnz = [0.0] * 3
            ok = True
            for c in range(3):
                idx = idxs[c]
                x, y, z = cp[idx]
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
                vu[c] = cu[idx][0] * inv_z
                vv[c] = cu[idx][1] * inv_z
                vnx[c] = cn[idx][0] * inv_z
                vny[c] = cn[idx][1] * inv_z
                vnz[c] = cn[idx][2] * inv_z
            if not ok:
                continue
            area2 = (vsx[1] - vsx[0]) * (vsy[2] - vsy[0]) \
                - (vsy[1] - vsy[0]) * (vsx[2] - vsx[0])
            if area2 == 0.0 or not math.isfinite(area2):
                continue
            if area2 < 0.0:
                for arr in (vsx, vsy, vinvz, vu, vv, vnx, vny, vnz):
                    arr[1], arr[2] = arr[2], arr[1]
                area2 = -area2

            edges = []
            for e in range(3):
                a_i = e
                b_i = (e + 1) % 3
                dx = vsx[b_i] - vsx[a_i]
                dy = vsy[b_i] - vsy[a_i]
                edges.append((-dy, dx, dy * vsx[a_i] - dx * vsy[a_i], dx, dy))

            inv_area = 1.0 / area2

            def lincoef(q0, q1, q2):
                a = (q0 * edges[1][0] + q1 * edges[2][0] + q2 * edges[0][0]) * inv_area
                b = (q0 * edges[1][1] + q1 * edges[2][1] + q2 * edges[0][1]) * inv_area
                c = (q0 * edges[1][2] + q1 * edges[2][2] + q2 * edges[0][2]) * inv_area
                return a, b, c

            aw, bw, cw = lincoef(vinvz[0], vinvz[1], vinvz[2])
            au, bu, cuc = lincoef(vu[0], vu[1], vu[2])
            av, bv, cv = lincoef(vv[0], vv[1], vv[2])
            anx, bnx, cnx2 = lincoef(vnx[0], vnx[1], vnx[2])
            any_, bny, cny2 = lincoef(vny[0], vny[1], vny[2])
            anz, bnz, cnz2 = lincoef(vnz[0], vnz[1], vnz[2])

            min_x = min(vsx)
            max_x = max(vsx)
            min_y = min(vsy)
            max_y = max(vsy)
            px0 = max(int(math.ceil(min_x - 0.5)), 0)
            px1 = min(int(math.floor(max_x - 0.5)), w_px - 1)
            py0 = max(int(math.ceil(min_y - 0.5)), 0)
            py1 = min(int(math.floor(max_y - 0.5)), h_px - 1)
            if px0 > px1 or py0 > py1:
                continue

            pcx = np.arange(px0, px1 + 1, dtype=np.float64) + 0.5
            pcy = np.arange(py0, py1 + 1, dtype=np.float64) + 0.5
            pcxg = pcx[None, :]
            pcyg = pcy[:, None]
            mask = np.ones((pcy.shape[0], pcx.shape[0]), dtype=bool)
            for (a_c, b_c, c_c, dx, dy) in edges:
                e = a_c * pcxg + b_c * pcyg + c_c
                mask &= _edge_inside(e, dx, dy)
            if not mask.any():
                continue
            wlin = aw * pcxg + bw * pcyg + cw
            mask &= wlin > 0.0
            with np.errstate(divide="ignore", invalid="ignore"):
                zv = 1.0 / np.where(wlin > 0.0, wlin, 1.0)
            mask &= (zv > near) & (zv <= far)
            if not mask.any():
                continue

            ys, xs = np.nonzero(mask)
            pcx_s = pcxg[0, xs]
            pcy_s = pcyg[ys, 0]
            wlin_s = wlin[ys, xs]
            zv_s = zv[ys, xs]
            ulin = au * pcx_s + bu * pcy_s + cuc
            vlin = av * pcx_s + bv * pcy_s + cv
            u = ulin / wlin_s
            v = vlin / wlin_s
            iz2 = 1.0 / (wlin_s * wlin_s)
            dudx = (au * wlin_s - ulin * aw) * iz2
            dvdx = (av * wlin_s - vlin * aw) * iz2
            dudy = (bu * wlin_s - ulin * bw) * iz2
            dvdy = (bv * wlin_s - vlin * bw) * iz2

            k_n = pcx_s.shape[0]
            lods = np.zeros((k_n, 5))
            for s in range(5):
                tex = int(mat_tex[m, s])
                if tex < 0:
                    continue
                xt = tex_w[m, s]
                yt = tex_h[m, s]
                gx = dudx * xt
                gy = dvdx * yt
                rx = np.sqrt(gx * gx + gy * gy)
                gx = dudy * xt
                gy = dvdy * yt
                ry = np.sqrt(gx * gx + gy * gy)
                rmax = np.maximum(rx, ry)
                rmin = np.minimum(rx, ry)
                if aniso_n > 1:
                    rho = np.maximum(rmin, rmax / aniso_n)
                else:
                    rho = rmax
                lods[:, s] = np.log2(np.maximum(rho, 1e-12))
            dx2 = dudx * dudx + dvdx * dvdx
            dy2 = dudy * dudy + dvdy * dvdy
            usey = dy2 > dx2
            dua = np.where(usey, dudy, dudx)
            dva = np.where(usey, dvdy, dvdx)

            tv = _material_channels(atlas_data, lvl_ptr, lvl_off, lvl_w,
                                    lvl_h, tex_chan, mat_tex, mat_scalar,
                                    m, u, v, lods, aniso_n, dua, dva)

            nxl = anx * pcx_s + bnx * pcy_s + cnx2
            nyl = any_ * pcx_s + bny * pcy_s + cny2
            nzl = anz * pcx_s + bnz * pcy_s + cnz2
            nx = nxl / wlin_s
            ny = nyl / wlin_s
            nz = nzl / wlin_s
            nl = np.sqrt(nx * nx + ny * ny + nz * nz)
            big = nl > 1e-12
            with np.errstate(divide="ignore", invalid="ignore"):
                nls = np.where(big, nl, 1.0)
                nx = np.where(big, nx / nls, nx)
                ny = np.where(big, ny / nls, ny)
                nz = np.where(big, nz / nls, nz)
            tnx = 2.0 * tv[:, 3] - 1.0
            tny = 2.0 * tv[:, 4] - 1.0
            tnz = 2.0 * tv[:, 5] - 1.0
            pnx = tnx * ttan[tidx, 0] + tny * tbit[tidx, 0] + tnz * nx
            pny = tnx * ttan[tidx, 1] + tny * tbit[tidx, 1] + tnz * ny
            pnz = tnx * ttan[tidx, 2] + tny * tbit[tidx, 2] + tnz * nz
            nl = np.sqrt(pnx * pnx + pny * pny + pnz * pnz)
            big = nl > 1e-12
            with np.errstate(divide="ignore", invalid="ignore"):
                nls = np.where(big, nl, 1.0)
                pnx = np.where(big, pnx / nls, nx)
                pny = np.where(big, pny / nls, ny)
                pnz = np.where(big, pnz / nls, nz)

            ndcx = 2.0 * pcx_s / w_px - 1.0
            ndcy = 1.0 - 2.0 * pcy_s / h_px
            xf = ndcx * fw * 0.5
            yf = ndcy * fh * 0.5
            s_ray = zv_s / d
            wx = ex + (xf - ex) * s_ray
            wy = yf * s_ray
            wz = d - zv_s
            vx = ex - wx
            vy = 0.0 - wy
            vz = d - wz
            vl = np.sqrt(vx * vx + vy * vy + vz * vz)
            vx = vx / vl
            vy = vy / vl
            vz = vz / vl
            rgb = _shade(tv[:, 0:3], tv[:, 6], tv[:, 7], tv[:, 8],
                         np.stack([pnx, pny, pnz], axis=1),
                         np.stack([vx, vy, vz], axis=1), shading)
            kf = np.minimum(np.maximum((zv_s - near) * inv_range, 0.0), 1.0)
            key = (kf * DEPTH_KEY_MAX).astype(np.uint64)
            wordv = _pack_word(rgb, key)
            flat = (ys + py0) * w_px + (xs + px0)
            np.minimum.at(wflat, flat, wordv)
    return 0


# ------------------------------------------------------------ point emission

def _closest_on_tri2d(ax, ay, bx, by, cx, cy, px, py):
    """Closest points of the 2D triangles (a, b, c) to (px, py), vectorized.

    Branch cascade mirrors the scalar backend exactly: later selections
    override earlier defaults so the first matching region wins.
    """
    abx = bx - ax
    aby = by - ay
    acx = cx - ax
    acy = cy - ay
    apx = px - ax
    apy = py - ay
    d1 = abx * apx + aby * apy
    d2 = acx * apx + acy * apy
    bpx = px - bx
    bpy = py - by
    d3 = abx * bpx + aby * bpy
    d4 = acx * bpx + acy * bpy
    cpx = px - cx
    cpy = py - cy
    d5 = abx * cpx + aby * cpy
    d6 = acx * cpx + acy * cpy
    vc = d1 * d4 - d3 * d2
    vb = d5 * d2 - d1 * d6
    va = d3 * d6 - d5 * d4
    m1 = (d1 <= 0.0) & (d2 <= 0.0)
    m2 = (d3 >= 0.0) & (d4 <= d3)
    m3 = (vc <= 0.0) & (d1 >= 0.0) & (d3 <= 0.0)
    m4 = (d6 >= 0.0) & (d5 <= d6)
    m5 = (vb <= 0.0) & (d2 >= 0.0) & (d6 <= 0.0)
    m6 = (va <= 0.0) & ((d4 - d3) >= 0.0) & ((d5 - d6) >= 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        s3 = d1 / np.where(m3, d1 - d3, 1.0)
        s5 = d2 / np.where(m5, d2 - d6, 1.0)
        s6 = (d4 - d3) / np.where(m6, (d4 - d3) + (d5 - d6), 1.0)
        dsum = va + vb + vc
        denom = 1.0 / np.where(dsum != 0.0, dsum, 1.0)
    sv = vb * denom
    sw = vc * denom
    qx = ax + abx * sv + acx * sw
    qy = ay + aby * sv + acy * sw
    qx = np.where(m6, bx + s6 * (cx - bx), qx)
    qy = np.where(m6, by + s6 * (cy - by), qy)
    qx = np.where(m5, ax + s5 * acx, qx)
    qy = np.where(m5, ay + s5 * acy, qy)
    qx = np.where(m4, cx, qx)
    qy = np.where(m4, cy, qy)
    qx = np.where(m3, ax + s3 * abx, qx)
    qy = np.where(m3, ay + s3 * aby, qy)
    qx = np.where(m2, bx, qx)
    qy = np.where(m2, by, qy)
    qx = np.where(m1, ax, qx)
    qy = np.where(m1, ay, qy)
    return qx, qy


def _cell_coords(v2d, grid, ncell, active):
    """Flattened (tri, j, i)-ordered candidate points for emission.

    Returns (tri, px, py, emit, centroid, cells): cells whose centers lie
    inside their triangle emit at the center; boundary cells whose centers
    sit within half a cell diagonal of the triangle emit at the closest
    surface point; single-cell grids emit the centroid (flagged so exact
    one-third barycentrics are used downstream).
    """
    t_count = v2d.shape[0]
    nx = np.where(active == 1, ncell[:, 0], 0).astype(np.int64)
    ny = np.where(active == 1, ncell[:, 1], 0).astype(np.int64)
    cells = nx * ny
    total = int(cells.sum())
    tri = np.repeat(np.arange(t_count, dtype=np.int64), cells)
    if total == 0:
        z = np.zeros(0)
        zb = np.zeros(0, dtype=bool)
        return tri, z, z, zb, zb, cells
    starts = np.concatenate([[0], np.cumsum(cells)[:-1]])
    intra = np.arange(total, dtype=np.int64) - np.repeat(starts, cells)
    i = intra % np.repeat(np.maximum(nx, 1), cells)
    j = intra // np.repeat(np.maximum(nx, 1), cells)
    cx = grid[tri, 0] + (i + 0.5) * grid[tri, 2]
    cy = grid[tri, 1] + (j + 0.5) * grid[tri, 3]
    x0 = v2d[tri, 0, 0]
    y0 = v2d[tri, 0, 1]
    x1 = v2d[tri, 1, 0]
    y1 = v2d[tri, 1, 1]
    x2 = v2d[tri, 2, 0]
    y2 = v2d[tri, 2, 1]
    d0 = (x1 - x0) * (cy - y0) - (y1 - y0) * (cx - x0)
    d1 = (x2 - x1) * (cy - y1) - (y2 - y1) * (cx - x1)
    d2 = (x0 - x2) * (cy - y2) - (y0 - y2) * (cx - x2)
    area = (x1 - x0) * (y2 - y0) - (y1 - y0) * (x2 - x0)
    pos_side = (d0 >= 0.0) & (d1 >= 0.0) & (d2 >= 0.0)
    neg_side = (d0 <= 0.0) & (d1 <= 0.0) & (d2 <= 0.0)
    inside = np.where(area >= 0.0, pos_side, neg_side)
    # boundary clamping works in cell units so anisotropic grids keep the
    # same reach per axis; emit within half the unit-cell diagonal
    gx = grid[tri, 2]
    gy = grid[tri, 3]
    igx = 1.0 / gx
    igy = 1.0 / gy
    qx, qy = _closest_on_tri2d(x0 * igx, y0 * igy, x1 * igx, y1 * igy,
                               x2 * igx, y2 * igy, cx * igx, cy * igy)
    ddx = cx * igx - qx
    ddy = cy * igy - qy
    emit = inside | (ddx * ddx + ddy * ddy <= 0.5)
    px = np.where(inside, cx, qx * gx)
    py = np.where(inside, cy, qy * gy)
    third = 1.0 / 3.0
    centroid = np.repeat(cells == 1, cells)
    px = np.where(centroid, (x0 + x1 + x2) * third, px)
    py = np.where(centroid, (y0 + y1 + y2) * third, py)
    emit = emit | centroid
    return tri, px, py, emit, centroid, cells


def count_grid_points(v2d, grid, ncell, active):
    """Points each triangle will emit (the rule emit_grid_points applies)."""
    t_count = v2d.shape[0]
    tri, _, _, emit, _, _ = _cell_coords(v2d, grid, ncell, active)
    counts = np.bincount(tri[emit], minlength=t_count).astype(np.int64)
    counts[(active == 1) & (counts == 0)] = 1
    counts[active == 0] = 0
    return counts


def emit_grid_points(offsets, v2d, grid, ncell, active,
                     tcent, tax, tay, tuv, tnrm, tmat, tband,
                     tlodmin, tlodmax,
                     atlas_data, lvl_ptr, lvl_off, lvl_w, lvl_h, tex_chan,
                     mat_tex, mat_scalar,
                     out_pos, out_uv, out_nrm, out_band,
                     out_tvmin, out_tvmax, out_tri):
    """Emit splat points on each active triangle's sampling grid."""
    t_count = v2d.shape[0]
    tri_c, px_c, py_c, emit, cen_c, _ = _cell_coords(v2d, grid, ncell, active)
    tri = tri_c[emit]
    cx = px_c[emit]
    cy = py_c[emit]
    cen = cen_c[emit]
    grid_counts = np.bincount(tri, minlength=t_count).astype(np.int64)
    # rank of each kept cell within its triangle (cells arrive tri-ordered)
    starts = np.concatenate([[0], np.cumsum(grid_counts)[:-1]])
    ranks = np.arange(tri.shape[0], dtype=np.int64) - np.repeat(starts, grid_counts)
    slots = offsets[tri] + ranks

    # centroid fallback for active triangles whose grid emitted nothing
    fb = np.nonzero((active == 1) & (grid_counts == 0))[0]
    third = 1.0 / 3.0
    if fb.size:
        fcx = (v2d[fb, 0, 0] + v2d[fb, 1, 0] + v2d[fb, 2, 0]) * third
        fcy = (v2d[fb, 0, 1] + v2d[fb, 1, 1] + v2d[fb, 2, 1]) * third
        tri = np.concatenate([tri, fb])
        cx = np.concatenate([cx, fcx])
        cy = np.concatenate([cy, fcy])
        cen = np.concatenate([cen, np.ones(fb.size, dtype=bool)])
        slots = np.concatenate([slots, offsets[fb]])

    if tri.size == 0:
        return 0

    x0 = v2d[tri, 0, 0]
    y0 = v2d[tri, 0, 1]
    x1 = v2d[tri, 1, 0]
    y1 = v2d[tri, 1, 1]
    x2 = v2d[tri, 2, 0]
    y2 = v2d[tri, 2, 1]
    darea = (x1 - x0) * (y2 - y0) - (y1 - y0) * (x2 - x0)
    with np.errstate(divide="ignore", invalid="ignore"):
        l0 = ((x1 - cx) * (y2 - cy) - (y1 - cy) * (x2 - cx)) / darea
        l1 = ((x2 - cx) * (y0 - cy) - (y2 - cy) * (x0 - cx)) / darea
    l2 = 1.0 - l0 - l1
    # centroid emissions carry exact one-third weights
    l0 = np.where(cen, third, l0)
    l1 = np.where(cen, third, l1)
    l2 = np.where(cen, third, l2)

    out_tri[slots] = tri.astype(out_tri.dtype)
    for c in range(3):
        out_pos[slots, c] = tcent[tri, c] + cx * tax[tri, c] + cy * tay[tri, c]
    u = l0 * tuv[tri, 0, 0] + l1 * tuv[tri, 1, 0] + l2 * tuv[tri, 2, 0]
    v = l0 * tuv[tri, 0, 1] + l1 * tuv[tri, 1, 1] + l2 * tuv[tri, 2, 1]
    out_uv[slots, 0] = u
    out_uv[slots, 1] = v
    nx = l0 * tnrm[tri, 0, 0] + l1 * tnrm[tri, 1, 0] + l2 * tnrm[tri, 2, 0]
    ny = l0 * tnrm[tri, 0, 1] + l1 * tnrm[tri, 1, 1] + l2 * tnrm[tri, 2, 1]
    nz = l0 * tnrm[tri, 0, 2] + l1 * tnrm[tri, 1, 2] + l2 * tnrm[tri, 2, 2]
    nl = np.sqrt(nx * nx + ny * ny + nz * nz)
    big = nl > 1e-12
    with np.errstate(divide="ignore", invalid="ignore"):
        nls = np.where(big, nl, 1.0)
        nx = np.where(big, nx / nls, nx)
        ny = np.where(big, ny / nls, ny)
        nz = np.where(big, nz / nls, nz)
    out_nrm[slots, 0] = nx
    out_nrm[slots, 1] = ny
    out_nrm[slots, 2] = nz
    out_band[slots, 0] = tband[tri, 0]
    out_band[slots, 1] = tband[tri, 1]

    mats = tmat[tri].astype(np.int64)
    for m in np.unique(mats):
        pm = np.nonzero(mats == m)[0]
        up = u[pm]
        vp = v[pm]
        tp = tri[pm]
        sp = slots[pm]
        for s in range(5):
            c0 = SLOT_C0[s]
            cn = SLOT_CN[s]
            tex = int(mat_tex[m, s])
            if tex < 0:
                for c in range(cn):
                    out_tvmin[sp, c0 + c] = mat_scalar[m, c0 + c]
                    out_tvmax[sp, c0 + c] = mat_scalar[m, c0 + c]
                continue
            nch = int(tex_chan[tex])
            vmin = np.zeros((pm.shape[0], nch))
            vmax = np.zeros((pm.shape[0], nch))
            _trilinear_acc(atlas_data, lvl_ptr, lvl_off, lvl_w, lvl_h,
                           nch, tex, up, vp, tlodmin[tp, s], 1.0, vmin)
            _trilinear_acc(atlas_data, lvl_ptr, lvl_off, lvl_w, lvl_h,
                           nch, tex, up, vp, tlodmax[tp, s], 1.0, vmax)
            for c in range(cn):
                out_tvmin[sp, c0 + c] = vmin[:, c] * mat_scalar[m, c0 + c]
                out_tvmax[sp, c0 + c] = vmax[:, c] * mat_scalar[m, c0 + c]
    return 0


# -------------------------------------------------------------- interleaving

def _bilinear_views(views, vi, fx, fy, ch, w, h):
    x0f = np.floor(fx)
    y0f = np.floor(fy)
    tx = fx - x0f
    ty = fy - y0f
    x0 = np.minimum(np.maximum(x0f.astype(np.int64), 0), w - 1)
    y0 = np.minimum(np.maximum(y0f.astype(np.int64), 0), h - 1)
    x1 = np.minimum(np.maximum(x0f.astype(np.int64) + 1, 0), w - 1)
    y1 = np.minimum(np.maximum(y0f.astype(np.int64) + 1, 0), h - 1)
    c00 = views[vi, y0, x0, ch].astype(np.float64) * INV255
    c10 = views[vi, y0, x1, ch].astype(np.float64) * INV255
    c01 = views[vi, y1, x0, ch].astype(np.float64) * INV255
    c11 = views[vi, y1, x1, ch].astype(np.float64) * INV255
    top = c00 + (c10 - c00) * tx
    bot = c01 + (c11 - c01) * tx
    return top + (bot - top) * ty


def _phase_neighbors(phases, ps):
    n = phases.shape[0]
    j = np.searchsorted(phases, ps, side="left")
    va = np.minimum(np.maximum(j - 1, 0), n - 1)
    vb = np.minimum(j, n - 1)
    p0 = phases[va]
    p1 = phases[vb]
    den = p1 - p0
    good = den > 1e-15
    with np.errstate(divide="ignore", invalid="ignore"):
        w1 = np.where(good, (ps - p0) / np.where(good, den, 1.0), 0.0)
    vb = np.where(good, vb, va)
    return va, vb, 1.0 - w1, w1


def _row_band_phases(w_p, y, tan_tilt, ratio, l_sub):
    xsub = np.arange(w_p * 3, dtype=np.float64)
    t = (xsub[None, :] - tan_tilt * y[:, None] * ratio) / l_sub
    return t - np.floor(t)


def interleave_views(out, views, phases, y0, y1,
                     tan_tilt, ratio, l_sub, n_display, uniform,
                     n_samples, jit_space, jit_view,
                     sx_scale, sy_scale, clo_s, chi_s,
                     a_scale, clo_a, chi_a, interval, seed):
    """Fill panel rows [y0, y1) of the subpixel image from the views."""
    h_p, w_p, _ = out.shape
    n_views, vh, vw, _ = views.shape
    wsub = w_p * 3
    inv_display = 1.0 / n_display
    seedu = np.uint64(seed)
    chunk = 16
    for ys in range(y0, y1, chunk):
        ye = min(ys + chunk, y1)
        yrow = np.arange(ys, ye, dtype=np.float64)
        u0 = _row_band_phases(w_p, yrow, tan_tilt, ratio, l_sub)  # (R, wsub)
        rn = ye - ys
        xsub = np.arange(wsub, dtype=np.float64)
        nx = np.broadcast_to((xsub + 0.5) / wsub, (rn, wsub))
        ny = np.broadcast_to(((yrow + 0.5) / h_p)[:, None], (rn, wsub))
        ch = np.broadcast_to(
            (np.arange(wsub, dtype=np.int64) % 3)[None, :], (rn, wsub))
        u0f = u0.reshape(-1)
        nxf = nx.reshape(-1)
        nyf = ny.reshape(-1)
        chf = ch.reshape(-1)
        if n_samples == 0:
            if uniform == 1:
                vi = np.minimum((u0f * n_display).astype(np.int64), n_views - 1)
            else:
                va, vb, wa, wb = _phase_neighbors(phases, u0f)
                vi = np.where(wa >= wb, va, vb)
            sx = np.minimum((nxf * vw).astype(np.int64), vw - 1)
            sy = np.minimum((nyf * vh).astype(np.int64), vh - 1)
            vals = views[vi, sy, sx, chf]
            out.reshape(-1)[ys * wsub: ye * wsub] = vals
            continue
        sidx = (np.arange(ys * wsub, ye * wsub)).astype(np.uint64)
        acc = np.zeros(rn * wsub)
        wsum = np.zeros(rn * wsub)
        for k in range(n_samples):
            ku = np.uint64(k)
            pxn = nxf
            pyn = nyf
            if jit_space == 1:
                xi1 = _rng_u01(seedu, sidx, ku, np.uint64(0))
                xi2 = _rng_u01(seedu, sidx, ku, np.uint64(1))
                pxn = nxf + _trunc_gauss(xi1, sx_scale, clo_s, chi_s)
                pyn = nyf + _trunc_gauss(xi2, sy_scale, clo_s, chi_s)
            ps = u0f
            if jit_view == 1:
                xi3 = _rng_u01(seedu, sidx, ku, np.uint64(2))
                ps = u0f + _trunc_gauss(xi3, a_scale, clo_a, chi_a) * inv_display
            va, vb, wa, wb = _phase_neighbors(phases, ps)
            wa = np.where(np.abs(phases[va] - u0f) > interval * (1.0 + 1e-9),
                          0.0, wa)
            wb = np.where(np.abs(phases[vb] - u0f) > interval * (1.0 + 1e-9),
                          0.0, wb)
            fx = pxn * vw - 0.5
            fy = pyn * vh - 0.5
            ma = wa > 0.0
            if ma.any():
                bv = _bilinear_views(views, va[ma], fx[ma], fy[ma], chf[ma],
                                     vw, vh)
                np.add.at(acc, np.nonzero(ma)[0], wa[ma] * bv)
                np.add.at(wsum, np.nonzero(ma)[0], wa[ma])
            mb = (wb > 0.0) & (vb != va)
            if mb.any():
                bv = _bilinear_views(views, vb[mb], fx[mb], fy[mb], chf[mb],
                                     vw, vh)
                np.add.at(acc, np.nonzero(mb)[0], wb[mb] * bv)
                np.add.at(wsum, np.nonzero(mb)[0], wb[mb])
        good = wsum > 0.0
        with np.errstate(divide="ignore", invalid="ignore"):
            val = np.where(good, acc / np.where(good, wsum, 1.0), 0.0)
        val = np.minimum(np.maximum(val, 0.0), 1.0)
        vals = (val * 255.0 + 0.5).astype(np.uint8)
        if not good.all():
            bad = np.nonzero(~good)[0]
            dist = np.abs(phases[None, :] - u0f[bad][:, None])
            best = np.argmin(dist, axis=1)
            sx = np.minimum((nxf[bad] * vw).astype(np.int64), vw - 1)
            sy = np.minimum((nyf[bad] * vh).astype(np.int64), vh - 1)
            vals[bad] = views[best, sy, sx, chf[bad]]
        out.reshape(-1)[ys * wsub: ye * wsub] = vals
    return 0


def interleave_weights(out_w, views_shape_vh, views_shape_vw, phases, y0, y1,
                       tan_tilt, ratio, l_sub, n_display, uniform,
                       n_samples, jit_space, jit_view,
                       sx_scale, sy_scale, clo_s, chi_s,
                       a_scale, clo_a, chi_a, interval, seed):
    """Audit twin of interleave_views: sum of normalized sample weights."""
    h_p, w_p, _ = out_w.shape
    wsub = w_p * 3
    inv_display = 1.0 / n_display
    seedu = np.uint64(seed)
    chunk = 16
    for ys in range(y0, y1, chunk):
        ye = min(ys + chunk, y1)
        yrow = np.arange(ys, ye, dtype=np.float64)
        u0 = _row_band_phases(w_p, yrow, tan_tilt, ratio, l_sub)
        rn = ye - ys
        u0f = u0.reshape(-1)
        if n_samples == 0:
            out_w.reshape(-1)[ys * wsub: ye * wsub] = 1.0
            continue
        sidx = (np.arange(ys * wsub, ye * wsub)).astype(np.uint64)
        wsum = np.zeros(rn * wsub)
        walls = []
        for k in range(n_samples):
            ku = np.uint64(k)
            ps = u0f
            if jit_view == 1:
                xi3 = _rng_u01(seedu, sidx, ku, np.uint64(2))
                ps = u0f + _trunc_gauss(xi3, a_scale, clo_a, chi_a) * inv_display
            va, vb, wa, wb = _phase_neighbors(phases, ps)
            wa = np.where(np.abs(phases[va] - u0f) > interval * (1.0 + 1e-9),
                          0.0, wa)
            wb = np.where(np.abs(phases[vb] - u0f) > interval * (1.0 + 1e-9),
                          0.0, wb)
            wb = np.where(vb != va, wb, 0.0)
            wa = np.where(wa > 0.0, wa, 0.0)
            wb = np.where(wb > 0.0, wb, 0.0)
            wsum += wa
            wsum += wb
            walls.append((wa, wb))
        total = np.zeros(rn * wsub)
        good = wsum > 0.0
        wsafe = np.where(good, wsum, 1.0)
        for wa, wb in walls:
            total += np.where(wa > 0.0, wa / wsafe, 0.0)
            total += np.where(wb > 0.0, wb / wsafe, 0.0)
        total = np.where(good, total, 1.0)
        out_w.reshape(-1)[ys * wsub: ye * wsub] = total
    return 0


def gauss_resample(out, src, n_samples, gx_scale, gy_scale, clo, chi, seed):
    """Downsample with a jittered truncated-Gaussian reconstruction filter."""
    ho, wo, _ = out.shape
    hs, ws, _ = src.shape
    seedu = np.uint64(seed)
    src4 = src.reshape(1, hs, ws, 3)
    chunk = max(1, 262144 // max(wo, 1))
    for ys in range(0, ho, chunk):
        ye = min(ys + chunk, ho)
        rn = ye - ys
        yy = np.repeat(np.arange(ys, ye, dtype=np.int64), wo)
        xx = np.tile(np.arange(wo, dtype=np.int64), rn)
        sidx = (yy * wo + xx).astype(np.uint64)
        cxn = (xx + 0.5) / wo
        cyn = (yy + 0.5) / ho
        zeros = np.zeros(rn * wo, dtype=np.int64)
        for ch in range(3):
            acc = np.zeros(rn * wo)
            for k in range(n_samples):
                ku = np.uint64(k)
                xi1 = _rng_u01(seedu, sidx, ku, np.uint64(0))
                xi2 = _rng_u01(seedu, sidx, ku, np.uint64(1))
                nx = cxn + _trunc_gauss(xi1, gx_scale, clo, chi)
                ny = cyn + _trunc_gauss(xi2, gy_scale, clo, chi)
                fx = nx * ws - 0.5
                fy = ny * hs - 0.5
                acc += _bilinear_views(src4, zeros, fx, fy,
                                       np.full(rn * wo, ch, dtype=np.int64),
                                       ws, hs)
            val = acc / n_samples
            val = np.minimum(np.maximum(val, 0.0), 1.0)
            out[ys:ye, :, ch] = (val * 255.0 + 0.5).astype(np.uint8).reshape(rn, wo)
    return 0
