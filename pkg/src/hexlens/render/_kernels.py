"""Compiled tile rasterization and compositing kernels.

Scalar logic mirrors ``hexlens.render.shading`` /
``hexlens.render.composite`` exactly; the test suite cross-checks both
paths. Kernels are nogil so image tiles can run on a thread pool, and
every tile's fragment stream is generated in triangle submission order,
which makes the output independent of the thread count.
"""
from __future__ import annotations

import math

import numpy as np
from numba import njit

KIND_FOCUS_EDGE = 0
KIND_CONTEXT_EDGE = 1
KIND_FOCUS_FACE = 2
KIND_CONTEXT_FACE = 3
KIND_HALO = 4

FOCUS_EDGE_DARKEN = 0.8
CONTEXT_EDGE_BRIGHTEN = 1.2
ALPHA_CUTOFF = 0.999

_JIT = dict(cache=True, nogil=True)


@njit(**_JIT)
def _tf_eval(t, tf_x, tf_rgb, tf_a):
    n = tf_x.shape[0]
    if t <= tf_x[0]:
        return tf_rgb[0, 0], tf_rgb[0, 1], tf_rgb[0, 2], tf_a[0]
    if t >= tf_x[n - 1]:
        return tf_rgb[n - 1, 0], tf_rgb[n - 1, 1], tf_rgb[n - 1, 2], tf_a[n - 1]
    k = 0
    for i in range(n - 1):
        if tf_x[i + 1] >= t:
            k = i
            break
    span = tf_x[k + 1] - tf_x[k]
    if span == 0.0:
        u = 0.0
    else:
        u = (t - tf_x[k]) / span
    r = tf_rgb[k, 0] * (1.0 - u) + tf_rgb[k + 1, 0] * u
    g = tf_rgb[k, 1] * (1.0 - u) + tf_rgb[k + 1, 1] * u
    b = tf_rgb[k, 2] * (1.0 - u) + tf_rgb[k + 1, 2] * u
    a = tf_a[k] * (1.0 - u) + tf_a[k + 1] * u
    return r, g, b, a


@njit(**_JIT)
def _smoothstep(a, b, x):
    t = (x - a) / (b - a)
    if t < 0.0:
        t = 0.0
    elif t > 1.0:
        t = 1.0
    return t * t * (3.0 - 2.0 * t)


@njit(**_JIT)
def _seg_dist(px, py, pz, ax, ay, az, bx, by, bz):
    abx = bx - ax
    aby = by - ay
    abz = bz - az
    denom = abx * abx + aby * aby + abz * abz
    if denom == 0.0:
        dx = px - ax
        dy = py - ay
        dz = pz - az
        return math.sqrt(dx * dx + dy * dy + dz * dz), 0.0
    t = ((px - ax) * abx + (py - ay) * aby + (pz - az) * abz) / denom
    if t < 0.0:
        t = 0.0
    elif t > 1.0:
        t = 1.0
    dx = px - (ax + t * abx)
    dy = py - (ay + t * aby)
    dz = pz - (az + t * abz)
    return math.sqrt(dx * dx + dy * dy + dz * dz), t


@njit(**_JIT)
def bin_triangles(tx0, tx1, ty0, ty1, ntx, nty):
    """CSR tile -> triangle lists; triangles keep submission order."""
    ntiles = ntx * nty
    counts = np.zeros(ntiles, dtype=np.int64)
    n = tx0.shape[0]
    for t in range(n):
        if tx0[t] > tx1[t]:
            continue
        for ty in range(ty0[t], ty1[t] + 1):
            for tx in range(tx0[t], tx1[t] + 1):
                counts[ty * ntx + tx] += 1
    offsets = np.zeros(ntiles + 1, dtype=np.int64)
    for i in range(ntiles):
        offsets[i + 1] = offsets[i] + counts[i]
    fill = offsets[:-1].copy()
    ids = np.empty(offsets[ntiles], dtype=np.int64)
    for t in range(n):
        if tx0[t] > tx1[t]:
            continue
        for ty in range(ty0[t], ty1[t] + 1):
            for tx in range(tx0[t], tx1[t] + 1):
                k = ty * ntx + tx
                ids[fill[k]] = t
                fill[k] += 1
    return offsets, ids


@njit(**_JIT)
def _is_top_left(ex, ey):
    return ey < 0.0 or (ey == 0.0 and ex > 0.0)


@njit(**_JIT)
def rasterize_tile(
    tile_px0, tile_py0, tile_w, tile_h,
    tri_ids,
    tri_verts, tri_face,
    vert_view, vert_world, vert_imp,
    face_corners, edge_attr, edge_level, edge_imp0, edge_imp1,
    fproj, aspect, img_w, img_h, near, far,
    lens_enabled, lens_mode, lens_cx, lens_cy, lens_r,
    lens_wx, lens_wy, lens_wz, lens_wr,
    w_base, delta, lod, accent, face_alpha,
    halo_factor, halo_offset, desat,
    tf_x, tf_rgb, tf_a,
    frag_pix, frag_depth, frag_rgba, frag_kind,
):
    """Rasterize + shade all triangles touching one tile.

    Returns the fragment count, or -1 when the output arrays are full
    (the caller grows them and retries).
    """
    cap = frag_pix.shape[0]
    nf = 0
    half_w = 0.5 * img_w
    half_h = 0.5 * img_h
    depth_span = far - near

    pv = np.empty((8, 3), np.float64)   # clip scratch: view coords
    pw = np.empty((8, 3), np.float64)   # world coords
    pi = np.empty(8, np.float64)        # importance
    cv = np.empty((8, 3), np.float64)
    cw = np.empty((8, 3), np.float64)
    ci = np.empty(8, np.float64)
    sx = np.empty(8, np.float64)
    sy = np.empty(8, np.float64)
    iz = np.empty(8, np.float64)

    for it in range(tri_ids.shape[0]):
        t = tri_ids[it]
        f = tri_face[t]
        # gather triangle
        npoly = 3
        for k in range(3):
            v = tri_verts[t, k]
            for c in range(3):
                pv[k, c] = vert_view[v, c]
                pw[k, c] = vert_world[v, c]
            pi[k] = vert_imp[v]
        # near-plane clip (view z >= near)
        needs_clip = False
        behind = 0
        for k in range(3):
            if pv[k, 2] < near:
                behind += 1
        if behind == 3:
            continue
        if behind > 0:
            needs_clip = True
        if needs_clip:
            m = 0
            for k in range(3):
                k2 = (k + 1) % 3
                z0 = pv[k, 2]
                z1 = pv[k2, 2]
                in0 = z0 >= near
                in1 = z1 >= near
                if in0:
                    for c in range(3):
                        cv[m, c] = pv[k, c]
                        cw[m, c] = pw[k, c]
                    ci[m] = pi[k]
                    m += 1
                if in0 != in1:
                    u = (near - z0) / (z1 - z0)
                    for c in range(3):
                        cv[m, c] = pv[k, c] + u * (pv[k2, c] - pv[k, c])
                        cw[m, c] = pw[k, c] + u * (pw[k2, c] - pw[k, c])
                    ci[m] = pi[k] + u * (pi[k2] - pi[k])
                    m += 1
            npoly = m
            if npoly < 3:
                continue
        else:
            for k in range(3):
                for c in range(3):
                    cv[k, c] = pv[k, c]
                    cw[k, c] = pw[k, c]
                ci[k] = pi[k]

        for k in range(npoly):
            z = cv[k, 2]
            iz[k] = 1.0 / z
            sx[k] = (cv[k, 0] * fproj / aspect) * iz[k] * half_w + half_w
            sy[k] = half_h - (cv[k, 1] * fproj) * iz[k] * half_h

        for sub in range(npoly - 2):
            i0 = 0
            i1 = sub + 1
            i2 = sub + 2
            x0 = sx[i0]
            y0 = sy[i0]
            x1 = sx[i1]
            y1 = sy[i1]
            x2 = sx[i2]
            y2 = sy[i2]
            area2 = (x1 - x0) * (y2 - y0) - (y1 - y0) * (x2 - x0)
            if area2 == 0.0:
                continue
            sgn = 1.0 if area2 > 0.0 else -1.0
            inv_area = 1.0 / (area2 * sgn)

            bxmin = min(x0, min(x1, x2))
            bxmax = max(x0, max(x1, x2))
            bymin = min(y0, min(y1, y2))
            bymax = max(y0, max(y1, y2))
            px0 = int(math.floor(bxmin - 0.5))
            px1 = int(math.ceil(bxmax - 0.5))
            py0 = int(math.floor(bymin - 0.5))
            py1 = int(math.ceil(bymax - 0.5))
            if px0 < tile_px0:
                px0 = tile_px0
            if py0 < tile_py0:
                py0 = tile_py0
            if px1 > tile_px0 + tile_w - 1:
                px1 = tile_px0 + tile_w - 1
            if py1 > tile_py0 + tile_h - 1:
                py1 = tile_py0 + tile_h - 1
            if px0 > px1 or py0 > py1:
                continue

            # edge vectors for top-left tie rule (sign-corrected)
            e0x = (x2 - x1) * sgn
            e0y = (y2 - y1) * sgn
            e1x = (x0 - x2) * sgn
            e1y = (y0 - y2) * sgn
            e2x = (x1 - x0) * sgn
            e2y = (y1 - y0) * sgn

            for py in range(py0, py1 + 1):
                cy = py + 0.5
                for px in range(px0, px1 + 1):
                    cx = px + 0.5
                    e0 = ((x2 - x1) * (cy - y1) - (y2 - y1) * (cx - x1)) * sgn
                    e1 = ((x0 - x2) * (cy - y2) - (y0 - y2) * (cx - x2)) * sgn
                    e2 = ((x1 - x0) * (cy - y0) - (y1 - y0) * (cx - x0)) * sgn
                    if e0 < 0.0 or e1 < 0.0 or e2 < 0.0:
                        continue
                    if e0 == 0.0 and not _is_top_left(e0x, e0y):
                        continue
                    if e1 == 0.0 and not _is_top_left(e1x, e1y):
                        continue
                    if e2 == 0.0 and not _is_top_left(e2x, e2y):
                        continue
                    b0 = e0 * inv_area
                    b1 = e1 * inv_area
                    b2 = e2 * inv_area

                    den = b0 * iz[i0] + b1 * iz[i1] + b2 * iz[i2]
                    zf = 1.0 / den
                    depth = (zf - near) / depth_span
                    if depth < 0.0:
                        depth = 0.0
                    elif depth > 1.0:
                        depth = 1.0

                    wxp = (b0 * cw[i0, 0] * iz[i0] + b1 * cw[i1, 0] * iz[i1] + b2 * cw[i2, 0] * iz[i2]) * zf
                    wyp = (b0 * cw[i0, 1] * iz[i0] + b1 * cw[i1, 1] * iz[i1] + b2 * cw[i2, 1] * iz[i2]) * zf
                    wzp = (b0 * cw[i0, 2] * iz[i0] + b1 * cw[i1, 2] * iz[i1] + b2 * cw[i2, 2] * iz[i2]) * zf
                    imp = (b0 * ci[i0] * iz[i0] + b1 * ci[i1] * iz[i1] + b2 * ci[i2] * iz[i2]) * zf

                    # lens focus
                    if lens_enabled == 0:
                        focus = 0.0
                        dist = 1.0
                    else:
                        if lens_mode == 0:
                            ddx = cx - lens_cx
                            ddy = cy - lens_cy
                            dist = math.sqrt(ddx * ddx + ddy * ddy) / lens_r
                        else:
                            ddx = wxp - lens_wx
                            ddy = wyp - lens_wy
                            ddz = wzp - lens_wz
                            dist = math.sqrt(ddx * ddx + ddy * ddy + ddz * ddz) / lens_wr
                        focus = 1.0 - _smoothstep(0.7, 1.0, dist)
                    in_focus = focus > 0.0

                    # closest visible edge / closest any edge (object space)
                    d_vis = 1e300
                    d_all = 1e300
                    k_vis = -1
                    t_vis = 0.0
                    for e in range(4):
                        e2i = (e + 1) % 4
                        d, tt = _seg_dist(
                            wxp, wyp, wzp,
                            face_corners[f, e, 0], face_corners[f, e, 1], face_corners[f, e, 2],
                            face_corners[f, e2i, 0], face_corners[f, e2i, 1], face_corners[f, e2i, 2],
                        )
                        if d < d_all:
                            d_all = d
                        visible = edge_level[f, e] >= lod
                        if (not visible) and in_focus and edge_attr[f, e] >= delta:
                            visible = True
                        if visible and d < d_vis:
                            d_vis = d
                            k_vis = e
                            t_vis = tt

                    w = (1.0 + 0.3 * focus) * w_base
                    e_focus = 0.0
                    e_context = 0.0
                    edge_imp = 0.0
                    qualifies_focus = False
                    if k_vis >= 0:
                        lvl = edge_level[f, k_vis]
                        attr = edge_attr[f, k_vis]
                        qualifies_focus = (lvl >= lod) or (attr >= delta)
                        if d_vis <= w:
                            if qualifies_focus:
                                e_focus = 1.0
                            if lvl >= lod:
                                e_context = 1.0
                        edge_imp = edge_imp0[f, k_vis] * (1.0 - t_vis) + edge_imp1[f, k_vis] * t_vis
                    alpha_e = e_context + (e_focus - e_context) * focus

                    s_e = 1.0
                    if alpha_e == 0.0 and d_all <= (2.0 / 3.0) * w_base:
                        s_e = accent

                    dist_c = dist
                    if dist_c < 0.0:
                        dist_c = 0.0
                    elif dist_c > 1.0:
                        dist_c = 1.0
                    fr, fg, fb, ftf = _tf_eval(imp, tf_x, tf_rgb, tf_a)
                    alpha_f = face_alpha * dist_c * dist_c * dist_c * dist_c * ftf

                    er, eg, eb, _ea = _tf_eval(edge_imp, tf_x, tf_rgb, tf_a)
                    style = CONTEXT_EDGE_BRIGHTEN * (1.0 - focus) + FOCUS_EDGE_DARKEN * focus
                    er = min(max(er * style, 0.0), 1.0)
                    eg = min(max(eg * style, 0.0), 1.0)
                    eb = min(max(eb * style, 0.0), 1.0)

                    saf = (1.0 - alpha_e) * s_e * alpha_f
                    r = alpha_e * er + saf * fr
                    g = alpha_e * eg + saf * fg
                    b = alpha_e * eb + saf * fb
                    a = alpha_e + saf
                    if a > 1.0:
                        a = 1.0
                    elif a < 0.0:
                        a = 0.0
                    r = min(max(r, 0.0), 1.0)
                    g = min(max(g, 0.0), 1.0)
                    b = min(max(b, 0.0), 1.0)
                    kdes = desat * focus * depth
                    if kdes < 0.0:
                        kdes = 0.0
                    elif kdes > 1.0:
                        kdes = 1.0
                    gray = (r + g + b) / 3.0
                    r = r + (gray - r) * kdes
                    g = g + (gray - g) * kdes
                    b = b + (gray - b) * kdes

                    if alpha_e > 0.0:
                        kind = KIND_FOCUS_EDGE if in_focus else KIND_CONTEXT_EDGE
                    else:
                        kind = KIND_FOCUS_FACE if in_focus else KIND_CONTEXT_FACE

                    lpix = (py - tile_py0) * tile_w + (px - tile_px0)
                    if a > 0.0:
                        if nf >= cap:
                            return -1
                        frag_pix[nf] = lpix
                        frag_depth[nf] = depth
                        frag_rgba[nf, 0] = r
                        frag_rgba[nf, 1] = g
                        frag_rgba[nf, 2] = b
                        frag_rgba[nf, 3] = a
                        frag_kind[nf] = kind
                        nf += 1

                    if in_focus and qualifies_focus:
                        band_hi = w * (1.0 + halo_factor * focus)
                        if d_vis > w and d_vis <= band_hi and focus > 0.0:
                            if nf >= cap:
                                return -1
                            frag_pix[nf] = lpix
                            frag_depth[nf] = depth + halo_offset
                            frag_rgba[nf, 0] = 1.0
                            frag_rgba[nf, 1] = 1.0
                            frag_rgba[nf, 2] = 1.0
                            frag_rgba[nf, 3] = focus
                            frag_kind[nf] = KIND_HALO
                            nf += 1
    return nf


@njit(**_JIT)
def composite_tile(
    tile_w, tile_h, n,
    frag_pix, frag_depth, frag_rgba, frag_kind,
    bg_r, bg_g, bg_b, capacity,
    tile_rgb,
):
    """Stable per-pixel depth sort + front-to-back compositing.

    Returns the longest per-pixel list (the required capacity); the
    caller raises when it exceeds `capacity` (>= 0 means bounded).
    """
    npix = tile_w * tile_h
    counts = np.zeros(npix, dtype=np.int64)
    for i in range(n):
        counts[frag_pix[i]] += 1
    maxlen = 0
    for p in range(npix):
        if counts[p] > maxlen:
            maxlen = counts[p]
    if capacity >= 0 and maxlen > capacity:
        return maxlen
    offsets = np.zeros(npix + 1, dtype=np.int64)
    for p in range(npix):
        offsets[p + 1] = offsets[p] + counts[p]
    fill = offsets[:-1].copy()
    order = np.empty(n, dtype=np.int64)
    for i in range(n):
        p = frag_pix[i]
        order[fill[p]] = i
        fill[p] += 1

    for p in range(npix):
        lo = offsets[p]
        hi = offsets[p + 1]
        # stable insertion sort by depth (submission order preserved)
        for i in range(lo + 1, hi):
            key = order[i]
            kd = frag_depth[key]
            j = i - 1
            while j >= lo and frag_depth[order[j]] > kd:
                order[j + 1] = order[j]
                j -= 1
            order[j + 1] = key
        acc = 0.0
        r = 0.0
        g = 0.0
        b = 0.0
        for i in range(lo, hi):
            idx = order[i]
            a = frag_rgba[idx, 3]
            one_m = 1.0 - acc
            r += one_m * a * frag_rgba[idx, 0]
            g += one_m * a * frag_rgba[idx, 1]
            b += one_m * a * frag_rgba[idx, 2]
            acc += one_m * a
            if acc > ALPHA_CUTOFF:
                break
        one_m = 1.0 - acc
        py = p // tile_w
        px = p - py * tile_w
        tile_rgb[py, px, 0] = r + one_m * bg_r
        tile_rgb[py, px, 1] = g + one_m * bg_g
        tile_rgb[py, px, 2] = b + one_m * bg_b
    return maxlen


@njit(**_JIT)
def depth_raster(
    tri_verts, vert_view,
    fproj, aspect, img_w, img_h, near, far,
    zbuf,
):
    """Opaque depth-only rasterization (for the silhouette pass)."""
    half_w = 0.5 * img_w
    half_h = 0.5 * img_h
    depth_span = far - near
    cv = np.empty((8, 3), np.float64)
    sx = np.empty(8, np.float64)
    sy = np.empty(8, np.float64)
    iz = np.empty(8, np.float64)
    for t in range(tri_verts.shape[0]):
        behind = 0
        for k in range(3):
            if vert_view[tri_verts[t, k], 2] < near:
                behind += 1
        if behind == 3:
            continue
        if behind == 0:
            npoly = 3
            for k in range(3):
                v = tri_verts[t, k]
                for c in range(3):
                    cv[k, c] = vert_view[v, c]
        else:
            m = 0
            for k in range(3):
                k2 = (k + 1) % 3
                v0 = tri_verts[t, k]
                v1 = tri_verts[t, k2]
                z0 = vert_view[v0, 2]
                z1 = vert_view[v1, 2]
                in0 = z0 >= near
                in1 = z1 >= near
                if in0:
                    for c in range(3):
                        cv[m, c] = vert_view[v0, c]
                    m += 1
                if in0 != in1:
                    u = (near - z0) / (z1 - z0)
                    for c in range(3):
                        cv[m, c] = vert_view[v0, c] + u * (vert_view[v1, c] - vert_view[v0, c])
                    m += 1
            npoly = m
            if npoly < 3:
                continue
        for k in range(npoly):
            iz[k] = 1.0 / cv[k, 2]
            sx[k] = (cv[k, 0] * fproj / aspect) * iz[k] * half_w + half_w
            sy[k] = half_h - (cv[k, 1] * fproj) * iz[k] * half_h
        for sub in range(npoly - 2):
            i0 = 0
            i1 = sub + 1
            i2 = sub + 2
            x0 = sx[i0]
            y0 = sy[i0]
            x1 = sx[i1]
            y1 = sy[i1]
            x2 = sx[i2]
            y2 = sy[i2]
            area2 = (x1 - x0) * (y2 - y0) - (y1 - y0) * (x2 - x0)
            if area2 == 0.0:
                continue
            sgn = 1.0 if area2 > 0.0 else -1.0
            inv_area = 1.0 / (area2 * sgn)
            px0 = int(math.floor(min(x0, min(x1, x2)) - 0.5))
            px1 = int(math.ceil(max(x0, max(x1, x2)) - 0.5))
            py0 = int(math.floor(min(y0, min(y1, y2)) - 0.5))
            py1 = int(math.ceil(max(y0, max(y1, y2)) - 0.5))
            if px0 < 0:
                px0 = 0
            if py0 < 0:
                py0 = 0
            if px1 > img_w - 1:
                px1 = img_w - 1
            if py1 > img_h - 1:
                py1 = img_h - 1
            for py in range(py0, py1 + 1):
                cy = py + 0.5
                for px in range(px0, px1 + 1):
                    cx = px + 0.5
                    e0 = ((x2 - x1) * (cy - y1) - (y2 - y1) * (cx - x1)) * sgn
                    e1 = ((x0 - x2) * (cy - y2) - (y0 - y2) * (cx - x2)) * sgn
                    e2 = ((x1 - x0) * (cy - y0) - (y1 - y0) * (cx - x0)) * sgn
                    if e0 < 0.0 or e1 < 0.0 or e2 < 0.0:
                        continue
                    b0 = e0 * inv_area
                    b1 = e1 * inv_area
                    b2 = e2 * inv_area
                    den = b0 * iz[i0] + b1 * iz[i1] + b2 * iz[i2]
                    zf = 1.0 / den
                    depth = (zf - near) / depth_span
                    if depth < 0.0:
                        depth = 0.0
                    elif depth > 1.0:
                        depth = 1.0
                    if depth < zbuf[py, px]:
                        zbuf[py, px] = depth
