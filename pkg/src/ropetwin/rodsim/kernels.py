"""Numba kernels for the rod solver.

The stretch-shear and bend-twist constraints of a rod form a chain whose
per-constraint relaxation converges too slowly for tight inextensibility
budgets, so each projection pass solves all of them simultaneously: the
Schur system (J M^-1 J^T + alpha~) dlam = -C - alpha~*lam is assembled in
an interleaved ordering [s_0, b_0, s_1, b_1, ...] that makes it banded
(3x3 blocks, block half-bandwidth 2, scalar half-bandwidth 8) and solved
by a banded LDL^T factorization. Corrections are applied mass-weighted,
so internal-constraint momentum conservation is exact up to rounding.

Orientations are linearized with world-frame rotation vectors:
q <- exp(dtheta) * q. All quaternions are (x, y, z, w).

Ground and segment-segment contacts stay per-contact projections in a
fixed sorted order after the banded pass; attachments enter as kinematic
pins (inverse mass zeroed, position driven) before it.
"""

import math

import numpy as np
from numba import njit

HBW = 8            # scalar half-bandwidth of the coupled system
PIVOT_REL = 1e-12  # pivot floor relative to the largest initial diagonal
PIVOT_BIG = 1e300  # sentinel pivot for skipped (singular) rows
DIVERGENCE_LIMIT = 1.0e3


# --- small quaternion helpers (tuples in, tuples out) ---

@njit(inline="always", cache=True)
def _qmul(ax, ay, az, aw, bx, by, bz, bw):
    return (
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
        aw * bw - ax * bx - ay * by - az * bz,
    )


@njit(inline="always", cache=True)
def _conj_mul_pure(ax, ay, az, aw, px, py, pz):
    # conj(a) * (p, 0)
    return (
        aw * px - ay * pz + az * py,
        aw * py + ax * pz - az * px,
        aw * pz - ax * py + ay * px,
        ax * px + ay * py + az * pz,
    )


@njit(inline="always", cache=True)
def _d3(qx, qy, qz, qw):
    # third column of the rotation matrix: R(q) @ ez
    return (
        2.0 * (qx * qz + qw * qy),
        2.0 * (qy * qz - qw * qx),
        1.0 - 2.0 * (qx * qx + qy * qy),
    )


@njit(inline="always", cache=True)
def _qexp_mul(q, i, tx, ty, tz):
    # q[i] <- normalize(exp_map(t) * q[i]) for rotation vector t
    angle = math.sqrt(tx * tx + ty * ty + tz * tz)
    if angle < 1e-12:
        ex, ey, ez, ew = 0.5 * tx, 0.5 * ty, 0.5 * tz, 1.0
    else:
        s = math.sin(0.5 * angle) / angle
        ex, ey, ez, ew = s * tx, s * ty, s * tz, math.cos(0.5 * angle)
    rx, ry, rz, rw = _qmul(ex, ey, ez, ew, q[i, 0], q[i, 1], q[i, 2], q[i, 3])
    inv = 1.0 / math.sqrt(rx * rx + ry * ry + rz * rz + rw * rw)
    q[i, 0] = rx * inv
    q[i, 1] = ry * inv
    q[i, 2] = rz * inv
    q[i, 3] = rw * inv


# --- banded LDL^T ---

@njit(cache=True)
def _band_factor(band, n, dvec):
    """In-place LDL^T of the symmetric banded matrix (lower storage).

    band[r - c, c] = A[r, c]. Near-zero pivots (rank-deficient rows,
    e.g. a fully pinned constraint) get a huge sentinel so their
    multiplier comes out ~0; returns the count of such skipped rows.
    """
    amax = 0.0
    for j in range(n):
        if band[0, j] > amax:
            amax = band[0, j]
    floor = amax * PIVOT_REL
    if floor <= 0.0:
        floor = 1e-300
    skipped = 0
    for j in range(n):
        kmin = j - HBW
        if kmin < 0:
            kmin = 0
        d = band[0, j]
        for k in range(kmin, j):
            ljk = band[j - k, k]
            d -= ljk * ljk * dvec[k]
        if d <= floor:
            dvec[j] = PIVOT_BIG
            skipped += 1
        else:
            dvec[j] = d
        imax = j + HBW
        if imax > n - 1:
            imax = n - 1
        dj = dvec[j]
        for i in range(j + 1, imax + 1):
            s = band[i - j, j]
            kmin2 = i - HBW
            if kmin2 < 0:
                kmin2 = 0
            for k in range(kmin2, j):
                s -= band[i - k, k] * band[j - k, k] * dvec[k]
            band[i - j, j] = s / dj
    return skipped


@njit(cache=True)
def _band_solve(band, n, dvec, rhs):
    # forward substitution with unit lower triangle
    for i in range(n):
        s = rhs[i]
        kmin = i - HBW
        if kmin < 0:
            kmin = 0
        for k in range(kmin, i):
            s -= band[i - k, k] * rhs[k]
        rhs[i] = s
    for i in range(n):
        rhs[i] /= dvec[i]
    for i in range(n - 1, -1, -1):
        s = rhs[i]
        imax = i + HBW
        if imax > n - 1:
            imax = n - 1
        for k in range(i + 1, imax + 1):
            s -= band[k - i, i] * rhs[k]
        rhs[i] = s


# --- coupled stretch/bend projection ---

@njit(cache=True)
def _project_coupled(x, q, l0, dq0, winv, winvq,
                     alpha_s, alpha_b, lam_s, lam_b,
                     band, dvec, rhs, d3, G, dth):
    """One simultaneous XPBD step over all stretch-shear and bend-twist
    constraints. Updates x, q, lam_* in place; returns
    (max stretch residual, max bend residual, skipped row count)."""
    S = l0.shape[0]
    J = S - 1
    nblocks = 2 * S - 1
    n = 3 * nblocks

    for i in range(S):
        d3[i, 0], d3[i, 1], d3[i, 2] = _d3(q[i, 0], q[i, 1], q[i, 2], q[i, 3])

    band[:, :n] = 0.0
    max_cs = 0.0
    max_cb = 0.0

    # stretch rows: C = (x[i+1] - x[i]) / l0 - d3
    for i in range(S):
        li = 1.0 / l0[i]
        cx = (x[i + 1, 0] - x[i, 0]) * li - d3[i, 0]
        cy = (x[i + 1, 1] - x[i, 1]) * li - d3[i, 1]
        cz = (x[i + 1, 2] - x[i, 2]) * li - d3[i, 2]
        cn = math.sqrt(cx * cx + cy * cy + cz * cz)
        if cn > max_cs:
            max_cs = cn
        r0 = 3 * (2 * i)
        rhs[r0 + 0] = -cx - alpha_s * lam_s[i, 0]
        rhs[r0 + 1] = -cy - alpha_s * lam_s[i, 1]
        rhs[r0 + 2] = -cz - alpha_s * lam_s[i, 2]

        a1 = (winv[i] + winv[i + 1]) * li * li
        wq = winvq[i]
        for r in range(3):
            for c in range(r + 1):
                v = -wq * d3[i, r] * d3[i, c]
                if r == c:
                    v += a1 + wq + alpha_s
                band[r - c, r0 + c] = v

    # bend rows: C = Im(conj(q[j]) * q[j+1]) - s * Im(dq0[j])
    for j in range(J):
        ax, ay, az, aw = q[j, 0], q[j, 1], q[j, 2], q[j, 3]
        bx, by, bz, bw = q[j + 1, 0], q[j + 1, 1], q[j + 1, 2], q[j + 1, 3]
        rx, ry, rz, _rw = _qmul(-ax, -ay, -az, aw, bx, by, bz, bw)
        dot = rx * dq0[j, 0] + ry * dq0[j, 1] + rz * dq0[j, 2]
        sgn = 1.0 if dot >= 0.0 else -1.0
        cx = rx - sgn * dq0[j, 0]
        cy = ry - sgn * dq0[j, 1]
        cz = rz - sgn * dq0[j, 2]
        cn = math.sqrt(cx * cx + cy * cy + cz * cz)
        if cn > max_cb:
            max_cb = cn
        r0 = 3 * (2 * j + 1)
        rhs[r0 + 0] = -cx - alpha_b * lam_b[j, 0]
        rhs[r0 + 1] = -cy - alpha_b * lam_b[j, 1]
        rhs[r0 + 2] = -cz - alpha_b * lam_b[j, 2]

        # G columns: d/dtheta of Im(conj(a) * b) under q <- exp(t) q
        for k in range(3):
            px = 1.0 if k == 0 else 0.0
            py = 1.0 if k == 1 else 0.0
            pz = 1.0 if k == 2 else 0.0
            ux, uy, uz, uw = _conj_mul_pure(ax, ay, az, aw, px, py, pz)
            gx, gy, gz, _gw = _qmul(ux, uy, uz, uw, bx, by, bz, bw)
            G[j, 0, k] = gx
            G[j, 1, k] = gy
            G[j, 2, k] = gz

        wsum = 0.25 * (winvq[j] + winvq[j + 1])
        for r in range(3):
            for c in range(r + 1):
                v = wsum * (G[j, r, 0] * G[j, c, 0]
                            + G[j, r, 1] * G[j, c, 1]
                            + G[j, r, 2] * G[j, c, 2])
                if r == c:
                    v += alpha_b
                band[r - c, r0 + c] = v

    # couplings
    for i in range(S - 1):
        # stretch i+1 vs stretch i through particle i+1
        v = -winv[i + 1] / (l0[i] * l0[i + 1])
        c0 = 3 * (2 * i)
        for r in range(3):
            band[6, c0 + r] = v  # only the diagonal of the 3x3 block
    for j in range(J):
        c0 = 3 * (2 * j)      # stretch j column block
        r0 = 3 * (2 * j + 1)  # bend j row block
        wq = winvq[j]
        # bend j vs stretch j: 0.5*wq * G_j @ skew(d3_j)
        dx, dy, dz = d3[j, 0], d3[j, 1], d3[j, 2]
        for r in range(3):
            g0, g1, g2 = G[j, r, 0], G[j, r, 1], G[j, r, 2]
            m0 = g1 * dz - g2 * dy
            m1 = -g0 * dz + g2 * dx
            m2 = g0 * dy - g1 * dx
            band[(r0 + r) - (c0 + 0), c0 + 0] = 0.5 * wq * m0
            band[(r0 + r) - (c0 + 1), c0 + 1] = 0.5 * wq * m1
            band[(r0 + r) - (c0 + 2), c0 + 2] = 0.5 * wq * m2
        # stretch j+1 vs bend j: 0.5*wq' * skew(d3_{j+1}) @ G_j^T
        wq1 = winvq[j + 1]
        ex, ey, ez = d3[j + 1, 0], d3[j + 1, 1], d3[j + 1, 2]
        c1 = r0              # bend j column block
        r1 = 3 * (2 * j + 2)  # stretch j+1 row block
        for c in range(3):
            g0, g1, g2 = G[j, c, 0], G[j, c, 1], G[j, c, 2]
            m0 = -ez * g1 + ey * g2
            m1 = ez * g0 - ex * g2
            m2 = -ey * g0 + ex * g1
            band[(r1 + 0) - (c1 + c), c1 + c] = 0.5 * wq1 * m0
            band[(r1 + 1) - (c1 + c), c1 + c] = 0.5 * wq1 * m1
            band[(r1 + 2) - (c1 + c), c1 + c] = 0.5 * wq1 * m2
        # bend j+1 vs bend j: -0.25*wq' * G_{j+1} @ G_j^T
        if j + 1 < J:
            r2 = 3 * (2 * j + 3)
            for r in range(3):
                for c in range(3):
                    v = -0.25 * wq1 * (G[j + 1, r, 0] * G[j, c, 0]
                                       + G[j + 1, r, 1] * G[j, c, 1]
                                       + G[j + 1, r, 2] * G[j, c, 2])
                    band[(r2 + r) - (c1 + c), c1 + c] = v

    skipped = _band_factor(band, n, dvec)
    _band_solve(band, n, dvec, rhs)

    # apply corrections
    for i in range(S):
        dth[i, 0] = 0.0
        dth[i, 1] = 0.0
        dth[i, 2] = 0.0
    for i in range(S):
        r0 = 3 * (2 * i)
        lx, ly, lz = rhs[r0], rhs[r0 + 1], rhs[r0 + 2]
        lam_s[i, 0] += lx
        lam_s[i, 1] += ly
        lam_s[i, 2] += lz
        li = 1.0 / l0[i]
        wa = winv[i] * li
        wb = winv[i + 1] * li
        x[i, 0] -= wa * lx
        x[i, 1] -= wa * ly
        x[i, 2] -= wa * lz
        x[i + 1, 0] += wb * lx
        x[i + 1, 1] += wb * ly
        x[i + 1, 2] += wb * lz
        # dtheta_i += winvq * skew(d3)^T lam = -winvq * d3 x lam
        wq = winvq[i]
        dth[i, 0] -= wq * (d3[i, 1] * lz - d3[i, 2] * ly)
        dth[i, 1] -= wq * (d3[i, 2] * lx - d3[i, 0] * lz)
        dth[i, 2] -= wq * (d3[i, 0] * ly - d3[i, 1] * lx)
    for j in range(J):
        r0 = 3 * (2 * j + 1)
        lx, ly, lz = rhs[r0], rhs[r0 + 1], rhs[r0 + 2]
        lam_b[j, 0] += lx
        lam_b[j, 1] += ly
        lam_b[j, 2] += lz
        wqa = 0.5 * winvq[j]
        wqb = 0.5 * winvq[j + 1]
        for k in range(3):
            gtl = G[j, 0, k] * lx + G[j, 1, k] * ly + G[j, 2, k] * lz
            dth[j, k] -= wqa * gtl
            dth[j + 1, k] += wqb * gtl
    for i in range(S):
        tx, ty, tz = dth[i, 0], dth[i, 1], dth[i, 2]
        if tx != 0.0 or ty != 0.0 or tz != 0.0:
            _qexp_mul(q, i, tx, ty, tz)

    return max_cs, max_cb, skipped


# --- contacts ---

@njit(cache=True)
def _ground_project(x, xprev, winv, radius, ground_h, mu):
    count = 0
    for i in range(x.shape[0]):
        if winv[i] <= 0.0:
            continue
        pen = ground_h + radius - x[i, 2]
        if pen <= 0.0:
            continue
        x[i, 2] += pen
        count += 1
        if mu > 0.0:
            ux = x[i, 0] - xprev[i, 0]
            uy = x[i, 1] - xprev[i, 1]
            un = math.sqrt(ux * ux + uy * uy)
            lim = mu * pen
            if un > lim:
                s = lim / un
                x[i, 0] = xprev[i, 0] + ux * s
                x[i, 1] = xprev[i, 1] + uy * s
    return count


@njit(cache=True)
def _collect_pairs(x, radius, margin):
    """Broad phase: uniform hash over cells of 4*radius, capsule AABBs
    inflated by radius + margin/2. Returns sorted unique (i, j) candidate
    segment pairs with j - i >= 3, packed as i * S + j."""
    S = x.shape[0] - 1
    cell = 4.0 * radius
    infl = radius + 0.5 * margin
    OFF = 1 << 20

    lo = np.empty((S, 3), dtype=np.int64)
    hi = np.empty((S, 3), dtype=np.int64)
    total = 0
    for i in range(S):
        span = 1
        for a in range(3):
            p0 = x[i, a]
            p1 = x[i + 1, a]
            if p1 < p0:
                p0, p1 = p1, p0
            c0 = np.int64(math.floor((p0 - infl) / cell))
            c1 = np.int64(math.floor((p1 + infl) / cell))
            if c1 - c0 > 5:
                c1 = c0 + 5  # clamp runaway segments; divergence guard fires anyway
            lo[i, a] = c0
            hi[i, a] = c1
            span *= int(c1 - c0 + 1)
        total += span

    keys = np.empty(total, dtype=np.int64)
    segs = np.empty(total, dtype=np.int64)
    m = 0
    for i in range(S):
        for cx in range(lo[i, 0], hi[i, 0] + 1):
            for cy in range(lo[i, 1], hi[i, 1] + 1):
                for cz in range(lo[i, 2], hi[i, 2] + 1):
                    keys[m] = (((cx + OFF) << 42)
                               | ((cy + OFF) << 21)
                               | (cz + OFF))
                    segs[m] = i
                    m += 1

    order = np.argsort(keys)
    pair_keys = np.empty(S * S, dtype=np.int64)
    np_ = 0
    start = 0
    while start < m:
        end = start + 1
        k0 = keys[order[start]]
        while end < m and keys[order[end]] == k0:
            end += 1
        for u in range(start, end):
            su = segs[order[u]]
            for v in range(u + 1, end):
                sv = segs[order[v]]
                a = su if su < sv else sv
                b = sv if su < sv else su
                if b - a >= 3:
                    pair_keys[np_] = a * S + b
                    np_ += 1
        start = end

    if np_ == 0:
        return np.empty(0, dtype=np.int64)
    sub = np.sort(pair_keys[:np_])
    out = np.empty(np_, dtype=np.int64)
    n_out = 0
    prev = np.int64(-1)
    for t in range(np_):
        if sub[t] != prev:
            out[n_out] = sub[t]
            n_out += 1
            prev = sub[t]
    return out[:n_out]


@njit(inline="always", cache=True)
def _segment_closest(p1x, p1y, p1z, q1x, q1y, q1z,
                     p2x, p2y, p2z, q2x, q2y, q2z):
    """Closest-point parameters (s, t) between two segments."""
    d1x, d1y, d1z = q1x - p1x, q1y - p1y, q1z - p1z
    d2x, d2y, d2z = q2x - p2x, q2y - p2y, q2z - p2z
    rx, ry, rz = p1x - p2x, p1y - p2y, p1z - p2z
    a = d1x * d1x + d1y * d1y + d1z * d1z
    e = d2x * d2x + d2y * d2y + d2z * d2z
    f = d2x * rx + d2y * ry + d2z * rz
    tiny = 1e-18
    if a <= tiny and e <= tiny:
        return 0.0, 0.0
    if a <= tiny:
        s = 0.0
        t = f / e
        t = 0.0 if t < 0.0 else (1.0 if t > 1.0 else t)
        return s, t
    c = d1x * rx + d1y * ry + d1z * rz
    if e <= tiny:
        t = 0.0
        s = -c / a
        s = 0.0 if s < 0.0 else (1.0 if s > 1.0 else s)
        return s, t
    b = d1x * d2x + d1y * d2y + d1z * d2z
    denom = a * e - b * b
    if denom > tiny:
        s = (b * f - c * e) / denom
        s = 0.0 if s < 0.0 else (1.0 if s > 1.0 else s)
    else:
        s = 0.0
    t = (b * s + f) / e
    if t < 0.0:
        t = 0.0
        s = -c / a
        s = 0.0 if s < 0.0 else (1.0 if s > 1.0 else s)
    elif t > 1.0:
        t = 1.0
        s = (b - c) / a
        s = 0.0 if s < 0.0 else (1.0 if s > 1.0 else s)
    return s, t


@njit(cache=True)
def _self_collide(x, xprev, winv, pairs, radius, mu):
    """Per-contact projection of candidate segment pairs, in sorted pair
    order. Pushes closest points to exactly 2*radius apart, mass-split,
    with Coulomb-capped tangential displacement since substep start."""
    S = x.shape[0] - 1
    target = 2.0 * radius
    count = 0
    for pidx in range(pairs.shape[0]):
        key = pairs[pidx]
        i = key // S
        j = key % S
        s, t = _segment_closest(
            x[i, 0], x[i, 1], x[i, 2], x[i + 1, 0], x[i + 1, 1], x[i + 1, 2],
            x[j, 0], x[j, 1], x[j, 2], x[j + 1, 0], x[j + 1, 1], x[j + 1, 2])
        cax = (1.0 - s) * x[i, 0] + s * x[i + 1, 0]
        cay = (1.0 - s) * x[i, 1] + s * x[i + 1, 1]
        caz = (1.0 - s) * x[i, 2] + s * x[i + 1, 2]
        cbx = (1.0 - t) * x[j, 0] + t * x[j + 1, 0]
        cby = (1.0 - t) * x[j, 1] + t * x[j + 1, 1]
        cbz = (1.0 - t) * x[j, 2] + t * x[j + 1, 2]
        nx, ny, nz = cbx - cax, cby - cay, cbz - caz
        dist = math.sqrt(nx * nx + ny * ny + nz * nz)
        if dist >= target or dist < 1e-12:
            continue
        nx /= dist
        ny /= dist
        nz /= dist
        ka = winv[i] * (1.0 - s) * (1.0 - s) + winv[i + 1] * s * s
        kb = winv[j] * (1.0 - t) * (1.0 - t) + winv[j + 1] * t * t
        ksum = ka + kb
        if ksum <= 0.0:
            continue
        depth = target - dist
        lam = depth / ksum
        x[i, 0] -= nx * lam * winv[i] * (1.0 - s)
        x[i, 1] -= ny * lam * winv[i] * (1.0 - s)
        x[i, 2] -= nz * lam * winv[i] * (1.0 - s)
        x[i + 1, 0] -= nx * lam * winv[i + 1] * s
        x[i + 1, 1] -= ny * lam * winv[i + 1] * s
        x[i + 1, 2] -= nz * lam * winv[i + 1] * s
        x[j, 0] += nx * lam * winv[j] * (1.0 - t)
        x[j, 1] += ny * lam * winv[j] * (1.0 - t)
        x[j, 2] += nz * lam * winv[j] * (1.0 - t)
        x[j + 1, 0] += nx * lam * winv[j + 1] * t
        x[j + 1, 1] += ny * lam * winv[j + 1] * t
        x[j + 1, 2] += nz * lam * winv[j + 1] * t
        count += 1
        if mu <= 0.0:
            continue
        # relative tangential displacement of the contact points this substep
        pax = (1.0 - s) * xprev[i, 0] + s * xprev[i + 1, 0]
        pay = (1.0 - s) * xprev[i, 1] + s * xprev[i + 1, 1]
        paz = (1.0 - s) * xprev[i, 2] + s * xprev[i + 1, 2]
        pbx = (1.0 - t) * xprev[j, 0] + t * xprev[j + 1, 0]
        pby = (1.0 - t) * xprev[j, 1] + t * xprev[j + 1, 1]
        pbz = (1.0 - t) * xprev[j, 2] + t * xprev[j + 1, 2]
        relx = ((1.0 - s) * x[i, 0] + s * x[i + 1, 0] - pax) - ((1.0 - t) * x[j, 0] + t * x[j + 1, 0] - pbx)
        rely = ((1.0 - s) * x[i, 1] + s * x[i + 1, 1] - pay) - ((1.0 - t) * x[j, 1] + t * x[j + 1, 1] - pby)
        relz = ((1.0 - s) * x[i, 2] + s * x[i + 1, 2] - paz) - ((1.0 - t) * x[j, 2] + t * x[j + 1, 2] - pbz)
        rn = relx * nx + rely * ny + relz * nz
        tx = relx - rn * nx
        ty = rely - rn * ny
        tz = relz - rn * nz
        tn = math.sqrt(tx * tx + ty * ty + tz * tz)
        lim = mu * depth
        if tn <= lim or tn < 1e-15:
            continue
        # remove the excess tangential slip, mass-split like the normal push
        fac = (1.0 - lim / tn) / ksum
        px = -tx * fac
        py = -ty * fac
        pz = -tz * fac
        x[i, 0] += px * winv[i] * (1.0 - s)
        x[i, 1] += py * winv[i] * (1.0 - s)
        x[i, 2] += pz * winv[i] * (1.0 - s)
        x[i + 1, 0] += px * winv[i + 1] * s
        x[i + 1, 1] += py * winv[i + 1] * s
        x[i + 1, 2] += pz * winv[i + 1] * s
        x[j, 0] -= px * winv[j] * (1.0 - t)
        x[j, 1] -= py * winv[j] * (1.0 - t)
        x[j, 2] -= pz * winv[j] * (1.0 - t)
        x[j + 1, 0] -= px * winv[j + 1] * t
        x[j + 1, 1] -= py * winv[j + 1] * t
        x[j + 1, 2] -= pz * winv[j + 1] * t
    return count


# --- full frame ---

@njit(cache=True)
def _step_frame(x, v, q, w, l0, dq0, winv, winvq,
                pin_idx, pin_x0, pin_x1,
                radius, comp_s, comp_b, damping, mu_ground, mu_self,
                gx, gy, gz, frame_dt, n_sub, n_iter,
                ground_h, ground_on, selfcol_on, margin):
    """Advance one frame. Returns 0, or 1 on divergence."""
    P = x.shape[0]
    S = P - 1
    n = 3 * (2 * S - 1)
    band = np.empty((HBW + 1, n))
    dvec = np.empty(n)
    rhs = np.empty(n)
    d3 = np.empty((S, 3))
    G = np.empty((max(S - 1, 1), 3, 3))
    dth = np.empty((S, 3))
    lam_s = np.empty((S, 3))
    lam_b = np.empty((max(S - 1, 1), 3))
    xprev = np.empty((P, 3))
    qprev = np.empty((S, 4))

    dt = frame_dt / n_sub
    alpha_s = comp_s / (dt * dt)
    alpha_b = comp_b / (dt * dt)
    df = math.exp(-damping * dt)

    for sub in range(n_sub):
        for i in range(P):
            xprev[i, 0] = x[i, 0]
            xprev[i, 1] = x[i, 1]
            xprev[i, 2] = x[i, 2]
        # predict
        for i in range(P):
            if winv[i] > 0.0:
                v[i, 0] = (v[i, 0] + gx * dt) * df
                v[i, 1] = (v[i, 1] + gy * dt) * df
                v[i, 2] = (v[i, 2] + gz * dt) * df
                x[i, 0] += v[i, 0] * dt
                x[i, 1] += v[i, 1] * dt
                x[i, 2] += v[i, 2] * dt
        for i in range(S):
            qprev[i, 0] = q[i, 0]
            qprev[i, 1] = q[i, 1]
            qprev[i, 2] = q[i, 2]
            qprev[i, 3] = q[i, 3]
            w[i, 0] *= df
            w[i, 1] *= df
            w[i, 2] *= df
            # qdot = 0.5 * q * (w, 0), body-frame spin
            dx_, dy_, dz_, dw_ = _qmul(q[i, 0], q[i, 1], q[i, 2], q[i, 3],
                                       w[i, 0], w[i, 1], w[i, 2], 0.0)
            nqx = q[i, 0] + 0.5 * dt * dx_
            nqy = q[i, 1] + 0.5 * dt * dy_
            nqz = q[i, 2] + 0.5 * dt * dz_
            nqw = q[i, 3] + 0.5 * dt * dw_
            inv = 1.0 / math.sqrt(nqx * nqx + nqy * nqy + nqz * nqz + nqw * nqw)
            q[i, 0] = nqx * inv
            q[i, 1] = nqy * inv
            q[i, 2] = nqz * inv
            q[i, 3] = nqw * inv
        # kinematic pins track their interpolated targets
        frac = (sub + 1.0) / n_sub
        for k in range(pin_idx.shape[0]):
            pi = pin_idx[k]
            x[pi, 0] = pin_x0[k, 0] + (pin_x1[k, 0] - pin_x0[k, 0]) * frac
            x[pi, 1] = pin_x0[k, 1] + (pin_x1[k, 1] - pin_x0[k, 1]) * frac
            x[pi, 2] = pin_x0[k, 2] + (pin_x1[k, 2] - pin_x0[k, 2]) * frac

        if selfcol_on:
            pairs = _collect_pairs(x, radius, margin)
        else:
            pairs = np.empty(0, dtype=np.int64)

        lam_s[:, :] = 0.0
        lam_b[:, :] = 0.0
        for _ in range(n_iter):
            _project_coupled(x, q, l0, dq0, winv, winvq,
                             alpha_s, alpha_b, lam_s, lam_b,
                             band, dvec, rhs, d3, G, dth)
            if ground_on:
                _ground_project(x, xprev, winv, radius, ground_h, mu_ground)
            if pairs.shape[0] > 0:
                _self_collide(x, xprev, winv, pairs, radius, mu_self)

        # velocity update
        inv_dt = 1.0 / dt
        for i in range(P):
            v[i, 0] = (x[i, 0] - xprev[i, 0]) * inv_dt
            v[i, 1] = (x[i, 1] - xprev[i, 1]) * inv_dt
            v[i, 2] = (x[i, 2] - xprev[i, 2]) * inv_dt
            ok = (abs(x[i, 0]) <= DIVERGENCE_LIMIT
                  and abs(x[i, 1]) <= DIVERGENCE_LIMIT
                  and abs(x[i, 2]) <= DIVERGENCE_LIMIT)
            if not ok:
                return 1
        for i in range(S):
            # body-frame angular velocity from the quaternion increment
            dqx, dqy, dqz, dqw = _qmul(-qprev[i, 0], -qprev[i, 1], -qprev[i, 2], qprev[i, 3],
                                       q[i, 0], q[i, 1], q[i, 2], q[i, 3])
            sgn = 1.0 if dqw >= 0.0 else -1.0
            w[i, 0] = 2.0 * sgn * dqx * inv_dt
            w[i, 1] = 2.0 * sgn * dqy * inv_dt
            w[i, 2] = 2.0 * sgn * dqz * inv_dt
    return 0
