"""Compiled billiard kernels.

Cavities are packed into flat arrays so the tracer can run under numba:
``kinds[k]`` selects the piece type and ``prm[k]`` holds its parameters

    SEGMENT   x0, y0, x1, y1
    PARABOLA  a, b, c0, c1, c2        (x2 = c0 + c1 x1 + c2 x1^2, a <= x1 <= b)
    ELLIPSE   cx, cy, rx, ry, th0, th1

``ends[k]`` holds the two endpoints of piece k for junction (corner) tests.
"""
import math

import numpy as np
from numba import njit, prange

SEGMENT, PARABOLA, ELLIPSE = 0, 1, 2
OK, CORNER, GRAZING, CAP, FAILURE = 0, 1, 2, 3, 4

T_MIN = 1e-12
GRAZE_TOL = 1e-10
_RANGE_TOL = 1e-12

_jit = dict(cache=True, error_model="numpy", fastmath=False)


@njit(**_jit)
def _quadratic_roots(A, B, C):
    """Both real roots of A t^2 + B t + C (nan when absent), cancellation-free."""
    if A == 0.0:
        if B == 0.0:
            return np.nan, np.nan
        return -C / B, np.nan
    disc = B * B - 4.0 * A * C
    if disc < 0.0:
        # tangency lost to rounding
        if disc > -1e-14 * B * B:
            disc = 0.0
        else:
            return np.nan, np.nan
    sq = math.sqrt(disc)
    q = -0.5 * (B + sq) if B >= 0.0 else -0.5 * (B - sq)
    if q == 0.0:
        return 0.0, np.nan
    return q / A, C / q


@njit(**_jit)
def _pick(r1, r2, same):
    """Smallest admissible positive root; on the last-hit piece drop the root at the origin."""
    if same:
        if math.isnan(r2) or (not math.isnan(r1) and abs(r1) < abs(r2)):
            r1 = np.nan
        else:
            r2 = np.nan
    best = np.inf
    if r1 == r1 and r1 > T_MIN and r1 < best:
        best = r1
    if r2 == r2 and r2 > T_MIN and r2 < best:
        best = r2
    return best


@njit(**_jit)
def hit_piece(kind, prm, ox, oy, dx, dy, same):
    """First forward intersection of the ray o + t d with one piece.

    Returns (t, nx, ny); t is inf when there is no hit.  The normal is unit
    length and oriented against the ray (d . n < 0).
    """
    inf = np.inf
    if kind == SEGMENT:
        if same:
            return inf, 0.0, 0.0
        x0, y0, x1, y1 = prm[0], prm[1], prm[2], prm[3]
        ex, ey = x1 - x0, y1 - y0
        den = dx * ey - dy * ex
        if den == 0.0:
            return inf, 0.0, 0.0
        wx, wy = x0 - ox, y0 - oy
        t = (wx * ey - wy * ex) / den
        s = (wx * dy - wy * dx) / den
        if not (t > T_MIN and s >= -_RANGE_TOL and s <= 1.0 + _RANGE_TOL):
            return inf, 0.0, 0.0
        ln = math.hypot(ex, ey)
        nx, ny = -ey / ln, ex / ln
    elif kind == PARABOLA:
        a, b, c0, c1, c2 = prm[0], prm[1], prm[2], prm[3], prm[4]
        A = c2 * dx * dx
        B = c1 * dx + 2.0 * c2 * ox * dx - dy
        C = c0 + c1 * ox + c2 * ox * ox - oy
        r1, r2 = _quadratic_roots(A, B, C)
        if same:
            r1 = _pick(r1, r2, True)
            r2 = np.nan
        tol = _RANGE_TOL * (b - a)
        t = inf
        for r in (r1, r2):
            if r == r and r > T_MIN and r < t and a - tol <= ox + r * dx <= b + tol:
                t = r
        if t == inf:
            return inf, 0.0, 0.0
        x = ox + t * dx
        slope = c1 + 2.0 * c2 * x
        ln = math.hypot(slope, 1.0)
        nx, ny = -slope / ln, 1.0 / ln
    else:
        cx, cy, rx, ry, th0, th1 = prm[0], prm[1], prm[2], prm[3], prm[4], prm[5]
        u0, w0 = (ox - cx) / rx, (oy - cy) / ry
        du, dw = dx / rx, dy / ry
        A = du * du + dw * dw
        B = 2.0 * (u0 * du + w0 * dw)
        C = u0 * u0 + w0 * w0 - 1.0
        r1, r2 = _quadratic_roots(A, B, C)
        if same:
            r1 = _pick(r1, r2, True)
            r2 = np.nan
        t = inf
        for r in (r1, r2):
            if not (r == r and r > T_MIN and r < inf):
                continue
            # one Newton step on the implicit equation in original coordinates
            px, py = ox + r * dx, oy + r * dy
            gu, gw = (px - cx) / rx, (py - cy) / ry
            g = gu * gu + gw * gw - 1.0
            dg = 2.0 * (gu * dx / rx + gw * dy / ry)
            if dg != 0.0:
                r = r - g / dg
            if not r > T_MIN:
                continue
            th = math.atan2((oy + r * dy - cy) / ry, (ox + r * dx - cx) / rx)
            while th < th0 - _RANGE_TOL:
                th += 2.0 * math.pi
            if th <= th1 + _RANGE_TOL and r < t:
                t = r
        if t == inf:
            return inf, 0.0, 0.0
        px, py = ox + t * dx, oy + t * dy
        gx, gy = (px - cx) / (rx * rx), (py - cy) / (ry * ry)
        ln = math.hypot(gx, gy)
        nx, ny = gx / ln, gy / ln
    if nx * dx + ny * dy > 0.0:
        nx, ny = -nx, -ny
    return t, nx, ny


@njit(**_jit)
def trace_one(kinds, prm, ends, phi, xi, max_refl, corner_tol, path):
    """Billiard orbit from (xi, 0) with velocity (sin phi, cos phi) back to the opening.

    Returns (status, phi_plus, xi_plus, reflections, npath).  Impact points
    are written to ``path`` while it has room; npath counts them including
    the start and exit points.
    """
    x, y = xi, 0.0
    vx, vy = math.sin(phi), math.cos(phi)
    last = -1
    refl = 0
    npath = 0
    if path.shape[0] > 0:
        path[0, 0], path[0, 1] = x, y
    npath = 1
    n = kinds.shape[0]
    while True:
        best, bk, bnx, bny = np.inf, -1, 0.0, 0.0
        for k in range(n):
            t, nx, ny = hit_piece(kinds[k], prm[k], x, y, vx, vy, k == last)
            if t < best:
                best, bk, bnx, bny = t, k, nx, ny
        if vy < 0.0:
            te = -y / vy
            if te <= best:
                xe = x + te * vx
                if npath < path.shape[0]:
                    path[npath, 0], path[npath, 1] = xe, 0.0
                npath += 1
                if xe <= corner_tol or xe >= 1.0 - corner_tol:
                    if -corner_tol <= xe <= 1.0 + corner_tol:
                        return CORNER, np.nan, np.nan, refl, npath
                    return FAILURE, np.nan, np.nan, refl, npath
                if refl == 0:
                    return FAILURE, np.nan, np.nan, refl, npath
                return OK, math.atan2(-vx, -vy), xe, refl, npath
        if bk < 0:
            return FAILURE, np.nan, np.nan, refl, npath
        x += best * vx
        y += best * vy
        if npath < path.shape[0]:
            path[npath, 0], path[npath, 1] = x, y
        npath += 1
        e = ends[bk]
        if math.hypot(x - e[0], y - e[1]) < corner_tol or math.hypot(x - e[2], y - e[3]) < corner_tol:
            return CORNER, np.nan, np.nan, refl, npath
        dot = vx * bnx + vy * bny
        if -dot < GRAZE_TOL:
            return GRAZING, np.nan, np.nan, refl, npath
        vx -= 2.0 * dot * bnx
        vy -= 2.0 * dot * bny
        refl += 1
        last = bk
        if refl > max_refl:
            return CAP, np.nan, np.nan, refl, npath


@njit(**_jit)
def _mirror_map(phi, xi):
    return OK, -phi, xi, 1, 1


@njit(parallel=True, **_jit)
def trace_many(kinds, prm, ends, phis, xis, max_refl, corner_tol, flat):
    m = phis.shape[0]
    status = np.empty(m, np.int8)
    php = np.empty(m)
    xip = np.empty(m)
    refl = np.empty(m, np.int64)
    nopath = np.empty((0, 2))
    for k in prange(m):
        if flat:
            s, p, q, r, _ = _mirror_map(phis[k], xis[k])
        else:
            s, p, q, r, _ = trace_one(kinds, prm, ends, phis[k], xis[k], max_refl, corner_tol, nopath)
        status[k], php[k], xip[k], refl[k] = s, p, q, r
    return status, php, xip, refl


@njit(**_jit)
def _neumaier(s, c, v):
    t = s + v
    if abs(s) >= abs(v):
        c += (s - t) + v
    else:
        c += (v - t) + s
    return t, c


@njit(parallel=True, **_jit)
def grid_rows(kinds, prm, ends, n1, n2, max_refl, corner_tol, flat, backward):
    """Per-angle row sums of cos(phi) (1 + cos(phi - phi+)) on the midpoint grid.

    Row j is accumulated sequentially (compensated) by a single worker, so
    the result does not depend on scheduling.  Discarded orbits contribute
    the single-mirror value cos(phi) (1 + cos 2 phi).  With ``backward`` a
    second row sum re-traces every image state and uses
    cos(phi) (1 + cos(phi+ - phi++)).
    """
    fwd = np.zeros(n2)
    bwd = np.zeros(n2)
    ndisc = np.zeros(n2, np.int64)
    nopath = np.empty((0, 2))
    for j in prange(n2):
        phi = math.pi * ((j + 1) - (n2 + 1) / 2.0) / n2
        cphi = math.cos(phi)
        mirror = cphi * (1.0 + math.cos(2.0 * phi))
        s, c, sb, cb = 0.0, 0.0, 0.0, 0.0
        nd = 0
        for i in range(n1):
            xi = (i + 0.5) / n1
            if flat:
                st, pp, xp = OK, -phi, xi
            else:
                st, pp, xp, _, _ = trace_one(kinds, prm, ends, phi, xi, max_refl, corner_tol, nopath)
            if st == OK:
                v = cphi * (1.0 + math.cos(phi - pp))
            else:
                v = mirror
                nd += 1
            s, c = _neumaier(s, c, v)
            if backward:
                if st != OK:
                    vb = mirror
                else:
                    if flat:
                        st2, pp2 = OK, -pp
                    else:
                        st2, pp2, _, _, _ = trace_one(kinds, prm, ends, pp, xp, max_refl, corner_tol, nopath)
                    if st2 == OK:
                        vb = cphi * (1.0 + math.cos(pp - pp2))
                    else:
                        vb = cphi * (1.0 + math.cos(2.0 * pp))
                sb, cb = _neumaier(sb, cb, vb)
        fwd[j] = s + c
        bwd[j] = sb + cb
        ndisc[j] = nd
    return fwd, bwd, ndisc
