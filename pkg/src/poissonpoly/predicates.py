"""Orientation predicates with an exact fallback.

The floating-point determinant is trusted only when it exceeds Shewchuk's
static forward error bound; otherwise the sign is recomputed with
``fractions.Fraction``, which represents every double exactly.
"""
from __future__ import annotations

from fractions import Fraction

import numpy as np

_EPS = 2.0 ** -53
CCW_ERRBOUND = (3.0 + 16.0 * _EPS) * _EPS
O3D_ERRBOUND = (7.0 + 56.0 * _EPS) * _EPS


def _sign(v) -> int:
    return (v > 0) - (v < 0)


def orient2d_exact(a, b, c) -> int:
    ax, ay = Fraction(a[0]), Fraction(a[1])
    bx, by = Fraction(b[0]), Fraction(b[1])
    cx, cy = Fraction(c[0]), Fraction(c[1])
    return _sign((bx - ax) * (cy - ay) - (by - ay) * (cx - ax))


def orient2d(a, b, c) -> int:
    """Sign of the turn a -> b -> c: +1 left (CCW), -1 right, 0 collinear."""
    detleft = (a[0] - c[0]) * (b[1] - c[1])
    detright = (a[1] - c[1]) * (b[0] - c[0])
    det = detleft - detright
    bound = CCW_ERRBOUND * (abs(detleft) + abs(detright))
    if det > bound:
        return 1
    if -det > bound:
        return -1
    return orient2d_exact(a, b, c)


def orient3d_exact(a, b, c, d) -> int:
    a = [Fraction(v) for v in a]
    u = [Fraction(b[i]) - a[i] for i in range(3)]
    v = [Fraction(c[i]) - a[i] for i in range(3)]
    w = [Fraction(d[i]) - a[i] for i in range(3)]
    det = (u[0] * (v[1] * w[2] - v[2] * w[1])
           - u[1] * (v[0] * w[2] - v[2] * w[0])
           + u[2] * (v[0] * w[1] - v[1] * w[0]))
    return _sign(det)


def orient3d(a, b, c, d) -> int:
    """Sign of det[b-a, c-a, d-a].

    Positive when ``d`` lies on the side the normal ``(b-a) x (c-a)`` points to.
    """
    adx, ady, adz = a[0] - d[0], a[1] - d[1], a[2] - d[2]
    bdx, bdy, bdz = b[0] - d[0], b[1] - d[1], b[2] - d[2]
    cdx, cdy, cdz = c[0] - d[0], c[1] - d[1], c[2] - d[2]
    bdxcdy, cdxbdy = bdx * cdy, cdx * bdy
    cdxady, adxcdy = cdx * ady, adx * cdy
    adxbdy, bdxady = adx * bdy, bdx * ady
    det = (adz * (bdxcdy - cdxbdy) + bdz * (cdxady - adxcdy)
           + cdz * (adxbdy - bdxady))
    permanent = ((abs(bdxcdy) + abs(cdxbdy)) * abs(adz)
                 + (abs(cdxady) + abs(adxcdy)) * abs(bdz)
                 + (abs(adxbdy) + abs(bdxady)) * abs(cdz))
    bound = O3D_ERRBOUND * permanent
    # det above is det[a-d, b-d, c-d] = -det[b-a, c-a, d-a]
    if det > bound:
        return -1
    if -det > bound:
        return 1
    return orient3d_exact(a, b, c, d)


def orient2d_batch(a, b, c) -> np.ndarray:
    """Vectorised orient2d over broadcastable (..., 2) arrays; returns int8 signs."""
    a, b, c = np.asarray(a, float), np.asarray(b, float), np.asarray(c, float)
    detleft = (a[..., 0] - c[..., 0]) * (b[..., 1] - c[..., 1])
    detright = (a[..., 1] - c[..., 1]) * (b[..., 0] - c[..., 0])
    det = detleft - detright
    bound = CCW_ERRBOUND * (np.abs(detleft) + np.abs(detright))
    out = np.where(det > bound, 1, np.where(-det > bound, -1, 0)).astype(np.int8)
    unsure = np.argwhere(np.abs(det) <= bound)
    if unsure.size:
        a_, b_, c_ = np.broadcast_arrays(a, b, c)
        for idx in map(tuple, unsure):
            out[idx] = orient2d_exact(a_[idx], b_[idx], c_[idx])
    return out
