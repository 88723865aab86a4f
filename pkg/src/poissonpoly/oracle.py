"""Exact and deterministic reference values for calibrating the estimators.

In one dimension (uniform mu on [0, 1]) the hull is [min, max]. For a Poisson
process of intensity t, the event {M >= 2, range = s} has density
``(1 - s) t^2 exp(-t (1 - s))`` on (0, 1): the extreme points sit at a and
a + s and no point falls in the remaining length 1 - s. Given the range, the
inner points form a Poisson(t s) count. Everything below is integrated
against that density.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy import integrate

from .measure import MeasureModel

_QUAD = dict(epsabs=1e-14, epsrel=1e-12, limit=200)


@dataclass(frozen=True)
class Oracle1DResult:
    t: float
    e_mu: float
    e_N: float
    e_I: float
    e_mu_sq: float
    var_mu: float
    var_I: float
    e_I_sq: float
    e_delta: float
    e_delta_sq: float
    e_N2: float
    e_aux: float
    var_N: float

    def to_dict(self) -> dict:
        return asdict(self)


def _range_moment(t: float, g) -> float:
    """E[g(range); M >= 2] for the Poisson process on [0, 1]."""
    f = lambda s: g(s) * (1.0 - s) * t * t * math.exp(-t * (1.0 - s))  # noqa: E731
    val, _ = integrate.quad(f, 0.0, 1.0, **_QUAD)
    return val


def oracle_1d(t: float) -> Oracle1DResult:
    if not t > 0:
        raise ValueError(f"intensity must be positive, got {t}")
    et = math.exp(-t)
    e_mu = 1.0 - 2.0 * (1.0 - et) / t + et
    e_N = 2.0 - 2.0 * et - t * et
    e_I = t - e_N
    e_mu_sq = _range_moment(t, lambda s: s * s)
    e_I_sq = _range_moment(t, lambda s: t * s + (t * s) ** 2)
    p_le1 = et + t * et
    e_delta_sq = p_le1 + _range_moment(t, lambda s: (1.0 - s) ** 2)
    e_N2 = 2.0 * (1.0 - p_le1)
    # M >= 2: gaps a (left) and c (right) with a + c = u carry density
    # t^2 e^{-t u} on the triangle; the added length integrates to (a^2 + c^2) / 2.
    gaps, _ = integrate.quad(lambda u: math.exp(-t * u) * u ** 3 / 3.0, 0.0, 1.0, **_QUAD)
    # M == 1: a single point at uniform a adds |x - a|, integrating to 1/3 on average
    e_aux = t * t * gaps + t * et / 3.0
    e_N_sq = e_N2 + e_N
    return Oracle1DResult(
        t=float(t), e_mu=e_mu, e_N=e_N, e_I=e_I, e_mu_sq=e_mu_sq,
        var_mu=e_mu_sq - e_mu ** 2, var_I=e_I_sq - e_I ** 2, e_I_sq=e_I_sq,
        e_delta=1.0 - e_mu, e_delta_sq=e_delta_sq, e_N2=e_N2, e_aux=e_aux,
        var_N=e_N_sq - e_N ** 2)


# ------------------------------------------------------------ binomial cubature

FUNCTIONALS = ("mu", "N")


def _gauss(panels: int, order: int, lo: float = 0.0, hi: float = 1.0):
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(lo, hi, panels + 1)
    h = np.diff(edges)
    nodes = (edges[:-1, None] + (x[None, :] + 1.0) * h[:, None] / 2.0).ravel()
    weights = (w[None, :] * h[:, None] / 2.0).ravel()
    return nodes, weights


def _abs_linear_square(a, b, c):
    """Integral of |a x + b y + c| over [0, 1]^2, vectorised.

    Uses |g| = 2 g^+ - g, with the positive part integrated exactly over the
    clipped polygon {g > 0} (area times value at its centroid).
    """
    sq = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    g = a[:, None] * sq[None, :, 0] + b[:, None] * sq[None, :, 1] + c[:, None]
    slots = []
    for i in range(4):
        j = (i + 1) % 4
        gi, gj = g[:, i], g[:, j]
        slots.append((np.broadcast_to(sq[i], (len(a), 2)), gi > 0))
        cross = (gi > 0) != (gj > 0)
        with np.errstate(divide="ignore", invalid="ignore"):
            s = np.where(cross, gi / (gi - gj), 0.0)
        pt = sq[i][None, :] + s[:, None] * (sq[j] - sq[i])[None, :]
        slots.append((pt, cross))
    # forward-fill missing slots with the last valid vertex: repeated vertices
    # contribute nothing to the shoelace sums
    pts = np.stack([p for p, _ in slots], axis=1)
    valid = np.stack([v for _, v in slots], axis=1)
    any_valid = valid.any(axis=1)
    first = np.argmax(valid, axis=1)
    cur = pts[np.arange(len(a)), first]
    filled = np.empty_like(pts)
    for k in range(pts.shape[1]):
        cur = np.where(valid[:, k, None], pts[:, k], cur)
        filled[:, k] = cur
    x, y = filled[..., 0], filled[..., 1]
    xn, yn = np.roll(x, -1, axis=1), np.roll(y, -1, axis=1)
    cr = x * yn - xn * y
    area = 0.5 * cr.sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        cx = np.where(area > 0, ((x + xn) * cr).sum(axis=1) / (6 * area), 0.0)
        cy = np.where(area > 0, ((y + yn) * cr).sum(axis=1) / (6 * area), 0.0)
    pos = np.where(any_valid & (area > 0), area * (a * cx + b * cy + c), 0.0)
    total = a / 2.0 + b / 2.0 + c
    return 2.0 * pos - total


def _abs_signed_distance_disk(h, r):
    """Integral over the radius-r disk of |s - h|, s a coordinate along a unit normal."""
    h = np.clip(h, -r, r)
    root = np.sqrt(np.maximum(r * r - h * h, 0.0))
    cap = r * r * np.arccos(h / r) - h * root
    first = 2.0 / 3.0 * root ** 3
    return 2.0 * first - 2.0 * h * cap + h * math.pi * r * r


def _triangle_area_square(panels=12, order=4, chunk=200_000):
    x, w = _gauss(panels, order)
    X1, Y1, X2, Y2 = (v.ravel() for v in np.meshgrid(x, x, x, x, indexing="ij"))
    W = np.einsum("i,j,k,l->ijkl", w, w, w, w).ravel()
    acc = []
    for s in range(0, len(W), chunk):
        sl = slice(s, s + chunk)
        dx, dy = X2[sl] - X1[sl], Y2[sl] - Y1[sl]
        # cross((dx, dy), (x - x1, y - y1)) = -dy x + dx y + (dy x1 - dx y1)
        val = _abs_linear_square(-dy, dx, dy * X1[sl] - dx * Y1[sl])
        acc.append(np.dot(W[sl], val))
    return 0.5 * math.fsum(acc)


def _triangle_area_disk(r, n_r=24, n_theta=48, chunk=200_000):
    xr, wr = np.polynomial.legendre.leggauss(n_r)
    rr = (xr + 1.0) * r / 2.0
    wr = wr * r / 2.0 * rr
    th = np.arange(n_theta) * (2.0 * math.pi / n_theta)
    wt = np.full(n_theta, 2.0 * math.pi / n_theta)
    R_, T_ = np.meshgrid(rr, th, indexing="ij")
    px, py = (R_ * np.cos(T_)).ravel(), (R_ * np.sin(T_)).ravel()
    pw = np.outer(wr, wt).ravel()
    i1, i2 = (v.ravel() for v in np.meshgrid(np.arange(len(px)), np.arange(len(px)), indexing="ij"))
    acc = []
    for s in range(0, len(i1), chunk):
        a, b = i1[s:s + chunk], i2[s:s + chunk]
        dx, dy = px[b] - px[a], py[b] - py[a]
        L = np.hypot(dx, dy)
        with np.errstate(divide="ignore", invalid="ignore"):
            h = np.where(L > 0, (-dy * px[a] + dx * py[a]) / L, 0.0)
        val = L * _abs_signed_distance_disk(h, r)
        acc.append(np.dot(pw[a] * pw[b], val))
    return 0.5 * math.fsum(acc)


def brute_force_small(m: MeasureModel, n: int, functional: str) -> float:
    """Deterministic binomial-model expectation for tiny configurations.

    Supported: uniform measures with d <= 2 and n <= 4; ``functional`` is
    ``"mu"`` (expected mu-content of the hull of n points) or ``"N"``
    (expected vertex count). The triangle case reduces the innermost point's
    integral to a closed form and applies tensor Gauss rules to the rest.
    """
    if functional not in FUNCTIONALS:
        raise ValueError(f"functional must be one of {FUNCTIONALS}")
    if m.kind != "uniform" or m.dim > 2 or not 0 <= n <= 4:
        raise ValueError("brute force supports uniform measures, d <= 2, n <= 4")
    shape = m.body.shape
    if m.dim == 1:
        if functional == "N":
            return float(min(n, 2))
        if n < 2:
            return 0.0
        # range of n uniforms has density n (n-1) s^(n-2) (1-s)
        val, _ = integrate.quad(lambda s: s * n * (n - 1) * s ** (n - 2) * (1 - s),
                                0.0, 1.0, **_QUAD)
        return val
    if functional == "N":
        if n <= 3:
            return float(n)
        raise ValueError("N is only available for n <= 3 in d = 2")
    if n < 3:
        return 0.0
    if n > 3:
        raise ValueError("mu is only available for n <= 3 in d = 2")
    if shape == "square":
        return _triangle_area_square()
    if shape == "disk":
        return _triangle_area_disk(m.body.params[0])
    raise ValueError(f"brute force is not available for body {shape!r}")
