"""Poisson and binomial point processes and their hull functionals."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special

from .geometry import convex_hull
from .measure import MeasureModel, extension_mass, mu_mass

DEFAULT_AUX_POINTS = 32


@dataclass(frozen=True, eq=False)
class ProcessSample:
    """One realisation: an (M, d) point array plus how it was produced."""

    points: np.ndarray
    intensity: float | None = None
    n: int | None = None
    seed_path: tuple = ()

    @property
    def M(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class FunctionalRecord:
    M: int
    N: int
    I: int
    mu_pi: float
    delta: float
    aux_D: float | None = None


def _distinct(pts, rep, m, rng):
    """Redraw points that exactly duplicate another point of the same replication."""
    if len(pts) < 2:
        return pts
    while True:
        keys = tuple(pts[:, j] for j in range(pts.shape[1] - 1, -1, -1)) + (rep,)
        order = np.lexsort(keys)
        s, r = pts[order], rep[order]
        dup = np.all(s[1:] == s[:-1], axis=1) & (r[1:] == r[:-1])
        if not dup.any():
            return pts
        pts = pts.copy()
        bad = order[1:][dup]
        pts[bad] = m.sample(len(bad), rng)


def sample_poisson(m: MeasureModel, t: float, rng: np.random.Generator,
                   seed_path: tuple = ()) -> ProcessSample:
    """Poisson process with intensity measure ``t * mu``."""
    if not t > 0:
        raise ValueError(f"intensity must be positive, got {t}")
    M = int(rng.poisson(t))
    pts = _distinct(m.sample(M, rng), np.zeros(M, int), m, rng)
    return ProcessSample(pts, intensity=float(t), seed_path=seed_path)


def sample_binomial(m: MeasureModel, n: int, rng: np.random.Generator,
                    seed_path: tuple = ()) -> ProcessSample:
    """Exactly ``n`` i.i.d. points from ``mu``."""
    if n < 0:
        raise ValueError("n must be non-negative")
    pts = _distinct(m.sample(n, rng), np.zeros(n, int), m, rng)
    return ProcessSample(pts, n=int(n), seed_path=seed_path)


def split(s: ProcessSample, x: float, rng: np.random.Generator):
    """Independent thinning: each point goes to the first part with probability x."""
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"split ratio must lie in [0, 1], got {x}")
    keep = rng.random(s.M) < x
    t = s.intensity
    first = ProcessSample(s.points[keep], intensity=None if t is None else x * t,
                          seed_path=s.seed_path + ("split", 0))
    second = ProcessSample(s.points[~keep], intensity=None if t is None else (1 - x) * t,
                           seed_path=s.seed_path + ("split", 1))
    return first, second


def evaluate(m: MeasureModel, s: ProcessSample, aux_points: int = 0,
             rng: np.random.Generator | None = None) -> FunctionalRecord:
    """Hull functionals of one realisation.

    With ``aux_points = J > 0`` also returns ``aux_D``, the average over J
    fresh mu-points x_j of ``1(x_j not in hull) * mu([hull, x_j] \\ hull)``,
    an unbiased estimate of the missed-region integral given the sample.
    """
    if aux_points < 0:
        raise ValueError("aux_points must be non-negative")
    hull = convex_hull(s.points, m.dim)
    N = hull.n_vertices
    mu_pi = mu_mass(m, hull)
    aux = None
    if aux_points > 0:
        if rng is None:
            raise ValueError("an aux random stream is required when aux_points > 0")
        xs = m.sample(aux_points, rng)
        aux = float(np.mean(extension_mass(m, hull, xs, base=mu_pi)))
    return FunctionalRecord(M=s.M, N=N, I=s.M - N, mu_pi=mu_pi,
                            delta=1.0 - mu_pi, aux_D=aux)


def _pair_mass(m, hull, pairs, base) -> float:
    """Mean over point pairs of 1(both outside the hull) * mass added by the pair."""
    flat = pairs.reshape(-1, m.dim)
    ext = extension_mass(m, hull, flat, base=base).reshape(len(pairs), 2)
    # a flat hull is missed by almost every point, even where one point adds nothing
    flat_hull = not hull.is_full_dimensional
    total = 0.0
    for (xa, xb), (ea, eb) in zip(pairs, ext):
        if flat_hull or (ea > 0 and eb > 0):
            grown = convex_hull(np.vstack([hull.vertices, xa[None], xb[None]]), m.dim)
            total += mu_mass(m, grown) - base
    return total / len(pairs)


def simulate_block(m: MeasureModel, count: int, rng: np.random.Generator, *,
                   t: float | None = None, n: int | None = None,
                   aux_points: int = 0, split_x=(), aux_pairs: int = 0) -> dict:
    """Simulate ``count`` independent replications and evaluate each.

    Exactly one of ``t`` (Poisson intensity, 0 allowed) or ``n`` (binomial
    size) is given. Returns arrays ``M, N, I, mu, delta`` and, when requested,
    ``aux`` and ``coupled`` (count x len(split_x) booleans: every hull vertex
    fell into the first part of an independent split at ratio x).

    ``aux`` comes with ``aux_sq``, the mean squared added mass over the same
    points. ``aux_pairs = P`` adds ``aux_pair``: the average over P fresh
    point pairs, both outside the hull, of the mass added by the pair.
    """
    if (t is None) == (n is None):
        raise ValueError("give exactly one of t or n")
    if t is not None:
        M = rng.poisson(t, count) if t > 0 else np.zeros(count, dtype=np.int64)
    else:
        M = np.full(count, n, dtype=np.int64)
    total = int(M.sum())
    d = m.dim
    rep = np.repeat(np.arange(count), M)
    pts = _distinct(m.sample(total, rng), rep, m, rng)
    offsets = np.concatenate([[0], np.cumsum(M)])
    aux_x = m.sample(count * aux_points, rng).reshape(count, aux_points, d) if aux_points else None
    split_x = tuple(split_x)
    u = rng.random(total) if split_x else None
    pair_x = m.sample(count * 2 * aux_pairs, rng).reshape(count, aux_pairs, 2, d) if aux_pairs else None

    N = np.zeros(count, dtype=np.int64)
    mu = np.zeros(count)
    aux = np.zeros(count) if aux_points else None
    aux_sq = np.zeros(count) if aux_points else None
    aux_pair = np.zeros(count) if aux_pairs else None
    coupled = np.zeros((count, len(split_x)), dtype=bool) if split_x else None

    if d == 1 and not split_x:
        nz = M > 0
        starts = offsets[:-1][nz]
        x = pts[:, 0]
        lo = np.full(count, np.nan)
        hi = np.full(count, np.nan)
        if total:
            lo[nz] = np.minimum.reduceat(x, starts)
            hi[nz] = np.maximum.reduceat(x, starts)
        N = np.minimum(M, 2)
        cdf = (lambda v: v) if m.kind == "uniform" else special.ndtr
        two = M >= 2
        mu[two] = cdf(hi[two]) - cdf(lo[two])
        if aux_points:
            X = aux_x[:, :, 0]
            L, H = lo[:, None], hi[:, None]
            ext = (np.where(X < L, cdf(L) - cdf(X), 0.0)
                   + np.where(X > H, cdf(X) - cdf(H), 0.0))
            ext[~nz] = 0.0
            aux = ext.mean(axis=1)
            aux_sq = (ext * ext).mean(axis=1)
        if aux_pairs:
            A, B = pair_x[:, :, 0, 0], pair_x[:, :, 1, 0]
            L, H = lo[:, None], hi[:, None]
            outside = ~((A >= L) & (A <= H)) & ~((B >= L) & (B <= H))
            new_lo = np.fmin(np.minimum(A, B), L)
            new_hi = np.fmax(np.maximum(A, B), H)
            grown = cdf(new_hi) - cdf(new_lo)
            aux_pair = np.where(outside, grown - mu[:, None], 0.0).mean(axis=1)
    else:
        for r in range(count):
            a, b = offsets[r], offsets[r + 1]
            hull = convex_hull(pts[a:b], d)
            N[r] = hull.n_vertices
            mu[r] = mu_mass(m, hull)
            if aux_points:
                ext = extension_mass(m, hull, aux_x[r], base=mu[r])
                aux[r] = np.mean(ext)
                aux_sq[r] = np.mean(ext * ext)
            if aux_pairs:
                aux_pair[r] = _pair_mass(m, hull, pair_x[r], mu[r])
            if split_x:
                uv = u[a + np.asarray(hull.vertex_indices, dtype=np.int64)]
                coupled[r] = [bool(np.all(uv < x)) for x in split_x]

    out = {"M": M, "N": N, "I": M - N, "mu": mu, "delta": 1.0 - mu}
    if aux_points:
        out["aux"] = aux
        out["aux_sq"] = aux_sq
    if aux_pairs:
        out["aux_pair"] = aux_pair
    if split_x:
        out["coupled"] = coupled
    return out
