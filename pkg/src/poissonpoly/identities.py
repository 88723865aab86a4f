"""Monte Carlo verification of the Poisson-polytope identities.

Every verifier returns :class:`~poissonpoly.reports.IdentityReport` objects
whose ``diff`` has expectation exactly zero when the identity holds. Where
both sides are functionals of one realisation the comparison is paired;
where they need different intensities or point counts, two independent
batches are compared.

Simulated data are keyed by the simulation itself (model, intensity or size,
batch role), not by the verifier, so verifiers that look at the same
process with the same seed see the same replications.
"""
from __future__ import annotations

import json
import math
from collections import OrderedDict

import numpy as np

from . import seeding
from .combinatorics import MAX_ORDER, StirlingTable, falling_factorial_array, kstats
from .measure import MeasureModel
from .process import DEFAULT_AUX_POINTS, simulate_block
from .reports import (DEFAULT_THRESHOLD, Accumulator, IdentityReport, concat_blocks,
                      merge_reports, run_blocks, two_sample_report)

GF_BOUND = 5.0
DEFAULT_BOOTSTRAP = 200
_STIRLING = StirlingTable(MAX_ORDER)
_CACHE: OrderedDict = OrderedDict()
_CACHE_SIZE = 6


def _block(rng, count, model, **kw):
    return simulate_block(model, count, rng, **kw)


def _label(role: str, m: MeasureModel, value) -> str:
    return f"{role}|{json.dumps(m.describe(), sort_keys=True)}|{value!r}"


def simulate(m: MeasureModel, R: int, seed: int, *, t: float | None = None,
             n: int | None = None, role: str = "poisson", aux_points: int = 0,
             split_x=(), aux_pairs: int = 0, workers: int = 1) -> list:
    """Per-block simulation results for ``R`` replications (memoised)."""
    value = float(t) if t is not None else int(n)
    label = _label(role, m, value)
    key = (label, R, seed, aux_points, tuple(split_x), aux_pairs)
    if key in _CACHE:
        _CACHE.move_to_end(key)
        return _CACHE[key]
    kw = {"t": t} if t is not None else {"n": n}
    res = run_blocks(_block, R, seed, label, workers=workers, model=m,
                     aux_points=aux_points, split_x=tuple(split_x), aux_pairs=aux_pairs,
                     **kw)
    _CACHE[key] = res
    while len(_CACHE) > _CACHE_SIZE:
        _CACHE.popitem(last=False)
    return res


def clear_cache():
    _CACHE.clear()


def _params(m: MeasureModel, **kw) -> dict:
    out = dict(m.describe())
    out.update(kw)
    return out


def _paired(identity_id, blocks, lhs_fn, rhs_fn, params, seed, threshold):
    cfg = (identity_id, tuple(sorted((k, str(v)) for k, v in params.items())))
    parts = [Accumulator.from_arrays(lhs_fn(b), rhs_fn(b), cfg) for b in blocks]
    return merge_reports(parts, identity_id, params, seed, threshold)


def _bootstrap_se(stat_fn, arrays, B, rng) -> float:
    """Joint bootstrap: all arrays are resampled with the same indices."""
    n = len(arrays[0])
    vals = np.empty(B)
    for b in range(B):
        idx = rng.integers(0, n, size=n)
        vals[b] = stat_fn(*(a[idx] for a in arrays))
    return float(np.std(vals, ddof=1))


def _boot_rng(seed, identity_id, params):
    return seeding.stream(seed, f"bootstrap|{identity_id}|{json.dumps(params, sort_keys=True)}")


# ---------------------------------------------------------------- inner points

def verify_factorial_moment(m: MeasureModel, t: float, k: int, R: int, *, seed: int = 0,
                            workers: int = 1, threshold: float = DEFAULT_THRESHOLD) -> IdentityReport:
    """E I_(k) = t^k E mu(Pi_t)^k, paired per replication."""
    if not 1 <= k <= MAX_ORDER:
        raise ValueError(f"k must be in 1..{MAX_ORDER}")
    blocks = simulate(m, R, seed, t=t, workers=workers)
    return _paired("factorial_moment", blocks,
                   lambda b: falling_factorial_array(b["I"], k),
                   lambda b: t ** k * b["mu"] ** k,
                   _params(m, t=t, k=k, R=R), seed, threshold)


def verify_variance_I(m: MeasureModel, t: float, R: int, *, seed: int = 0, workers: int = 1,
                      B: int = DEFAULT_BOOTSTRAP,
                      threshold: float = DEFAULT_THRESHOLD) -> IdentityReport:
    """Var I = t^2 Var mu(Pi_t) + t E mu(Pi_t), bootstrap standard error."""
    data = concat_blocks(simulate(m, R, seed, t=t, workers=workers))
    I, mu = data["I"].astype(float), data["mu"]

    def sides(I, mu):
        return np.var(I, ddof=1), t * t * np.var(mu, ddof=1) + t * np.mean(mu)

    lhs, rhs = sides(I, mu)
    params = _params(m, t=t, R=R, B=B)
    se = _bootstrap_se(lambda a, b: np.subtract(*sides(a, b)), (I, mu), B,
                       _boot_rng(seed, "variance_I", params))
    return IdentityReport("variance_I", float(lhs), float(rhs), float(lhs - rhs), se,
                          R, params, seed, threshold)


def verify_gf_identity(m: MeasureModel, t: float, z_list, R: int, *, seed: int = 0,
                       workers: int = 1, threshold: float = DEFAULT_THRESHOLD) -> list:
    """E (z+1)^I = E exp(t z mu(Pi_t)) at each real z, paired.

    For -2 <= z <= 0 both sides lie in [-1, 1] and any t is accepted; outside
    that range |t z| must not exceed ``GF_BOUND``.
    """
    z_list = [float(z) for z in z_list]
    for z in z_list:
        if not -2.0 <= z <= 0.0 and abs(t * z) > GF_BOUND:
            raise ValueError(
                f"|t*z| = {abs(t * z):g} exceeds {GF_BOUND:g}: exp(t z mu) becomes too "
                "heavy-tailed for a usable standard error; choose a smaller |z|")
    blocks = simulate(m, R, seed, t=t, workers=workers)
    reports = []
    for z in z_list:
        r = _paired("gf", blocks,
                    lambda b, z=z: np.power(z + 1.0, b["I"].astype(float)),
                    lambda b, z=z: np.exp(t * z * b["mu"]),
                    _params(m, t=t, z=z, R=R), seed, threshold)
        if z < 0 and r.diff != 0.0:
            # (z+1)^I is nearly an indicator of a rare event when z is close to -1;
            # with no events observed the sample variance is ~0, so the standard
            # error is bounded below by the resolution 1/R of a bounded statistic
            r.se = max(r.se, 1.0 / R)
        reports.append(r)
    return reports


def verify_cumulants(m: MeasureModel, t: float, order: int, R: int, *, seed: int = 0,
                     workers: int = 1, B: int = DEFAULT_BOOTSTRAP,
                     threshold: float = DEFAULT_THRESHOLD) -> list:
    """sum_j [k j] kappa_j(I) = t^k kappa_k(mu) for k = 1..order.

    Both sides are k-statistics of the same replications; the bootstrap
    resamples replication indices so the two sides move together.
    """
    if not 1 <= order <= MAX_ORDER:
        raise ValueError(f"order must be in 1..{MAX_ORDER}")
    data = concat_blocks(simulate(m, R, seed, t=t, workers=workers))
    I, mu = data["I"].astype(float), data["mu"]

    def sides(I, mu, k):
        kI = kstats(I, k)
        lhs = sum(_STIRLING(k, j) * kI[j - 1] for j in range(1, k + 1))
        return lhs, t ** k * kstats(mu, k)[k - 1]

    reports = []
    for k in range(1, order + 1):
        params = _params(m, t=t, k=k, R=R, B=B)
        lhs, rhs = sides(I, mu, k)
        se = _bootstrap_se(lambda a, b, k=k: np.subtract(*sides(a, b, k)), (I, mu), B,
                           _boot_rng(seed, "cumulant", params))
        reports.append(IdentityReport("cumulant", float(lhs), float(rhs), float(lhs - rhs),
                                      se, R, params, seed, threshold))
    return reports


# ---------------------------------------------------------------- vertices

def verify_vertex_expectation(m: MeasureModel, t: float, R: int, *, seed: int = 0,
                              workers: int = 1,
                              threshold: float = DEFAULT_THRESHOLD) -> IdentityReport:
    """E N = t E Delta(Pi_t), paired."""
    blocks = simulate(m, R, seed, t=t, workers=workers)
    return _paired("vertex_expectation", blocks, lambda b: b["N"].astype(float),
                   lambda b: t * b["delta"], _params(m, t=t, R=R), seed, threshold)


def verify_point_balance(m: MeasureModel, t: float, R: int, *, seed: int = 0,
                         workers: int = 1,
                         threshold: float = DEFAULT_THRESHOLD) -> IdentityReport:
    """E N + E I = t (the Poisson mean of the total count)."""
    blocks = simulate(m, R, seed, t=t, workers=workers)
    return _paired("point_balance", blocks, lambda b: (b["N"] + b["I"]).astype(float),
                   lambda b: np.full(len(b["N"]), float(t)), _params(m, t=t, R=R),
                   seed, threshold)


def verify_vertex_second_moment(m: MeasureModel, t: float, R: int,
                                J: int = DEFAULT_AUX_POINTS, *, seed: int = 0,
                                workers: int = 1, B: int = DEFAULT_BOOTSTRAP,
                                threshold: float = DEFAULT_THRESHOLD):
    """E N_(2) = t^2 E Delta^2 - 2 t^2 E D and the implied variance relation.

    ``D`` is the missed-region integral of the mass added by one extra point,
    estimated per replication from ``J`` auxiliary points. Returns
    ``(second_moment_report, variance_report)``.
    """
    if J <= 0:
        raise ValueError("J (auxiliary points per replication) must be positive")
    blocks = simulate(m, R, seed, t=t, aux_points=J, workers=workers)
    params = _params(m, t=t, R=R, J=J)
    second = _paired("vertex_second_moment", blocks,
                     lambda b: falling_factorial_array(b["N"], 2),
                     lambda b: t * t * (b["delta"] ** 2 - 2.0 * b["aux"]),
                     params, seed, threshold)

    data = concat_blocks(blocks)
    N, delta, aux = data["N"].astype(float), data["delta"], data["aux"]

    def sides(N, delta, aux):
        return (np.var(N, ddof=1),
                t * t * np.var(delta, ddof=1) + t * np.mean(delta) - 2 * t * t * np.mean(aux))

    vparams = dict(params, B=B)
    lhs, rhs = sides(N, delta, aux)
    se = _bootstrap_se(lambda *a: np.subtract(*sides(*a)), (N, delta, aux), B,
                       _boot_rng(seed, "variance_N", vparams))
    variance = IdentityReport("variance_N", float(lhs), float(rhs), float(lhs - rhs), se,
                              R, vparams, seed, threshold)
    return second, variance


def verify_vertex_factorial_moment(m: MeasureModel, t: float, k: int, R: int,
                                   J: int = DEFAULT_AUX_POINTS, *, seed: int = 0,
                                   workers: int = 1,
                                   threshold: float = DEFAULT_THRESHOLD) -> IdentityReport:
    """E N_(k) against its expansion in Delta and missed-region integrals, k <= 3.

    k = 3 reads E N_(3) = t^3 (E Delta^3 - 3 E iint mu([eta, x1, x2] \\ [eta])
    + 3 E int mu([eta, x] \\ [eta])^2), with both integration points ranging
    over the missed region; J single points and J pairs estimate the integrals.
    """
    if not 1 <= k <= 3:
        raise ValueError("vertex factorial moments are implemented for k in 1..3")
    if k >= 2 and J <= 0:
        raise ValueError("J (auxiliary points per replication) must be positive")
    aux = J if k >= 2 else 0
    pairs = J if k == 3 else 0
    blocks = simulate(m, R, seed, t=t, aux_points=aux, aux_pairs=pairs, workers=workers)
    rhs = {1: lambda b: t * b["delta"],
           2: lambda b: t * t * (b["delta"] ** 2 - 2.0 * b["aux"]),
           3: lambda b: t ** 3 * (b["delta"] ** 3 - 3.0 * b["aux_pair"] + 3.0 * b["aux_sq"])}[k]
    params = _params(m, t=t, k=k, R=R, J=J) if k >= 2 else _params(m, t=t, k=k, R=R)
    return _paired("vertex_factorial_moment", blocks,
                   lambda b: falling_factorial_array(b["N"], k), rhs, params, seed, threshold)


def verify_vertex_gf(m: MeasureModel, t: float, x_list, R: int, *, seed: int = 0,
                     workers: int = 1, threshold: float = DEFAULT_THRESHOLD) -> list:
    """E x^N(Pi_t) = E exp(t (x-1) Delta(Pi_xt)) for x in [0, 1].

    The right side needs a separate batch at intensity x t, so the main
    comparison is unpaired. The thinning coupling (probability that every
    vertex of Pi_t survives an independent x-split) is checked against both
    sides: paired against the left, unpaired against the right.
    """
    x_list = [float(x) for x in x_list]
    for x in x_list:
        if not 0.0 <= x <= 1.0:
            raise ValueError(f"x must lie in [0, 1], got {x}")
    left = concat_blocks(simulate(m, R, seed, t=t, split_x=x_list, workers=workers))
    reports = []
    for j, x in enumerate(x_list):
        right = concat_blocks(simulate(m, R, seed, t=x * t, role="poisson-rhs",
                                       workers=workers))
        params = _params(m, t=t, x=x, R=R)
        g = np.power(x, left["N"].astype(float))
        h = np.exp(t * (x - 1.0) * right["delta"])
        c = left["coupled"][:, j].astype(float)
        floor = 1.0 / R
        reports.append(two_sample_report("vertex_gf", g, h, params, seed, threshold, floor))
        acc = Accumulator.from_arrays(c, g)
        reports.append(merge_reports([acc], "vertex_gf_coupling_lhs", params, seed, threshold))
        reports.append(two_sample_report("vertex_gf_coupling_rhs", c, h, params, seed,
                                         threshold, floor))
    return reports


def verify_efron_buchta(m: MeasureModel, n: int, k: int, R: int, *, seed: int = 0,
                        workers: int = 1,
                        threshold: float = DEFAULT_THRESHOLD) -> IdentityReport:
    """Binomial model: E mu(P_n)^k = E prod_{i<=k} (1 - N(P_{n+k}) / (n+i)).

    ``k = 1`` is Efron's identity. The two sides use independent batches.
    """
    if n < m.dim + 1:
        raise ValueError(f"n must be at least d+1 = {m.dim + 1}")
    if k < 1:
        raise ValueError("k must be positive")
    left = concat_blocks(simulate(m, R, seed, n=n, role="binomial", workers=workers))
    right = concat_blocks(simulate(m, R, seed, n=n + k, role="binomial-rhs",
                                   workers=workers))
    lhs = left["mu"] ** k
    Nr = right["N"].astype(float)
    rhs = np.prod([1.0 - Nr / (n + i) for i in range(1, k + 1)], axis=0)
    return two_sample_report("efron_buchta", lhs, rhs, _params(m, n=n, k=k, R=R), seed,
                             threshold)


def z_spread(z_scores) -> tuple:
    """Mean and standard deviation of a collection of z-scores."""
    z = np.asarray(list(z_scores), dtype=float)
    return float(z.mean()), float(z.std(ddof=1))
