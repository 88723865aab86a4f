"""Stirling numbers of the first kind, falling factorials and k-statistics."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MAX_ORDER = 4
MIN_SAMPLES = 30


class StirlingTable:
    """Signed Stirling numbers of the first kind ``[n k]`` for ``n <= n_max``.

    Row ``n`` holds the coefficients of z(z-1)...(z-n+1) in powers of z,
    built from ``[n+1, k] = [n, k-1] - n [n, k]``. Entries are Python ints.
    """

    def __init__(self, n_max: int = 20):
        if n_max < 0:
            raise ValueError("n_max must be non-negative")
        self.n_max = n_max
        rows = [[1]]
        for n in range(n_max):
            prev = rows[-1] + [0]
            row = [0] * (n + 2)
            for k in range(1, n + 2):
                row[k] = prev[k - 1] - n * prev[k]
            rows.append(row)
        self._rows = tuple(tuple(r) for r in rows)

    def __call__(self, n: int, k: int) -> int:
        if not (0 <= k <= n <= self.n_max):
            raise IndexError(f"Stirling index out of range: n={n}, k={k}, n_max={self.n_max}")
        return self._rows[n][k]

    def row(self, n: int) -> tuple:
        return self._rows[n]


_DEFAULT_TABLE = StirlingTable(20)


def stirling_first(n: int, k: int, table: StirlingTable | None = None) -> int:
    return (table or _DEFAULT_TABLE)(n, k)


def falling_factorial(x: int, k: int) -> int:
    """x (x-1) ... (x-k+1); 1 for k == 0."""
    if k < 0:
        raise ValueError("k must be non-negative")
    out = 1
    for j in range(k):
        out *= x - j
    return out


def falling_factorial_array(x, k: int) -> np.ndarray:
    """Elementwise falling factorial of a non-negative integer array, as float.

    The product is formed in int64 (exact for the counts seen here) and only
    then converted.
    """
    x = np.asarray(x, dtype=np.int64)
    out = np.ones_like(x)
    for j in range(k):
        out = out * np.maximum(x - j, 0)
    return out.astype(float)


def kstats(x, order: int = MAX_ORDER, axis: int = -1) -> np.ndarray:
    """Unbiased cumulant estimators k_1..k_order along ``axis``.

    Returns an array whose leading dimension indexes the order.
    """
    if order > MAX_ORDER:
        raise ValueError(f"k-statistics implemented up to order {MAX_ORDER}")
    x = np.asarray(x, dtype=float)
    n = x.shape[axis]
    mean = x.mean(axis=axis, keepdims=True)
    # constant samples must give exactly zero higher cumulants
    first = np.take(x, [0], axis=axis)
    mean = np.where(np.ptp(x, axis=axis, keepdims=True) == 0, first, mean)
    c = x - mean
    out = [np.squeeze(mean, axis=axis)]
    if order >= 2:
        c2 = c * c
        m2 = c2.mean(axis=axis)
        out.append(n / (n - 1) * m2)
    if order >= 3:
        m3 = (c2 * c).mean(axis=axis)
        out.append(n * n / ((n - 1) * (n - 2)) * m3)
    if order >= 4:
        m4 = (c2 * c2).mean(axis=axis)
        out.append(n * n * ((n + 1) * m4 - 3 * (n - 1) * m2 * m2)
                   / ((n - 1) * (n - 2) * (n - 3)))
    return np.array(out)


@dataclass
class MomentSet:
    raw: list
    factorial: list | None
    cumulants: list
    order: int
    n_reps: int
    se: dict


def estimate_moments(samples, order: int, *, B: int = 200,
                     rng: np.random.Generator | None = None) -> MomentSet:
    """Raw, factorial (integer samples only) moments and k-statistics.

    Standard errors come from a nonparametric bootstrap with ``B`` resamples
    and are keyed by ``"raw"``, ``"factorial"`` and ``"cumulants"``.
    """
    x = np.asarray(samples)
    n = len(x)
    if n < MIN_SAMPLES:
        raise ValueError(f"need at least {MIN_SAMPLES} samples, got {n}")
    if not 1 <= order <= MAX_ORDER:
        raise ValueError(f"order must be in 1..{MAX_ORDER}")
    is_int = np.issubdtype(x.dtype, np.integer)
    xf = x.astype(float)

    def stats(v, vf):
        raw = [np.mean(vf ** k, axis=-1) for k in range(1, order + 1)]
        fac = ([np.mean(falling_factorial_array(v, k), axis=-1) for k in range(1, order + 1)]
               if is_int else None)
        return raw, fac, list(kstats(vf, order, axis=-1))

    raw, fac, cum = stats(x, xf)
    rng = rng if rng is not None else np.random.default_rng(0)
    boot = {"raw": [], "factorial": [], "cumulants": []}
    for _ in range(B):
        idx = rng.integers(0, n, size=n)
        braw, bfac, bcum = stats(x[idx], xf[idx])
        boot["raw"].append(braw)
        boot["cumulants"].append(bcum)
        if is_int:
            boot["factorial"].append(bfac)

    def sd(rows):
        return [float(v) for v in np.std(np.asarray(rows, dtype=float), axis=0, ddof=1)]

    se = {"raw": sd(boot["raw"]), "cumulants": sd(boot["cumulants"])}
    if is_int:
        se["factorial"] = sd(boot["factorial"])
    return MomentSet(raw=[float(v) for v in raw],
                     factorial=[float(v) for v in fac] if is_int else None,
                     cumulants=[float(v) for v in cum], order=order,
                     n_reps=n, se=se)


def cumulant_transform(kappa_I, t: float, order: int,
                       st: StirlingTable | None = None) -> list:
    """Predicted ``t^k kappa_k(mu)`` from cumulants of the inner-point count.

    Element ``k-1`` is ``sum_j [k j] kappa_j(I)`` for ``k = 1..order``.
    """
    st = st or _DEFAULT_TABLE
    if order > len(kappa_I):
        raise ValueError("not enough cumulants for the requested order")
    return [sum(st(k, j) * kappa_I[j - 1] for j in range(1, k + 1))
            for k in range(1, order + 1)]
