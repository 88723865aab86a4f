"""Identity reports, mergeable accumulators and the block runner."""
from __future__ import annotations

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import seeding

DEFAULT_THRESHOLD = 4.0
FAMILY_THRESHOLD = 4.5


def default_workers() -> int:
    return max(1, int(os.environ.get("POISSONPOLY_WORKERS", "1")))


def z_score(diff: float, se: float) -> float:
    if se > 0:
        return diff / se
    return 0.0 if diff == 0 else math.copysign(math.inf, diff)


@dataclass
class IdentityReport:
    """Paired (or two-batch) comparison of the two sides of an identity."""

    identity_id: str
    lhs: float
    rhs: float
    diff: float
    se: float
    n_reps: int
    params: dict = field(default_factory=dict)
    seed: int = 0
    threshold: float = DEFAULT_THRESHOLD

    @property
    def z(self) -> float:
        return z_score(self.diff, self.se)

    @property
    def passed(self) -> bool:
        return abs(self.z) <= self.threshold

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"

    def to_dict(self) -> dict:
        def num(v):
            v = float(v)
            return v if math.isfinite(v) else None

        return {"identity_id": self.identity_id, "params": self.params,
                "lhs": num(self.lhs), "rhs": num(self.rhs), "diff": num(self.diff),
                "se": num(self.se), "z": num(self.z), "n_reps": int(self.n_reps),
                "verdict": self.verdict, "seed": int(self.seed)}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def line(self) -> str:
        extra = " ".join(f"{k}={v}" for k, v in self.params.items()
                         if k in ("k", "z", "x", "t", "n"))
        return (f"{self.verdict.upper():4s} {self.identity_id:<28s} {extra:<22s} "
                f"lhs={self.lhs:.6g} rhs={self.rhs:.6g} z={self.z:+.2f}")


@dataclass
class Accumulator:
    """Sufficient statistics of a paired difference over a block of replications."""

    n: int
    sum_lhs: float
    sum_rhs: float
    sum_diff: float
    sum_diff_sq: float
    config: tuple = ()

    @classmethod
    def from_arrays(cls, lhs, rhs, config: tuple = ()) -> "Accumulator":
        lhs = np.asarray(lhs, dtype=float)
        rhs = np.asarray(rhs, dtype=float)
        d = lhs - rhs
        return cls(len(d), math.fsum(lhs), math.fsum(rhs), math.fsum(d),
                   math.fsum(d * d), config)


def merge_reports(partials, identity_id: str = "", params: dict | None = None,
                  seed: int = 0, threshold: float = DEFAULT_THRESHOLD) -> IdentityReport:
    """Combine per-worker accumulators (in list order) into one report.

    Sums are merged with ``math.fsum``; the standard error is the CLT one of
    the paired difference.
    """
    partials = list(partials)
    if not partials:
        raise ValueError("no partial accumulators to merge")
    cfg = partials[0].config
    if any(p.config != cfg for p in partials):
        raise ValueError("cannot merge accumulators from differently configured runs")
    n = sum(p.n for p in partials)
    s_l = math.fsum(p.sum_lhs for p in partials)
    s_r = math.fsum(p.sum_rhs for p in partials)
    s_d = math.fsum(p.sum_diff for p in partials)
    s_d2 = math.fsum(p.sum_diff_sq for p in partials)
    mean_d = s_d / n
    var = max(0.0, (s_d2 - s_d * mean_d) / (n - 1)) if n > 1 else 0.0
    return IdentityReport(identity_id, s_l / n, s_r / n, mean_d, math.sqrt(var / n),
                          n, dict(params or {}), seed, threshold)


def two_sample_report(identity_id: str, lhs_values, rhs_values, params: dict,
                      seed: int, threshold: float = DEFAULT_THRESHOLD,
                      se_floor: float = 0.0) -> IdentityReport:
    """Unpaired comparison of two independent batches of per-replication values.

    ``se_floor`` bounds the standard error from below; for statistics in
    [0, 1] a floor of 1/R keeps a rare event that was never observed (zero
    sample variance on both sides) from producing an infinite z-score.
    """
    a = np.asarray(lhs_values, dtype=float)
    b = np.asarray(rhs_values, dtype=float)
    ma, mb = math.fsum(a) / len(a), math.fsum(b) / len(b)
    se = math.sqrt(np.var(a, ddof=1) / len(a) + np.var(b, ddof=1) / len(b))
    se = max(se, se_floor)
    return IdentityReport(identity_id, ma, mb, ma - mb, se, len(a) + len(b),
                          dict(params), seed, threshold)


def _run_block(args):
    fn, seed, label, block, count, kwargs = args
    return fn(seeding.stream(seed, label, block), count, **kwargs)


def run_blocks(fn, n_reps: int, seed: int, label: str, workers: int = 1,
               block_size: int = seeding.BLOCK_SIZE, **kwargs) -> list:
    """Evaluate ``fn(rng, count, **kwargs)`` over fixed-size replication blocks.

    The block partition and each block's stream depend only on
    ``(seed, label, n_reps, block_size)``, never on ``workers``, and results
    come back in block order.
    """
    tasks = [(fn, seed, label, b, c, kwargs) for b, c in seeding.blocks(n_reps, block_size)]
    if workers <= 1 or len(tasks) <= 1:
        return [_run_block(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(_run_block, tasks))


def concat_blocks(results: list) -> dict:
    keys = results[0].keys()
    return {k: np.concatenate([r[k] for r in results]) for k in keys}
