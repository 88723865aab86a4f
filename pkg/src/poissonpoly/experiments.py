"""Power-law scaling of hull functionals in the intensity t.

Each functional is estimated on a geometric grid of intensities and a
weighted least-squares line is fitted to (log t, log estimate). All
functionals of one run share the same replications at each t.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .identities import simulate
from .measure import SMOOTH_SHAPES, MeasureModel, UnsupportedShapeError

FUNCTIONALS = ("EN", "VarN", "VarVol", "EVol_deficit", "EI_deficit", "VarI", "ED")
CSV_COLUMNS = ("functional", "body", "d", "t", "estimate", "se", "n_reps")
DEFAULT_GRID = (100.0, 200.0, 400.0, 800.0, 1600.0, 3200.0)
SCALING_AUX_POINTS = 256
DEFAULT_TOLERANCE = {"EN": 0.05, "VarN": 0.08, "VarVol": 0.12, "EVol_deficit": 0.05,
                     "EI_deficit": 0.05, "VarI": 0.12, "ED": 0.12}


def target_exponent(functional: str, d: int) -> float:
    """Predicted growth exponent of ``functional`` in t for a smooth body in R^d."""
    up = (d - 1) / (d + 1)
    down = -(d + 3) / (d + 1)
    table = {"EN": up, "VarN": up, "EI_deficit": up, "VarI": up,
             "VarVol": down, "ED": down, "EVol_deficit": -2.0 / (d + 1)}
    if functional not in table:
        raise ValueError(f"unknown functional {functional!r}; choose from {FUNCTIONALS}")
    return table[functional]


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    slope_se: float
    intercept: float
    t_ref: float
    used: tuple


def fit_power_law(t, est, se) -> SlopeFit:
    """Weighted fit of log(est) = a + b (log t - log t_ref).

    Weights are (est / se)^2, the inverse delta-method variance of log(est).
    ``t_ref`` is the geometric mean of the used grid, so ``a`` is the
    log-level at the grid centre. Non-positive estimates are skipped. A zero
    standard error (an exactly known value) takes the smallest positive one;
    if all are zero the points are weighted equally and ``slope_se`` is 0.
    """
    t, est, se = (np.asarray(v, dtype=float) for v in (t, est, se))
    used = (est > 0) & np.isfinite(est) & (se >= 0)
    if used.sum() < 2:
        return SlopeFit(math.nan, math.nan, math.nan, math.nan, tuple(used.tolist()))
    x = np.log(t[used])
    y = np.log(est[used])
    s = se[used]
    exact = not np.any(s > 0)
    if exact:
        w = np.ones_like(y)
    else:
        s = np.where(s > 0, s, s[s > 0].min())
        w = (est[used] / s) ** 2
    x_ref = float(np.mean(x))
    xc = x - x_ref
    W = w.sum()
    xm = (w * xc).sum() / W
    ym = (w * y).sum() / W
    sxx = (w * (xc - xm) ** 2).sum()
    b = (w * (xc - xm) * (y - ym)).sum() / sxx
    a = ym - b * xm
    b_se = 0.0 if exact else math.sqrt(1.0 / sxx)
    return SlopeFit(float(b), float(b_se), float(a), float(math.exp(x_ref)),
                    tuple(used.tolist()))


@dataclass
class ScalingRun:
    functional: str
    body: str
    d: int
    t_grid: tuple
    estimates: tuple
    se: tuple
    n_reps: int
    fitted_slope: float
    slope_se: float
    fitted_intercept: float
    t_ref: float
    target: float
    raw_slope: float | None = None
    seed: int = 0
    params: dict = field(default_factory=dict)

    def verdict(self, tolerance: float | None = None) -> str:
        tol = DEFAULT_TOLERANCE[self.functional] if tolerance is None else tolerance
        ok = math.isfinite(self.fitted_slope) and abs(self.fitted_slope - self.target) <= tol
        return "pass" if ok else "fail"

    def refit(self, keep) -> "ScalingRun":
        """The same run fitted on the grid points selected by ``keep``."""
        keep = np.asarray(keep)
        sel = lambda v: tuple(np.asarray(v)[keep].tolist())  # noqa: E731
        fit = fit_power_law(sel(self.t_grid), sel(self.estimates), sel(self.se))
        return ScalingRun(self.functional, self.body, self.d, sel(self.t_grid),
                          sel(self.estimates), sel(self.se), self.n_reps, fit.slope,
                          fit.slope_se, fit.intercept, fit.t_ref, self.target, None,
                          self.seed, dict(self.params))

    def csv_rows(self) -> list:
        return [{"functional": self.functional, "body": self.body, "d": self.d, "t": t,
                 "estimate": e, "se": s, "n_reps": self.n_reps}
                for t, e, s in zip(self.t_grid, self.estimates, self.se)]

    def summary(self, tolerance: float | None = None) -> dict:
        out = {"functional": self.functional, "body": self.body, "d": self.d,
               "fitted_slope": self.fitted_slope, "slope_se": self.slope_se,
               "fitted_intercept": self.fitted_intercept, "t_ref": self.t_ref,
               "target": self.target, "verdict": self.verdict(tolerance),
               "n_reps": self.n_reps, "seed": self.seed}
        if self.raw_slope is not None:
            out["raw_slope"] = self.raw_slope
        return out


def _mean_se(x) -> tuple:
    x = np.asarray(x, dtype=float)
    return float(np.mean(x)), float(np.std(x, ddof=1) / math.sqrt(len(x)))


def _influence_se(psi) -> float:
    return float(np.std(psi, ddof=1) / math.sqrt(len(psi)))


def _var_influence(x):
    x = np.asarray(x, dtype=float)
    c = x - x.mean()
    v = float(np.var(x, ddof=1))
    return v, c * c - v


def estimate_functional(functional: str, data: dict, t: float, volume: float = 1.0) -> tuple:
    """(estimate, standard error) of one functional from one batch.

    Variances use the influence-function standard error (x - mean)^2 - s^2.
    """
    if functional == "EN":
        return _mean_se(data["N"])
    if functional == "EI_deficit":
        return _mean_se(t - data["I"].astype(float))
    if functional == "EVol_deficit":
        return _mean_se(data["delta"])
    if functional == "ED":
        if "aux" not in data:
            raise ValueError("ED needs auxiliary points (J > 0)")
        return _mean_se(data["aux"] * volume)
    if functional == "VarN":
        v, psi = _var_influence(data["N"])
        return v, _influence_se(psi)
    if functional == "VarVol":
        v, psi = _var_influence(data["mu"] * volume)
        return v, _influence_se(psi)
    if functional == "VarI":
        v, psi = _var_influence(data["I"])
        mu = data["mu"]
        psi = psi - t * (mu - mu.mean())
        return v - t * float(np.mean(mu)), _influence_se(psi)
    raise ValueError(f"unknown functional {functional!r}; choose from {FUNCTIONALS}")


def _check_inputs(m: MeasureModel, functionals, t_grid, R_per_t):
    for f in functionals:
        if f not in FUNCTIONALS:
            raise ValueError(f"unknown functional {f!r}; choose from {FUNCTIONALS}")
    t = np.asarray(t_grid, dtype=float)
    if len(t) < 5:
        raise ValueError("t_grid needs at least 5 intensities")
    if np.any(t <= 0) or np.any(np.diff(t) <= 0):
        raise ValueError("t_grid must be positive and strictly increasing")
    if R_per_t < 30:
        raise ValueError("R_per_t must be at least 30")
    if m.kind != "uniform":
        raise ValueError("scaling runs are defined for uniform measures on a convex body")
    if m.dim >= 2 and m.body.shape not in SMOOTH_SHAPES:
        raise UnsupportedShapeError(
            f"body {m.body.shape!r} is not smooth; the predicted exponents and the "
            "affine surface area comparison need a smooth body")


def run_scaling_many(m: MeasureModel, functionals, t_grid=DEFAULT_GRID, R_per_t: int = 10_000,
                     J: int = SCALING_AUX_POINTS, *, seed: int = 0,
                     workers: int = 1) -> dict:
    """Scaling runs for several functionals sharing one simulation per t."""
    functionals = tuple(functionals)
    _check_inputs(m, functionals, t_grid, R_per_t)
    need_aux = "ED" in functionals
    if need_aux and J <= 0:
        raise ValueError("ED needs J > 0 auxiliary points")
    t_grid = tuple(float(t) for t in t_grid)
    vol = m.body.volume
    est = {f: [] for f in functionals}
    raw = []
    for t in t_grid:
        blocks = simulate(m, R_per_t, seed, t=t, aux_points=J if need_aux else 0,
                          workers=workers)
        data = {k: np.concatenate([b[k] for b in blocks]) for k in blocks[0]}
        for f in functionals:
            est[f].append(estimate_functional(f, data, t, vol))
        if "VarI" in functionals:
            v, psi = _var_influence(data["I"])
            raw.append((v, _influence_se(psi)))
    runs = {}
    params = {"R_per_t": R_per_t, "J": J if need_aux else 0, **m.describe()}
    for f in functionals:
        e = tuple(v for v, _ in est[f])
        s = tuple(v for _, v in est[f])
        fit = fit_power_law(t_grid, e, s)
        raw_slope = None
        if f == "VarI":
            raw_slope = fit_power_law(t_grid, [v for v, _ in raw], [v for _, v in raw]).slope
        runs[f] = ScalingRun(f, m.body.shape, m.dim, t_grid, e, s, R_per_t, fit.slope,
                             fit.slope_se, fit.intercept, fit.t_ref,
                             target_exponent(f, m.dim), raw_slope, seed, params)
    return runs


def run_scaling(m: MeasureModel, functional: str, t_grid=DEFAULT_GRID, R_per_t: int = 10_000,
                J: int = SCALING_AUX_POINTS, *, seed: int = 0, workers: int = 1) -> ScalingRun:
    return run_scaling_many(m, (functional,), t_grid, R_per_t, J, seed=seed,
                            workers=workers)[functional]


def affine_prediction_ratio(run_a: ScalingRun, run_b: ScalingRun) -> float:
    """exp(intercept_a - intercept_b): the level ratio of two bodies at the grid centre.

    For uniform measures on smooth bodies this estimates Omega(A) / Omega(B).
    """
    if run_a.functional != run_b.functional:
        raise ValueError("runs measure different functionals")
    if tuple(run_a.t_grid) != tuple(run_b.t_grid):
        raise ValueError("runs use different t grids")
    for r in (run_a, run_b):
        if r.d >= 2 and r.body not in SMOOTH_SHAPES:
            raise UnsupportedShapeError(f"body {r.body!r} is not smooth")
    return math.exp(run_a.fitted_intercept - run_b.fitted_intercept)


def write_csv(runs, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        w.writeheader()
        for r in runs:
            w.writerows(r.csv_rows())


def write_summary(runs, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump([r.summary() for r in runs], fh, indent=2)
        fh.write("\n")
