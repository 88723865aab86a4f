import math

import numpy as np
import pytest

from poissonpoly import seeding
from poissonpoly.measure import ConvexBody, MeasureModel
from poissonpoly.oracle import brute_force_small, oracle_1d
from poissonpoly.process import simulate_block

TS = (0.5, 1.0, 2.0, 5.0, 10.0)


def test_closed_forms_at_t1():
    o = oracle_1d(1.0)
    assert o.e_mu == pytest.approx(3 * math.exp(-1) - 1, abs=1e-15)
    assert o.e_N == pytest.approx(2 - 3 * math.exp(-1), abs=1e-15)
    assert o.e_I == pytest.approx(o.e_mu, abs=1e-15)


def test_large_t_limit():
    assert 0.979 <= oracle_1d(100.0).e_mu <= 0.981


@pytest.mark.parametrize("t", TS)
def test_first_moment_identities_exact(t):
    o = oracle_1d(t)
    assert abs(o.e_I - t * o.e_mu) <= 1e-12
    assert abs(o.e_N + o.e_I - t) <= 1e-12
    assert abs(o.e_N - t * (1 - o.e_mu)) <= 1e-12


@pytest.mark.parametrize("t", TS)
def test_second_moment_identities(t):
    o = oracle_1d(t)
    assert o.var_I == pytest.approx(t * t * o.var_mu + t * o.e_mu, abs=1e-8)
    assert o.e_N2 == pytest.approx(t * t * o.e_delta_sq - 2 * t * t * o.e_aux, abs=1e-8)


def test_oracle_rejects_nonpositive_t():
    for t in (0.0, -2.0):
        with pytest.raises(ValueError):
            oracle_1d(t)


def test_range_moments_by_direct_integration():
    # E mu^2 from the joint density of (min, max) written out on the triangle
    from scipy import integrate
    t = 2.0
    f = lambda b, a: (b - a) ** 2 * t * t * math.exp(-t * (1 - (b - a)))  # noqa: E731
    val, _ = integrate.dblquad(f, 0.0, 1.0, lambda a: a, 1.0, epsabs=1e-12, epsrel=1e-12)
    assert oracle_1d(t).e_mu_sq == pytest.approx(val, abs=1e-10)


def test_oracle_matches_simulation(interval):
    t = 2.0
    o = oracle_1d(t)
    out = simulate_block(interval, 200_000, seeding.stream(1, "oracle"), t=t, aux_points=4)
    for key, expect in (("mu", o.e_mu), ("N", o.e_N), ("aux", o.e_aux)):
        x = out[key].astype(float)
        assert abs(x.mean() - expect) <= 4 * x.std(ddof=1) / math.sqrt(len(x))
    mu2 = out["mu"] ** 2
    assert abs(mu2.mean() - o.e_mu_sq) <= 4 * mu2.std(ddof=1) / math.sqrt(len(mu2))


def test_brute_force_square_triangle():
    m = MeasureModel.uniform(ConvexBody.square())
    assert brute_force_small(m, 3, "mu") == pytest.approx(11 / 144, abs=1e-4)


def test_brute_force_disk_triangle():
    m = MeasureModel.uniform(ConvexBody.disk())
    assert brute_force_small(m, 3, "mu") == pytest.approx(35 / (48 * math.pi ** 2), abs=1e-4)


def test_brute_force_trivial_cases(square, interval):
    assert brute_force_small(square, 2, "mu") == 0.0
    assert brute_force_small(square, 3, "N") == 3.0
    assert brute_force_small(interval, 2, "mu") == pytest.approx(1 / 3, abs=1e-12)
    assert brute_force_small(interval, 3, "mu") == pytest.approx(0.5, abs=1e-12)
    assert brute_force_small(interval, 4, "N") == 2.0


def test_brute_force_consistent_with_oracle_and_monte_carlo(square):
    rng = np.random.default_rng(8)
    A = rng.random((200_000, 3, 2))
    u, v = A[:, 1] - A[:, 0], A[:, 2] - A[:, 0]
    area = 0.5 * np.abs(u[:, 0] * v[:, 1] - u[:, 1] * v[:, 0])
    se = area.std(ddof=1) / math.sqrt(len(area))
    assert abs(area.mean() - brute_force_small(square, 3, "mu")) <= 4 * se


def test_brute_force_unsupported(square, ball):
    with pytest.raises(ValueError):
        brute_force_small(square, 4, "mu")
    with pytest.raises(ValueError):
        brute_force_small(ball, 3, "mu")
    with pytest.raises(ValueError):
        brute_force_small(MeasureModel.gaussian(2), 3, "mu")
    with pytest.raises(ValueError):
        brute_force_small(square, 3, "volume")
    with pytest.raises(ValueError):
        brute_force_small(MeasureModel.uniform(ConvexBody.ellipse(2.0)), 3, "mu")
