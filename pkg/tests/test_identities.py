import json
import math

import pytest

from poissonpoly import identities as ids
from poissonpoly.oracle import oracle_1d


@pytest.fixture(autouse=True)
def _fresh_cache():
    ids.clear_cache()
    yield
    ids.clear_cache()


def test_factorial_moment_1d_matches_oracle(interval):
    r = ids.verify_factorial_moment(interval, 1.0, 1, 200_000, seed=3)
    assert r.passed
    # both sides estimate 3/e - 1
    for side in (r.lhs, r.rhs):
        assert abs(side - oracle_1d(1.0).e_mu) < 0.005


def test_factorial_moment_rejects_order(interval):
    with pytest.raises(ValueError):
        ids.verify_factorial_moment(interval, 1.0, 5, 100)


def test_empty_realisations_contribute_zero(interval):
    # at tiny t almost every replication is empty; the paired difference stays finite
    r = ids.verify_factorial_moment(interval, 1e-3, 1, 2000, seed=1)
    assert math.isfinite(r.z) and r.passed


def test_variance_identity_1d_against_oracle(interval):
    r = ids.verify_variance_I(interval, 1.0, 200_000, seed=5, B=50)
    o = oracle_1d(1.0)
    assert r.passed
    assert abs(r.lhs - o.var_I) < 0.01 and abs(r.rhs - o.var_I) < 0.01


def test_variance_identity_small_t(disk):
    r = ids.verify_variance_I(disk, 0.1, 5000, seed=2, B=50)
    assert math.isfinite(r.z) and r.passed


def test_gf_zero_is_exact_and_bounds_enforced(disk):
    reports = ids.verify_gf_identity(disk, 20.0, [0.0, -1.0, 0.1], 3000, seed=4)
    assert reports[0].diff == 0.0 and reports[0].se == 0.0 and reports[0].passed
    assert all(r.passed for r in reports)
    with pytest.raises(ValueError, match="exceeds"):
        ids.verify_gf_identity(disk, 50.0, [0.2], 100)
    with pytest.raises(ValueError):
        ids.verify_gf_identity(disk, 50.0, [-2.5], 100)


def test_cumulant_k1_equals_factorial_k1(disk):
    c = ids.verify_cumulants(disk, 15.0, 2, 4000, seed=6, B=30)
    f = ids.verify_factorial_moment(disk, 15.0, 1, 4000, seed=6)
    assert c[0].lhs == pytest.approx(f.lhs, rel=1e-12)
    assert c[0].rhs == pytest.approx(f.rhs, rel=1e-12)


def test_cumulant_k2_tracks_variance_identity(disk):
    c = ids.verify_cumulants(disk, 15.0, 2, 20_000, seed=8, B=100)[1]
    v = ids.verify_variance_I(disk, 15.0, 20_000, seed=8, B=100)
    assert abs(c.z - v.z) <= 1.0


def test_cumulant_order_bound(disk):
    with pytest.raises(ValueError):
        ids.verify_cumulants(disk, 10.0, 5, 100)


def test_vertex_expectation_1d(interval):
    r = ids.verify_vertex_expectation(interval, 1.0, 200_000, seed=9)
    assert r.passed and abs(r.lhs - oracle_1d(1.0).e_N) < 0.005


def test_point_balance(disk):
    r = ids.verify_point_balance(disk, 12.0, 20_000, seed=1)
    assert r.passed and r.rhs == 12.0


def test_vertex_second_moment_1d_against_oracle(interval):
    second, var = ids.verify_vertex_second_moment(interval, 2.0, 200_000, J=8, seed=2, B=50)
    o = oracle_1d(2.0)
    assert second.passed and var.passed
    assert abs(second.lhs - o.e_N2) < 0.01
    assert abs(second.rhs - o.e_N2) < 0.02
    assert abs(var.lhs - o.var_N) < 0.01


def test_vertex_second_moment_needs_aux(disk):
    with pytest.raises(ValueError):
        ids.verify_vertex_second_moment(disk, 10.0, 100, J=0)


def test_vertex_factorial_moments_disk(disk):
    for k in (1, 2, 3):
        r = ids.verify_vertex_factorial_moment(disk, 12.0, k, 20_000, J=16, seed=3)
        assert r.passed, r.line()
    with pytest.raises(ValueError):
        ids.verify_vertex_factorial_moment(disk, 12.0, 4, 100)


def test_vertex_factorial_k3_one_dimensional(interval):
    # N <= 2 in d = 1, so N_(3) = 0 and the right side must average to zero
    r = ids.verify_vertex_factorial_moment(interval, 3.0, 3, 100_000, J=8, seed=4)
    assert r.lhs == 0.0 and r.passed


def test_vertex_gf_boundary_points(disk):
    t = 6.0
    reports = ids.verify_vertex_gf(disk, t, [0.0, 1.0], 20_000, seed=7)
    at0, at1 = reports[:3], reports[3:]
    assert all(r.lhs == 1.0 and r.rhs == 1.0 for r in at1)
    main = at0[0]
    se_side = math.sqrt(math.exp(-t) * (1 - math.exp(-t)) / 20_000)
    assert abs(main.lhs - math.exp(-t)) <= 4 * se_side
    assert main.rhs == pytest.approx(math.exp(-t))
    assert all(r.passed for r in reports)
    with pytest.raises(ValueError):
        ids.verify_vertex_gf(disk, t, [1.5], 100)


def test_vertex_gf_interior(disk):
    reports = ids.verify_vertex_gf(disk, 10.0, [0.5], 20_000, seed=12)
    assert [r.identity_id for r in reports] == ["vertex_gf", "vertex_gf_coupling_lhs",
                                                "vertex_gf_coupling_rhs"]
    assert all(r.passed for r in reports)


def test_efron_one_dimensional(interval):
    r = ids.verify_efron_buchta(interval, 2, 1, 100_000, seed=1)
    assert r.rhs == pytest.approx(1 / 3, abs=1e-15)
    assert r.passed
    with pytest.raises(ValueError):
        ids.verify_efron_buchta(interval, 1, 1, 100)
    with pytest.raises(ValueError):
        ids.verify_efron_buchta(interval, 3, 0, 100)


def test_seed_determinism(disk):
    a = ids.verify_factorial_moment(disk, 10.0, 2, 3000, seed=11).to_json()
    ids.clear_cache()
    b = ids.verify_factorial_moment(disk, 10.0, 2, 3000, seed=11).to_json()
    ids.clear_cache()
    c = ids.verify_factorial_moment(disk, 10.0, 2, 3000, seed=12).to_json()
    assert a == b and a != c


def test_worker_count_does_not_change_reports(disk):
    one = [r.to_json() for r in ids.verify_vertex_gf(disk, 8.0, [0.4], 2500, seed=5)]
    ids.clear_cache()
    two = [r.to_json() for r in ids.verify_vertex_gf(disk, 8.0, [0.4], 2500, seed=5,
                                                      workers=2)]
    assert one == two


def test_report_schema(disk):
    d = ids.verify_point_balance(disk, 5.0, 100, seed=1).to_dict()
    assert list(d) == ["identity_id", "params", "lhs", "rhs", "diff", "se", "z", "n_reps",
                       "verdict", "seed"]
    json.dumps(d)


@pytest.mark.parametrize("verifier", ["factorial", "vertex", "gf"])
def test_z_scores_look_standard_normal(verifier, interval, disk):
    z = []
    for s in range(50):
        if verifier == "factorial":
            r = ids.verify_factorial_moment(interval, 2.0, 2, 2000, seed=1000 + s)
        elif verifier == "vertex":
            r = ids.verify_vertex_expectation(disk, 8.0, 400, seed=2000 + s)
        else:
            r = ids.verify_gf_identity(disk, 8.0, [-0.3], 400, seed=3000 + s)[0]
        z.append(r.z)
    mean, sd = ids.z_spread(z)
    assert abs(mean) <= 0.6 and 0.6 <= sd <= 1.6


def test_gf_at_minus_one_has_power_when_empty_interiors_are_common(disk):
    r = ids.verify_gf_identity(disk, 4.0, [-1.0], 20_000, seed=13)[0]
    assert r.lhs > 0.2 and r.se > 1.0 / 20_000
    assert r.passed
