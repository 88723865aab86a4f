import math

import numpy as np
import pytest
from scipy import stats

from poissonpoly.geometry import convex_hull
from poissonpoly.measure import (ConvexBody, MeasureModel, UnsupportedShapeError,
                                 affine_surface_area, extension_mass, missed_mass,
                                 mu_mass, sample_point)

GAUSS_SQUARE = (stats.norm.cdf(1) - stats.norm.cdf(-1)) ** 2


@pytest.mark.parametrize("body", [ConvexBody.disk(), ConvexBody.ellipse(0.5),
                                  ConvexBody.ellipse(3.0), ConvexBody.square(),
                                  ConvexBody.ball3d(), ConvexBody.interval(),
                                  ConvexBody.convex_polygon([(0, 0), (3, 0), (3, 1), (1, 2)])])
def test_bodies_have_unit_volume(body):
    assert body.volume == pytest.approx(1.0, abs=1e-12)


def test_polygon_must_be_convex_ccw():
    with pytest.raises(ValueError):
        ConvexBody.convex_polygon([(0, 0), (0, 1), (1, 1), (1, 0)])
    with pytest.raises(ValueError):
        ConvexBody.convex_polygon([(0, 0), (2, 0), (1, 0.2), (2, 2), (0, 2)])


def test_disk_sample_mean_is_centred(disk, rng):
    x = disk.sample(1_000_000, rng)
    se = x.std(axis=0, ddof=1) / 1000.0
    assert np.all(np.abs(x.mean(axis=0)) <= 4 * se)
    assert np.all(disk.body.contains(x))


def test_square_sample_is_uniform_ks(square, rng):
    x = square.sample(20_000, rng)
    for j in range(2):
        assert stats.kstest(x[:, j], "uniform").pvalue > 0.01


def test_ball_and_ellipse_samples_stay_inside(rng):
    for body in (ConvexBody.ball3d(), ConvexBody.ellipse(2.5),
                 ConvexBody.convex_polygon([(0, 0), (3, 0), (3, 1), (1, 2)])):
        x = body.sample(20_000, rng)
        assert x.shape == (20_000, body.dim)
        assert np.all(body.contains(x))


def test_disk_radius_distribution(disk, rng):
    r = np.linalg.norm(disk.sample(20_000, rng), axis=1) / disk.body.params[0]
    assert stats.kstest(r ** 2, "uniform").pvalue > 0.01


def test_gaussian_covariance(rng):
    m = MeasureModel.gaussian(2)
    x = m.sample(200_000, rng)
    cov = np.cov(x.T)
    se = np.sqrt(2.0 / len(x))  # sd of a sample variance of N(0, 1)
    assert np.all(np.abs(cov - np.eye(2)) <= 4 * se)
    assert sample_point(m, rng).shape == (2,)


def test_mu_mass_uniform_basics(square):
    empty = convex_hull(np.zeros((0, 2)), 2)
    assert mu_mass(square, empty) == 0.0
    assert missed_mass(square, empty) == 1.0
    tri = convex_hull([(0, 0), (1, 0), (0, 1)])
    assert mu_mass(square, tri) == pytest.approx(0.5)
    assert mu_mass(square, tri) + missed_mass(square, tri) == 1.0


def test_mu_mass_uniform_outside_body_raises(disk):
    with pytest.raises(ValueError, match="precondition"):
        mu_mass(disk, convex_hull([(0, 0), (5, 0), (0, 5)]))


def test_gaussian_square_mass():
    g = MeasureModel.gaussian(2)
    p = convex_hull([(-1, -1), (1, -1), (1, 1), (-1, 1)])
    assert mu_mass(g, p) == pytest.approx(GAUSS_SQUARE, rel=1e-8)


def test_gaussian_1d_and_3d_box_masses():
    g1 = MeasureModel.gaussian(1)
    assert mu_mass(g1, convex_hull([(-1.0,), (2.0,)])) == pytest.approx(
        stats.norm.cdf(2) - stats.norm.cdf(-1), rel=1e-12)
    g3 = MeasureModel.gaussian(3)
    cube = convex_hull([(x, y, z) for x in (-1, 1) for y in (-0.5, 2) for z in (0, 1)])
    expect = ((stats.norm.cdf(1) - stats.norm.cdf(-1))
              * (stats.norm.cdf(2) - stats.norm.cdf(-0.5))
              * (stats.norm.cdf(1) - stats.norm.cdf(0)))
    assert mu_mass(g3, cube) == pytest.approx(expect, rel=1e-7)


def test_gaussian_polygon_mass_monte_carlo(rng):
    g = MeasureModel.gaussian(2)
    p = convex_hull(rng.standard_normal((8, 2)))
    x = rng.standard_normal((1_000_000, 2))
    V = p.vertices
    inside = np.ones(len(x), bool)
    for i in range(len(V)):
        a, b = V[i], V[(i + 1) % len(V)]
        inside &= (b[0] - a[0]) * (x[:, 1] - a[1]) - (b[1] - a[1]) * (x[:, 0] - a[0]) > 0
    est = inside.mean()
    se = math.sqrt(est * (1 - est) / len(x))
    assert abs(est - mu_mass(g, p)) <= 4 * se


def test_mu_mass_monotone_on_nested_hulls(disk, rng):
    g = MeasureModel.gaussian(2)
    P = disk.sample(60, rng)
    prev_u = prev_g = 0.0
    for n in (3, 6, 12, 30, 60):
        p = convex_hull(P[:n])
        u, gm = mu_mass(disk, p), mu_mass(g, p)
        assert prev_u <= u <= 1.0 and prev_g <= gm <= 1.0
        prev_u, prev_g = u, gm


def test_extension_mass_gaussian_matches_difference(rng):
    g = MeasureModel.gaussian(2)
    P = rng.standard_normal((10, 2))
    p = convex_hull(P)
    xs = rng.standard_normal((5, 2)) * 2
    ext = extension_mass(g, p, xs)
    for x, e in zip(xs, ext):
        assert e == pytest.approx(mu_mass(g, convex_hull(np.vstack([P, x]))) - mu_mass(g, p),
                                  abs=1e-9)


def test_affine_surface_area_values():
    assert affine_surface_area(ConvexBody.disk()) == pytest.approx(2 * math.pi ** (2 / 3))
    r = (3 / (4 * math.pi)) ** (1 / 3)
    assert affine_surface_area(ConvexBody.ball3d()) == pytest.approx(4 * math.pi * r ** 1.5)
    disk = affine_surface_area(ConvexBody.disk())
    for a in (0.5, 1.0, 2.0):
        assert affine_surface_area(ConvexBody.ellipse(a)) == pytest.approx(disk, rel=1e-9)
    assert abs(affine_surface_area(ConvexBody.ellipse(1 / math.sqrt(math.pi))) - disk) < 1e-12


def test_affine_surface_area_of_polygon_is_flagged():
    with pytest.raises(UnsupportedShapeError):
        affine_surface_area(ConvexBody.square())
    assert affine_surface_area(ConvexBody.square(), strict=False) == 0.0
    assert ConvexBody.square().affine_surface_area is None
