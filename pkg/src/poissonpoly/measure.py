"""Container bodies, probability measures and the mass they assign to hulls."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, special

from .geometry import Polytope, convex_hull, extension_volume

SHAPES = ("interval", "disk", "ellipse", "square", "polygon", "ball3d")
SMOOTH_SHAPES = ("disk", "ellipse", "ball3d")
_CONTAIN_TOL = 1e-12
GAUSS_RTOL = 1e-8


class UnsupportedShapeError(ValueError):
    """Raised when a shape has no closed-form affine surface area."""


@dataclass(frozen=True)
class ConvexBody:
    """A convex container K rescaled isotropically to unit volume.

    Use the ``disk``/``ellipse``/... constructors rather than the raw
    initialiser. ``params`` holds the already-normalised geometry: radius for
    disk and ball, semi-axes for the ellipse, side for the square and the
    vertex array for polygons. The interval is [0, 1], the square [0, 1]^2;
    the round bodies are centred at the origin.
    """

    shape: str
    dim: int
    params: tuple = ()
    polygon: np.ndarray | None = field(default=None, compare=False)

    @classmethod
    def interval(cls) -> "ConvexBody":
        return cls("interval", 1, (1.0,))

    @classmethod
    def disk(cls) -> "ConvexBody":
        return cls("disk", 2, (1.0 / math.sqrt(math.pi),))

    @classmethod
    def ellipse(cls, a: float, b: float | None = None) -> "ConvexBody":
        """Ellipse with semi-axes proportional to (a, b).

        With ``b`` omitted, ``b = 1 / (pi a)`` so that (a, b) is already unit
        area; otherwise both are rescaled by the same factor.
        """
        if b is None:
            b = 1.0 / (math.pi * a)
        if a <= 0 or b <= 0:
            raise ValueError("ellipse semi-axes must be positive")
        s = 1.0 / math.sqrt(math.pi * a * b)
        return cls("ellipse", 2, (a * s, b * s))

    @classmethod
    def square(cls) -> "ConvexBody":
        return cls("square", 2, (1.0,))

    @classmethod
    def ball3d(cls) -> "ConvexBody":
        return cls("ball3d", 3, ((3.0 / (4.0 * math.pi)) ** (1.0 / 3.0),))

    @classmethod
    def convex_polygon(cls, vertices) -> "ConvexBody":
        v = np.asarray(vertices, dtype=float)
        hull = convex_hull(v, 2)
        if hull.n_vertices != len(v):
            raise ValueError("polygon vertices must be in strictly convex position")
        if not _is_ccw_cycle(list(hull.vertex_indices)):
            raise ValueError("polygon vertices must be listed counter-clockwise")
        area = hull.volume
        c = v.mean(axis=0)
        scaled = c + (v - c) / math.sqrt(area)
        return cls("polygon", 2, (), polygon=scaled)

    @classmethod
    def from_name(cls, name: str, **kw) -> "ConvexBody":
        if name == "interval":
            return cls.interval()
        if name == "disk":
            return cls.disk()
        if name == "ellipse":
            return cls.ellipse(kw.get("a", 2.0), kw.get("b"))
        if name == "square":
            return cls.square()
        if name == "ball3d":
            return cls.ball3d()
        raise ValueError(f"unknown body {name!r}; choose from {SHAPES}")

    @property
    def volume(self) -> float:
        if self.shape in ("interval", "square"):
            return self.params[0] ** self.dim
        if self.shape == "disk":
            return math.pi * self.params[0] ** 2
        if self.shape == "ellipse":
            return math.pi * self.params[0] * self.params[1]
        if self.shape == "ball3d":
            return 4.0 / 3.0 * math.pi * self.params[0] ** 3
        return convex_hull(self.polygon, 2).volume

    @property
    def affine_surface_area(self) -> float | None:
        if self.shape not in SMOOTH_SHAPES:
            return None
        return affine_surface_area(self)

    def contains(self, x) -> np.ndarray:
        """Closed-set membership with a 1e-12 relative slack, vectorised."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        tol = _CONTAIN_TOL
        if self.shape in ("interval", "square"):
            return np.all((x >= -tol) & (x <= 1.0 + tol), axis=1)
        if self.shape in ("disk", "ball3d"):
            r = self.params[0]
            return np.sum(x * x, axis=1) <= r * r * (1.0 + tol)
        if self.shape == "ellipse":
            a, b = self.params
            return (x[:, 0] / a) ** 2 + (x[:, 1] / b) ** 2 <= 1.0 + tol
        v = self.polygon
        e = np.roll(v, -1, axis=0) - v
        cross = e[None, :, 0] * (x[:, None, 1] - v[None, :, 1]) \
            - e[None, :, 1] * (x[:, None, 0] - v[None, :, 0])
        return np.all(cross >= -tol, axis=1)

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        if self.shape == "interval":
            return rng.random((n, 1))
        if self.shape == "square":
            return rng.random((n, 2))
        if self.shape in ("disk", "ellipse"):
            u, v = rng.random(n), rng.random(n)
            rad = np.sqrt(u)
            xy = np.stack([rad * np.cos(2 * np.pi * v), rad * np.sin(2 * np.pi * v)], axis=1)
            scale = (self.params[0], self.params[0]) if self.shape == "disk" else self.params
            return xy * np.asarray(scale)
        if self.shape == "ball3d":
            g = rng.standard_normal((n, 3))
            g /= np.linalg.norm(g, axis=1, keepdims=True)
            return g * (self.params[0] * np.cbrt(rng.random(n)))[:, None]
        lo, hi = self.polygon.min(axis=0), self.polygon.max(axis=0)
        out = np.empty((0, 2))
        while len(out) < n:
            cand = lo + (hi - lo) * rng.random((2 * (n - len(out)) + 8, 2))
            out = np.concatenate([out, cand[self.contains(cand)]])
        return out[:n]


def _is_ccw_cycle(indices) -> bool:
    k = len(indices)
    start = indices.index(min(indices))
    rot = list(indices[start:]) + list(indices[:start])
    return all(rot[i] < rot[i + 1] for i in range(k - 1)) or k < 3


@dataclass(frozen=True)
class MeasureModel:
    """Probability measure mu: uniform on a body, or standard Gaussian."""

    kind: str
    dim: int
    body: ConvexBody | None = None

    @classmethod
    def uniform(cls, body: ConvexBody) -> "MeasureModel":
        return cls("uniform", body.dim, body)

    @classmethod
    def gaussian(cls, dim: int) -> "MeasureModel":
        if dim not in (1, 2, 3):
            raise ValueError("gaussian dimension must be 1, 2 or 3")
        return cls("gaussian", dim)

    def describe(self) -> dict:
        if self.kind == "gaussian":
            return {"kind": "gaussian", "d": self.dim}
        desc = {"kind": "uniform", "d": self.dim, "body": self.body.shape}
        if self.body.shape == "ellipse":
            desc["axes"] = list(self.body.params)
        return desc

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """``n`` i.i.d. draws as an (n, d) array."""
        if self.kind == "gaussian":
            return rng.standard_normal((n, self.dim))
        return self.body.sample(n, rng)


def sample_point(m: MeasureModel, rng: np.random.Generator) -> np.ndarray:
    return m.sample(1, rng)[0]


# ------------------------------------------------------------ Gaussian mass

def _phi(x):
    return np.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)


def _gauss_mass_2d(verts) -> float:
    # Green's theorem on the CCW boundary with G = (Phi(x) - 1/2) phi(y):
    # the fan triangles' inner diagonals cancel, leaving one integral per edge.
    total = []
    k = len(verts)
    for i in range(k):
        (x0, y0), (x1, y1) = verts[i], verts[(i + 1) % k]
        dy = y1 - y0
        if dy == 0.0:
            continue

        def f(s, x0=x0, y0=y0, dx=x1 - x0, dy=dy):
            return (special.ndtr(x0 + s * dx) - 0.5) * _phi(y0 + s * dy)

        val, _ = integrate.quad(f, 0.0, 1.0, epsabs=1e-14, epsrel=1e-11, limit=200)
        total.append(val * dy)
    return math.fsum(total)


def _gauss_mass_3d(p: Polytope) -> float:
    # divergence theorem with F = ((Phi(x) - 1/2) phi(y) phi(z), 0, 0)
    total = []
    V = p.vertices
    for (ia, ib, ic), nrm in zip(p.facets, p.normals):
        if nrm[0] == 0.0:
            continue
        a, b, c = V[ia], V[ib], V[ic]
        u, w = b - a, c - a

        def f(t, s, a=a, u=u, w=w):
            x = a + s * u + t * w
            return (special.ndtr(x[0]) - 0.5) * _phi(x[1]) * _phi(x[2])

        val, _ = integrate.dblquad(f, 0.0, 1.0, 0.0, lambda s: 1.0 - s,
                                   epsabs=1e-13, epsrel=1e-10)
        total.append(val * nrm[0])
    return math.fsum(total)


def mu_mass(m: MeasureModel, p: Polytope) -> float:
    """Probability mass ``mu(p)``.

    Uniform models return the hull volume (bodies have unit volume) after
    checking ``p`` lies in K; Gaussian models integrate the density with
    adaptive quadrature.
    """
    if p.dim != m.dim:
        raise ValueError(f"polytope dimension {p.dim} != measure dimension {m.dim}")
    if not p.is_full_dimensional:
        return 0.0
    if m.kind == "uniform":
        if not np.all(m.body.contains(p.vertices)):
            raise ValueError("precondition violated: polytope is not contained in "
                             f"the support of the uniform measure on {m.body.shape}")
        return min(1.0, p.volume / m.body.volume)
    if m.dim == 1:
        lo, hi = p.vertices[0, 0], p.vertices[1, 0]
        return float(special.ndtr(hi) - special.ndtr(lo))
    if m.dim == 2:
        return _gauss_mass_2d(p.vertices.tolist())
    return _gauss_mass_3d(p)


def missed_mass(m: MeasureModel, p: Polytope) -> float:
    return 1.0 - mu_mass(m, p)


def extension_mass(m: MeasureModel, p: Polytope, xs, base: float | None = None) -> np.ndarray:
    """``mu([p, x] \\ p)`` for each row ``x`` of ``xs``."""
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    if m.kind == "uniform":
        return extension_volume(p, xs) / m.body.volume
    if base is None:
        base = mu_mass(m, p)
    out = np.zeros(len(xs))
    vol = extension_volume(p, xs)
    for j in np.nonzero(vol > 0)[0]:
        grown = convex_hull(np.vstack([p.vertices, xs[j]]), m.dim)
        out[j] = max(0.0, mu_mass(m, grown) - base)
    return out


# ---------------------------------------------------------- affine surface area

def affine_surface_area(k: ConvexBody, strict: bool = True) -> float:
    """Closed-form affine surface area of a smooth unit-volume body.

    Polytopes have affine surface area 0; with ``strict=False`` that value is
    returned instead of raising :class:`UnsupportedShapeError`.
    """
    if k.shape in ("disk", "ellipse"):
        # affine invariant: every unit-area ellipse matches the unit-area disk,
        # where kappa = 1/r is constant and the integral is 2 pi r * r^(-1/3)
        r = 1.0 / math.sqrt(math.pi)
        return 2.0 * math.pi * r ** (2.0 / 3.0)
    if k.shape == "ball3d":
        r = k.params[0]
        return 4.0 * math.pi * r ** 1.5
    if strict:
        raise UnsupportedShapeError(
            f"affine surface area is only available for smooth bodies, not {k.shape!r}")
    return 0.0
