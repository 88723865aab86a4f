"""Convex hulls in dimensions 1, 2 and 3 with strict extremality.

A point is reported as a vertex only if it is an extreme point of the input
set; points in the relative interior of an edge or facet are not vertices.
All sidedness decisions go through the exact predicates in
:mod:`poissonpoly.predicates`, so the vertex set (and hence every vertex
count) is independent of floating-point tolerances.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .predicates import CCW_ERRBOUND, orient2d, orient2d_batch, orient3d

# Below this size the interior filter costs more than it saves.
_FILTER_MIN_POINTS = 100
_FILTER_DIRECTIONS = 32


@dataclass(frozen=True, eq=False)
class Polytope:
    """Convex hull of a finite point set.

    ``vertices`` holds the extreme points only; ``vertex_indices`` maps them
    back to rows of the input array. For ``dim == 2`` the vertices are in
    counter-clockwise order and ``facets`` is the index cycle. For
    ``dim == 3`` and a full-dimensional hull, ``facets`` is an (F, 3) array of
    triangles indexing ``vertices`` and ``normals`` the outward (unnormalised)
    normals. Lower-dimensional hulls carry no facets and have volume 0.
    """

    dim: int
    vertices: np.ndarray
    vertex_indices: tuple
    facets: np.ndarray = field(default_factory=lambda: np.zeros((0, 3), int))
    normals: np.ndarray | None = None
    volume: float = 0.0
    affine_dim: int = -1

    def __post_init__(self):
        for arr in (self.vertices, self.facets, self.normals):
            if isinstance(arr, np.ndarray):
                arr.setflags(write=False)

    @property
    def n_vertices(self) -> int:
        return len(self.vertex_indices)

    @property
    def is_full_dimensional(self) -> bool:
        return self.affine_dim == self.dim


def _as_points(points, dim):
    if isinstance(points, np.ndarray):
        arr = np.asarray(points, dtype=float)
        if arr.size == 0:
            if dim is None:
                raise ValueError("dimension of an empty point set must be given")
            return np.zeros((0, dim))
        if arr.ndim != 2:
            raise ValueError("points must be a 2-d array of shape (n, d)")
    else:
        pts = list(points)
        if not pts:
            if dim is None:
                raise ValueError("dimension of an empty point set must be given")
            return np.zeros((0, dim))
        lengths = {len(p) for p in pts}
        if len(lengths) != 1:
            raise ValueError(f"dimension mismatch among points: {sorted(lengths)}")
        arr = np.asarray(pts, dtype=float)
    if dim is not None and arr.shape[1] != dim:
        raise ValueError(f"points have dimension {arr.shape[1]}, expected {dim}")
    if arr.shape[1] not in (1, 2, 3):
        raise ValueError("only dimensions 1, 2 and 3 are supported")
    if not np.all(np.isfinite(arr)):
        raise ValueError("point coordinates must be finite")
    return arr


def convex_hull(points, dim: int | None = None) -> Polytope:
    """Return the convex hull of ``points`` (an (n, d) array or list of tuples)."""
    pts = _as_points(points, dim)
    d = pts.shape[1]
    if d == 1:
        return _hull1d(pts)
    if d == 2:
        return _hull2d(pts)
    return _hull3d(pts)


# ---------------------------------------------------------------- d = 1

def _hull1d(pts):
    n = len(pts)
    if n == 0:
        return Polytope(1, np.zeros((0, 1)), (), affine_dim=-1)
    x = pts[:, 0]
    lo, hi = int(np.argmin(x)), int(np.argmax(x))
    if x[lo] == x[hi]:
        return Polytope(1, pts[[lo]], (lo,), affine_dim=0)
    return Polytope(1, pts[[lo, hi]], (lo, hi), volume=float(x[hi] - x[lo]),
                    affine_dim=1)


# ---------------------------------------------------------------- d = 2

def _interior_filter2d(pts):
    """Mask of points that may be hull vertices.

    Extreme points in a fan of directions span a polygon Q inside the hull;
    anything certifiably in the open interior of Q cannot be a vertex.
    """
    n = len(pts)
    keep = np.ones(n, dtype=bool)
    ang = np.arange(_FILTER_DIRECTIONS) * (2.0 * np.pi / _FILTER_DIRECTIONS)
    dirs = np.stack([np.cos(ang), np.sin(ang)], axis=1)
    ext = np.argmax(pts @ dirs.T, axis=0)
    ring = [int(ext[0])]
    for i in ext[1:]:
        if i != ring[-1]:
            ring.append(int(i))
    while len(ring) > 1 and ring[-1] == ring[0]:
        ring.pop()
    if len(set(ring)) != len(ring) or len(ring) < 3:
        return keep
    q = pts[ring]
    m = len(q)
    for i in range(m):
        if orient2d(q[i - 1], q[i], q[(i + 1) % m]) <= 0:
            return keep
    a = q[None, :, :]
    b = np.roll(q, -1, axis=0)[None, :, :]
    c = pts[:, None, :]
    detleft = (a[..., 0] - c[..., 0]) * (b[..., 1] - c[..., 1])
    detright = (a[..., 1] - c[..., 1]) * (b[..., 0] - c[..., 0])
    det = detleft - detright
    bound = CCW_ERRBOUND * (np.abs(detleft) + np.abs(detright))
    inside = np.all(det > bound, axis=1)
    keep &= ~inside
    return keep


def _chain2d(order, P):
    """Andrew's monotone chain over points ``P`` visited in ``order``.

    Returns the CCW cycle of strictly extreme point indices.
    """

    def half(seq):
        out = []
        for i in seq:
            pi = P[i]
            while len(out) >= 2:
                a, b = P[out[-2]], P[out[-1]]
                detleft = (a[0] - pi[0]) * (b[1] - pi[1])
                detright = (a[1] - pi[1]) * (b[0] - pi[0])
                det = detleft - detright
                if det > CCW_ERRBOUND * (abs(detleft) + abs(detright)):
                    break
                if det < -CCW_ERRBOUND * (abs(detleft) + abs(detright)):
                    out.pop()
                    continue
                if orient2d(a, b, pi) <= 0:
                    out.pop()
                else:
                    break
            out.append(i)
        return out

    lower = half(order)
    upper = half(order[::-1])
    cycle = lower[:-1] + upper[:-1]
    if len(cycle) == 0:
        cycle = lower[:1]
    return cycle


def _shoelace(P, cycle):
    if len(cycle) < 3:
        return 0.0
    x0, y0 = P[cycle[0]]
    acc = 0.0
    px, py = 0.0, 0.0
    for i in cycle[1:]:
        x, y = P[i][0] - x0, P[i][1] - y0
        acc += px * y - x * py
        px, py = x, y
    return 0.5 * acc


def _hull2d(pts):
    n = len(pts)
    if n == 0:
        return Polytope(2, np.zeros((0, 2)), (), affine_dim=-1)
    P = pts.tolist()
    if n >= _FILTER_MIN_POINTS:
        cand = np.nonzero(_interior_filter2d(pts))[0].tolist()
    else:
        cand = range(n)
    order = sorted(cand, key=P.__getitem__)
    uniq = order[:1]
    for i in order[1:]:
        if P[i] != P[uniq[-1]]:
            uniq.append(i)
    cycle = _chain2d(uniq, P)
    k = len(cycle)
    affine_dim = 0 if k == 1 else (1 if k == 2 else 2)
    facets = np.arange(k) if k >= 3 else np.zeros(0, int)
    return Polytope(2, pts[cycle], tuple(cycle), facets=facets,
                    volume=_shoelace(P, cycle), affine_dim=affine_dim)


# ---------------------------------------------------------------- d = 3

def _collinear3(a, b, c):
    return (orient2d((a[0], a[1]), (b[0], b[1]), (c[0], c[1])) == 0
            and orient2d((a[0], a[2]), (b[0], b[2]), (c[0], c[2])) == 0
            and orient2d((a[1], a[2]), (b[1], b[2]), (c[1], c[2])) == 0)


def _exact_normal(a, b, c):
    a = [Fraction(v) for v in a]
    u = [Fraction(b[i]) - a[i] for i in range(3)]
    v = [Fraction(c[i]) - a[i] for i in range(3)]
    return (u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2],
            u[0] * v[1] - u[1] * v[0])


def _degenerate3d(pts, P, base):
    """Hull of a 3-d set whose affine hull has dimension < 3."""
    i0 = base[0]
    if len(base) == 1:
        return Polytope(3, pts[[i0]], (i0,), affine_dim=0)
    if len(base) == 2:
        # collinear: extremes along the coordinate with the largest spread
        axis = int(np.argmax(np.ptp(pts, axis=0)))
        lo, hi = int(np.argmin(pts[:, axis])), int(np.argmax(pts[:, axis]))
        return Polytope(3, pts[[lo, hi]], (lo, hi), affine_dim=1)
    # coplanar: drop the coordinate on which the exact normal is largest;
    # the projection is an affine bijection of the plane so extremality is kept
    nrm = _exact_normal(P[base[0]], P[base[1]], P[base[2]])
    drop = max(range(3), key=lambda i: abs(nrm[i]))
    keep_axes = [i for i in range(3) if i != drop]
    flat = _hull2d(pts[:, keep_axes])
    cycle = list(flat.vertex_indices)
    if nrm[drop] < 0:
        cycle = cycle[::-1]
    return Polytope(3, pts[cycle], tuple(cycle), affine_dim=2)


def _initial_simplex(order, P):
    i0 = order[0]
    i1 = next((i for i in order if P[i] != P[i0]), None)
    if i1 is None:
        return [i0]
    i2 = next((i for i in order if not _collinear3(P[i0], P[i1], P[i])), None)
    if i2 is None:
        return [i0, i1]
    i3 = next((i for i in order if orient3d(P[i0], P[i1], P[i2], P[i]) != 0),
              None)
    if i3 is None:
        return [i0, i1, i2]
    return [i0, i1, i2, i3]


def _incremental3d(order, P):
    """Randomised incremental hull with a full point/face conflict graph.

    Returns a list of outward-oriented triangles (tuples of point indices),
    or the affinely independent prefix when the set is degenerate.
    """
    base = _initial_simplex(order, P)
    if len(base) < 4:
        return None, base
    a, b, c, d = base
    if orient3d(P[a], P[b], P[c], P[d]) > 0:
        b, c = c, b
    faces = {}
    edge_face = {}
    face_conf = {}
    point_conf = {}
    next_id = 0

    def add_face(u, v, w, candidates):
        nonlocal next_id
        fid = next_id
        next_id += 1
        faces[fid] = (u, v, w)
        edge_face[(u, v)] = fid
        edge_face[(v, w)] = fid
        edge_face[(w, u)] = fid
        pu, pv, pw = P[u], P[v], P[w]
        conf = set()
        for p in candidates:
            if orient3d(pu, pv, pw, P[p]) > 0:
                conf.add(p)
                point_conf.setdefault(p, set()).add(fid)
        face_conf[fid] = conf
        return fid

    used = {a, b, c, d}
    rest = [i for i in order if i not in used]
    for tri in ((a, b, c), (a, d, b), (b, d, c), (a, c, d)):
        add_face(*tri, rest)

    for p in rest:
        visible = point_conf.pop(p, None)
        if not visible:
            continue
        horizon = []
        for fid in visible:
            u, v, w = faces[fid]
            for e in ((u, v), (v, w), (w, u)):
                twin = edge_face[(e[1], e[0])]
                if twin not in visible:
                    horizon.append((e, fid, twin))
        new_conf = {}
        for e, fid, twin in horizon:
            cand = (face_conf[fid] | face_conf[twin])
            cand.discard(p)
            new_conf[e] = cand
        for fid in visible:
            for q in face_conf[fid]:
                s = point_conf.get(q)
                if s is not None:
                    s.discard(fid)
            u, v, w = faces.pop(fid)
            for e in ((u, v), (v, w), (w, u)):
                if edge_face.get(e) == fid:
                    del edge_face[e]
            del face_conf[fid]
        for e, _, _ in horizon:
            add_face(e[0], e[1], p, new_conf[e])
    return list(faces.values()), base


def _non_strict_candidates(tris, P):
    """Vertices incident to a pair of coplanar adjacent triangles."""
    edge_tri = {}
    for t in tris:
        for k in range(3):
            edge_tri[(t[k], t[(k + 1) % 3])] = t
    flagged = set()
    for t in tris:
        for k in range(3):
            u, v = t[k], t[(k + 1) % 3]
            s = edge_tri[(v, u)]
            far = next(x for x in s if x != u and x != v)
            if orient3d(P[t[0]], P[t[1]], P[t[2]], P[far]) == 0:
                flagged.update(t)
                flagged.update(s)
    return flagged


def _sees_hull(tris, P, x):
    return any(orient3d(P[a], P[b], P[c], x) > 0 for a, b, c in tris)


def _hull3d(pts):
    n = len(pts)
    if n == 0:
        return Polytope(3, np.zeros((0, 3)), (), affine_dim=-1)
    P = [tuple(row) for row in pts.tolist()]
    # fixed-seed shuffle: expected O(n log n) and a deterministic result
    order = np.random.default_rng(0x5EED).permutation(n).tolist()
    tris, base = _incremental3d(order, P)
    if tris is None:
        return _degenerate3d(pts, P, base)
    verts = sorted({i for t in tris for i in t})
    flagged = _non_strict_candidates(tris, P)
    if flagged:
        drop = set()
        for v in flagged:
            others = [i for i in verts if i != v and i not in drop]
            sub, _ = _incremental3d(others, P)
            if sub is not None and not _sees_hull(sub, P, P[v]):
                drop.add(v)
        if drop:
            verts = [i for i in verts if i not in drop]
            tris, _ = _incremental3d(verts, P)
    pos = {v: k for k, v in enumerate(verts)}
    facets = np.array([[pos[i] for i in t] for t in tris], dtype=int)
    vx = pts[verts]
    A, B, C = vx[facets[:, 0]], vx[facets[:, 1]], vx[facets[:, 2]]
    normals = np.cross(B - A, C - A)
    o = vx.mean(axis=0)
    vol = float(np.sum(np.einsum("ij,ij->i", A - o, np.cross(B - o, C - o)))) / 6.0
    return Polytope(3, vx, tuple(verts), facets=facets, normals=normals,
                    volume=vol, affine_dim=3)


# ---------------------------------------------------------------- queries

def contains_interior(p: Polytope, x) -> bool:
    """True iff ``x`` lies in the open interior of ``p``.

    Boundary points, and every query against a lower-dimensional hull in
    d >= 2, give False.
    """
    x = tuple(float(v) for v in np.asarray(x, dtype=float).ravel())
    if len(x) != p.dim:
        raise ValueError(f"query point has dimension {len(x)}, polytope {p.dim}")
    if not p.is_full_dimensional:
        return False
    V = p.vertices
    if p.dim == 1:
        return float(V[0, 0]) < x[0] < float(V[1, 0])
    if p.dim == 2:
        k = len(V)
        return all(orient2d(V[i], V[(i + 1) % k], x) > 0 for i in range(k))
    return all(orient3d(V[a], V[b], V[c], x) < 0 for a, b, c in p.facets)


def hull_volume(p: Polytope) -> float:
    """d-dimensional volume of ``p`` (length in d = 1, 0 when degenerate)."""
    return p.volume


def extension_volume(p: Polytope, xs) -> np.ndarray:
    """Volume of ``[p, x] \\ p`` for each row ``x`` of ``xs``.

    Equals the summed volumes of the cones over the facets of ``p`` that are
    strictly visible from ``x`` (zero for x inside or on ``p``).
    Lower-dimensional hulls are handled as two-sided: a segment in the plane
    has two opposite edges, a flat polygon in space two opposite faces.
    """
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    if xs.shape[1] != p.dim:
        raise ValueError("dimension mismatch")
    out = np.zeros(len(xs))
    V = p.vertices
    if p.n_vertices == 0 or len(xs) == 0:
        return out
    if p.dim == 1:
        lo, hi = float(V[0, 0]), float(V[-1, 0])
        x = xs[:, 0]
        return np.where(x < lo, lo - x, 0.0) + np.where(x > hi, x - hi, 0.0)
    if p.dim == 2:
        if p.n_vertices == 1:
            return out
        if p.n_vertices == 2:
            A, B = V[[0, 1]], V[[1, 0]]
        else:
            A, B = V, np.roll(V, -1, axis=0)
        # signed area of (a, b, x); negative means x sees edge a->b
        cross = ((B[None, :, 0] - A[None, :, 0]) * (xs[:, None, 1] - A[None, :, 1])
                 - (B[None, :, 1] - A[None, :, 1]) * (xs[:, None, 0] - A[None, :, 0]))
        sign = orient2d_batch(A[None, :, :], B[None, :, :], xs[:, None, :])
        vis = sign < 0
        return 0.5 * np.sum(np.where(vis, -cross, 0.0), axis=1)
    if p.affine_dim < 2:
        return out
    if p.affine_dim == 2:
        k = len(V)
        fan = np.array([[0, i, i + 1] for i in range(1, k - 1)], dtype=int)
        tris = np.concatenate([fan, fan[:, ::-1]])
    else:
        tris = p.facets
    A, B, C = V[tris[:, 0]], V[tris[:, 1]], V[tris[:, 2]]
    nrm = np.cross(B - A, C - A)
    for j, x in enumerate(xs):
        vol = 0.0
        h = np.einsum("ij,ij->i", nrm, x - A)
        for f in np.nonzero(h > 0)[0]:
            if orient3d(A[f], B[f], C[f], x) > 0:
                vol += h[f] / 6.0
        out[j] = vol
    return out
