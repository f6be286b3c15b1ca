"""Convex polytopes in R^2 and R^3 given by tight halfspaces.

A :class:`Polytope` is built from halfspaces u_i . x <= h_i.  Construction
shifts an interior point to the origin, maps each halfspace to the dual point
u_i / (h_i - u_i . c) and takes the convex hull of the dual points: its
vertices are the non-redundant halfspaces and its facets the primal vertices.
In the plane the hull is a Graham scan over the angularly sorted dual points,
which is the same as walking the lines in angular order and dropping those
that the intersection of their neighbours already satisfies.  In space the
hull comes from Qhull.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np
from scipy.optimize import linprog, minimize
from scipy.spatial import ConvexHull, QhullError, cKDTree

from .errors import (DimensionMismatch, EmptyBody, OriginNotContained,
                     OriginOnSingularBoundary, UnboundedBody)
from .measure import DirectionalMeasure, mesh_spacing, sphere_mesh

TIGHT_TOL = 1e-10
EMPTY_VOLUME = 1e-14


class Polytope:
    """Bounded convex polytope with non-empty interior.

    Attributes are read-only numpy arrays:

    normals, offsets
        tight halfspaces u_i . x <= h_i (unit normals, one per facet)
    vertices
        extreme points
    facet_areas, facet_centroids
        (n-1)-volume and centroid of each facet, aligned with ``normals``
    facet_vertices
        per facet, indices into ``vertices`` in cyclic order
    ridge_pairs, ridge_sizes
        adjacent facet pairs and the (n-2)-measure of their common ridge
        (edge length in space, 1 in the plane)
    """

    __slots__ = ("dim", "normals", "offsets", "vertices", "facet_areas", "facet_centroids",
                 "facet_vertices", "volume", "centroid", "interior_point", "approx_gap",
                 "ridge_pairs", "ridge_sizes")

    def __init__(self, dim, normals, offsets, vertices, facet_areas, facet_centroids,
                 facet_vertices, volume, centroid, interior_point, approx_gap=0.0,
                 ridges=None):
        self.dim = dim
        for name, arr in (("normals", normals), ("offsets", offsets), ("vertices", vertices),
                          ("facet_areas", facet_areas), ("facet_centroids", facet_centroids),
                          ("centroid", centroid), ("interior_point", interior_point)):
            arr = np.asarray(arr, dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if ridges is None:
            ridges = (np.zeros((0, 2), dtype=int), np.zeros(0))
        for name, arr in zip(("ridge_pairs", "ridge_sizes"), ridges):
            arr = np.array(arr)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        self.facet_vertices = tuple(np.asarray(f, dtype=int) for f in facet_vertices)
        self.volume = float(volume)
        self.approx_gap = float(approx_gap)

    def __setattr__(self, name, value):
        if hasattr(self, name) and name != "approx_gap":
            raise AttributeError("Polytope is immutable")
        object.__setattr__(self, name, value)

    def __repr__(self):
        return (f"Polytope(dim={self.dim}, facets={len(self.normals)}, "
                f"vertices={len(self.vertices)}, volume={self.volume:.6g})")

    # -- cheap derived quantities

    def support(self, x):
        """h_P(x) = max_v x . v; vectorized over rows of ``x``."""
        x = np.asarray(x, dtype=float)
        return (x @ self.vertices.T).max(axis=-1)

    @property
    def surface_area(self):
        return float(self.facet_areas.sum())

    @property
    def circumradius(self):
        return float(np.linalg.norm(self.vertices, axis=1).max())

    def contains(self, x, tol=1e-12):
        x = np.atleast_2d(x)
        return np.all(x @ self.normals.T <= self.offsets + tol * max(1.0, self.scale), axis=1)

    @property
    def scale(self):
        return float(np.abs(self.vertices - self.centroid).max())

    def contains_origin(self, tol=1e-12):
        return bool(np.all(self.offsets >= -tol * max(1.0, self.scale)))

    def scaled(self, factor):
        """Dilation about the origin; factor > 0."""
        t = float(factor)
        if t <= 0:
            raise ValueError("dilation factor must be positive")
        return Polytope(self.dim, self.normals, self.offsets * t, self.vertices * t,
                        self.facet_areas * t ** (self.dim - 1), self.facet_centroids * t,
                        self.facet_vertices, self.volume * t ** self.dim, self.centroid * t,
                        self.interior_point * t, self.approx_gap * t,
                        (self.ridge_pairs, self.ridge_sizes * t ** (self.dim - 2)))

    def translated(self, shift):
        x = np.asarray(shift, dtype=float)
        return Polytope(self.dim, self.normals, self.offsets + self.normals @ x,
                        self.vertices + x, self.facet_areas, self.facet_centroids + x,
                        self.facet_vertices, self.volume, self.centroid + x,
                        self.interior_point + x, self.approx_gap,
                        (self.ridge_pairs, self.ridge_sizes))

    def centered(self):
        return self.translated(-self.centroid)

    def edges(self):
        """Unique vertex-index pairs of the 1-skeleton."""
        out = set()
        for f in self.facet_vertices:
            if self.dim == 2:
                out.add((min(f[0], f[1]), max(f[0], f[1])))
            else:
                for a, b in zip(f, np.roll(f, -1)):
                    out.add((min(a, b), max(a, b)))
        return np.array(sorted(out), dtype=int)


# -- construction -----------------------------------------------------------------


def _dedupe_normals(U, h):
    """Merge (near-)identical normals keeping the smallest offset."""
    if len(U) < 2:
        return U, h
    pairs = cKDTree(U).query_pairs(1e-9, output_type="ndarray")
    if len(pairs) == 0:
        return U, h
    keep = np.ones(len(U), dtype=bool)
    h = h.copy()
    for a, b in pairs:
        lo, hi = min(a, b), max(a, b)
        h[lo] = min(h[lo], h[hi])
        keep[hi] = False
    return U[keep], h[keep]


def _check_bounded(U):
    """Bounded iff the normals are not contained in any closed hemisphere."""
    if U.shape[1] == 2:
        ang = np.sort(np.arctan2(U[:, 1], U[:, 0]))
        gaps = np.diff(np.concatenate([ang, [ang[0] + 2 * np.pi]]))
        if gaps.max() >= np.pi - 1e-12:
            raise UnboundedBody("normals lie in a closed half-plane")
        return
    try:
        hull = ConvexHull(U)
    except QhullError as exc:
        raise UnboundedBody("normals lie in a plane") from exc
    if np.any(hull.equations[:, -1] > -1e-12):
        raise UnboundedBody("normals lie in a closed hemisphere")


def chebyshev_center(U, h):
    """Center and radius of the largest inscribed ball (LP)."""
    m, n = U.shape
    c = np.zeros(n + 1)
    c[-1] = -1.0
    A = np.hstack([U, np.ones((m, 1))])
    res = linprog(c, A_ub=A, b_ub=h, bounds=[(None, None)] * n + [(0, None)], method="highs")
    if res.status == 2:
        raise EmptyBody("halfspaces have empty intersection")
    if res.status == 3:
        raise UnboundedBody("unbounded Chebyshev LP")
    if res.status != 0:
        raise EmptyBody(f"Chebyshev LP failed: {res.message}")
    return res.x[:n], float(res.x[-1])


def _hull_2d(Y):
    """Indices of the convex hull of dual points ``Y`` (origin strictly inside), CCW."""
    ang = np.arctan2(Y[:, 1], Y[:, 0])
    rad = np.hypot(Y[:, 0], Y[:, 1])
    order = np.lexsort((-rad, ang))
    start = int(np.argmax(rad[order]))
    order = np.roll(order, -start)
    scale = rad.max() ** 2
    stack = []
    for idx in list(order) + [order[0]]:
        while len(stack) >= 2:
            a, b = Y[stack[-2]], Y[stack[-1]]
            c = Y[idx]
            cross = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0])
            if cross <= 1e-13 * scale:
                stack.pop()
            else:
                break
        if not stack or idx != stack[-1]:
            stack.append(idx)
    if len(stack) > 1 and stack[-1] == stack[0]:
        stack.pop()
    return np.array(stack, dtype=int)


def _build_2d(U, h, c):
    s = h - U @ c
    keep = _hull_2d(U / s[:, None])
    while True:
        Uk, sk = U[keep], s[keep]
        nxt = np.roll(np.arange(len(keep)), -1)
        # vertex k joins line k and line k+1
        a, b = Uk, Uk[nxt]
        det = a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]
        V = np.column_stack([(sk * b[:, 1] - sk[nxt] * a[:, 1]) / det,
                             (a[:, 0] * sk[nxt] - b[:, 0] * sk) / det])
        prev = np.roll(np.arange(len(keep)), 1)
        lengths = np.linalg.norm(V - V[prev], axis=1)
        short = lengths <= 1e-12 * max(1.0, np.abs(V).max())
        if not short.any() or len(keep) - short.sum() < 3:
            break
        keep = keep[~short]
    if len(keep) < 3:
        raise EmptyBody("intersection has empty interior")
    areas = lengths
    centroids = 0.5 * (V + V[prev])
    facet_vertices = [np.array([p, k]) for k, p in zip(range(len(keep)), prev)]
    k = len(keep)
    ridge_pairs = np.column_stack([np.arange(k), (np.arange(k) + 1) % k])
    return keep, V, areas, centroids, facet_vertices, ridge_pairs, np.ones(k)


def _polygon_area_3d(P, normal):
    """Area and centroid of a planar polygon given in cyclic order."""
    if len(P) < 3:
        return 0.0, P.mean(axis=0)
    o = P[0]
    a, b = P[1:-1] - o, P[2:] - o
    tri = 0.5 * (np.cross(a, b) @ normal)
    area = tri.sum()
    if abs(area) < 1e-300:
        return 0.0, P.mean(axis=0)
    cen = o + (tri[:, None] * (a + b) / 3.0).sum(axis=0) / area
    return abs(area), cen


def _facet_cycle(i, simplices, neighbors, incident):
    """Dual simplices around dual vertex ``i`` in cyclic order."""
    start = incident[0]
    cycle = [start]
    verts = simplices[start]
    # leave the start simplex across the edge (i, x) for one of its other vertices
    x = verts[verts != i][0]
    cur = start
    for _ in range(len(incident)):
        row = simplices[cur]
        # the neighbor across edge (i, x) is opposite the third vertex
        opp = row[(row != i) & (row != x)][0]
        nxt = neighbors[cur][int(np.flatnonzero(row == opp)[0])]
        if nxt == start:
            break
        cycle.append(nxt)
        nrow = simplices[nxt]
        x = nrow[(nrow != i) & (nrow != x)][0]
        cur = nxt
    return np.array(cycle)


def _build_3d(U, h, c):
    s = h - U @ c
    Y = U / s[:, None]
    try:
        hull = ConvexHull(Y)
    except QhullError as exc:
        raise EmptyBody("degenerate halfspace system") from exc
    simp = hull.simplices
    # primal vertex of each dual simplex: the three planes meet there
    raw = np.linalg.solve(U[simp], s[simp][..., None])[..., 0]
    scale = max(1.0, float(np.abs(raw).max()))
    label = np.full(len(raw), -1)
    reps = []
    for k, grp in enumerate(cKDTree(raw).query_ball_point(raw, 1e-12 * scale)):
        if label[k] >= 0:
            continue
        label[grp] = len(reps)
        reps.append(k)
    V = raw[reps]

    incident = {}
    for k, row in enumerate(simp):
        for i in row:
            incident.setdefault(int(i), []).append(k)
    keep, areas, cents, fverts, cycles = [], [], [], [], {}
    for i in sorted(incident):
        cyc = _facet_cycle(i, simp, hull.neighbors, incident[i])
        area, cen = _polygon_area_3d(raw[cyc], U[i])
        if area <= 1e-14 * scale ** 2:
            continue
        lab = label[cyc]
        lab = lab[np.r_[True, lab[1:] != lab[:-1]]]
        if len(lab) > 1 and lab[0] == lab[-1]:
            lab = lab[:-1]
        cycles[i] = len(keep)
        keep.append(i)
        areas.append(area)
        cents.append(cen)
        fverts.append(lab)
    if len(keep) < 4:
        raise EmptyBody("intersection has empty interior")
    # ridges: dual edges (i, j) joining two kept facets; endpoints from the two simplices
    ridges = {}
    for k, row in enumerate(simp):
        for m in range(3):
            nb = hull.neighbors[k][m]
            if nb < k:
                continue
            i, j = (int(v) for v in row[np.arange(3) != m])
            if i in cycles and j in cycles:
                L = float(np.linalg.norm(raw[k] - raw[nb]))
                key = (min(cycles[i], cycles[j]), max(cycles[i], cycles[j]))
                ridges[key] = ridges.get(key, 0.0) + L
    ridge_pairs = np.array(sorted(ridges), dtype=int).reshape(-1, 2)
    ridge_sizes = np.array([ridges[tuple(r)] for r in ridge_pairs])
    used = np.unique(np.concatenate(fverts))
    remap = -np.ones(len(V), dtype=int)
    remap[used] = np.arange(len(used))
    fverts = [remap[f] for f in fverts]
    return (np.array(keep), V[used], np.array(areas), np.array(cents), fverts,
            ridge_pairs, ridge_sizes)


def from_halfspaces(normals, offsets, interior=None):
    """Bounded intersection of the halfspaces ``normals[i] . x <= offsets[i]``.

    ``interior`` is an optional hint; when it is strictly feasible the
    Chebyshev-center LP is skipped.  Redundant halfspaces are dropped.
    """
    U = np.atleast_2d(np.asarray(normals, dtype=float))
    h = np.asarray(offsets, dtype=float).ravel()
    if U.shape[0] != h.shape[0]:
        raise ValueError("normals and offsets differ in length")
    n = U.shape[1]
    if n not in (2, 3):
        raise DimensionMismatch(f"only dimensions 2 and 3 are supported, got {n}")
    if len(h) < n + 1:
        raise UnboundedBody(f"need at least {n + 1} halfspaces in dimension {n}")
    nrm = np.linalg.norm(U, axis=1)
    if np.any(nrm < 1e-300) or not np.all(np.isfinite(h)):
        raise ValueError("invalid halfspace data")
    nrm[np.abs(nrm - 1.0) <= 4e-16] = 1.0
    U, h = U / nrm[:, None], h / nrm
    U, h = _dedupe_normals(U, h)
    _check_bounded(U)

    c = None
    if interior is not None:
        c = np.asarray(interior, dtype=float)
        gap = h - U @ c
        if gap.min() <= 1e-9 * max(1.0, np.abs(h).max()):
            c = None
    if c is None:
        c, r = chebyshev_center(U, h)
        if r <= 1e-12 * max(1.0, np.abs(h).max()):
            raise EmptyBody("intersection has empty interior")

    if n == 2:
        keep, V, areas, cents, fverts, rp, rs = _build_2d(U, h, c)
    else:
        keep, V, areas, cents, fverts, rp, rs = _build_3d(U, h, c)
    Uk = U[keep]
    sk = h[keep] - Uk @ c
    volume = float(sk @ areas) / n
    if volume <= 0:
        raise EmptyBody("non-positive volume")
    # centroid of the cone decomposition from c
    cone_vol = sk * areas / n
    centroid = (cone_vol[:, None] * (cents * n / (n + 1.0))).sum(axis=0) / volume
    return Polytope(n, Uk, h[keep], V + c, areas, cents + c, fverts, volume, centroid + c, c,
                    ridges=(rp, rs))


def from_vertices(points):
    """Convex hull of a point cloud as a :class:`Polytope`."""
    P = np.asarray(points, dtype=float)
    try:
        hull = ConvexHull(P)
    except QhullError as exc:
        raise EmptyBody("points span no full-dimensional hull") from exc
    eq = hull.equations
    return from_halfspaces(eq[:, :-1], -eq[:, -1], interior=P[hull.vertices].mean(axis=0))


def box(lower, upper):
    lower, upper = np.asarray(lower, float), np.asarray(upper, float)
    n = len(lower)
    I = np.eye(n)
    return from_halfspaces(np.vstack([I, -I]), np.concatenate([upper, -lower]))


def regular_polygon(m, circumradius=1.0, phase=0.0):
    ang = phase + 2 * np.pi * np.arange(m) / m
    return from_vertices(circumradius * np.column_stack([np.cos(ang), np.sin(ang)]))


# -- operations -----------------------------------------------------------------------


def support(P, x):
    """Support function h_P(x); 1-homogeneous in x."""
    return P.support(x)


def volume(P):
    return P.volume


def surface_measure(P, p=1.0):
    """(L_p) surface area measure: atoms (u_i, h_i^{1-p} area_i)."""
    if p < 1:
        raise ValueError("p must be >= 1")
    if p == 1:
        return DirectionalMeasure(P.normals, P.facet_areas)
    bad = P.offsets <= 1e-12
    if np.any(bad):
        raise OriginOnSingularBoundary(
            f"{int(bad.sum())} facet(s) have h <= 1e-12; the L_p measure is undefined")
    return DirectionalMeasure(P.normals, P.offsets ** (1.0 - p) * P.facet_areas)


def _check_same_dim(P, Q):
    if P.dim != Q.dim:
        raise DimensionMismatch(f"dimensions {P.dim} and {Q.dim} differ")


def minkowski_sum(P, Q):
    """P + Q.  ``Q`` may also be a single point (translation)."""
    if not isinstance(Q, Polytope):
        x = np.asarray(Q, dtype=float)
        if x.shape != (P.dim,):
            raise DimensionMismatch("point has the wrong dimension")
        return P.translated(x)
    _check_same_dim(P, Q)
    hint = P.centroid + Q.centroid
    if P.dim == 2:
        U = np.vstack([P.normals, Q.normals])
        return from_halfspaces(U, P.support(U) + Q.support(U), interior=hint)
    pts = (P.vertices[:, None, :] + Q.vertices[None, :, :]).reshape(-1, 3)
    hull = ConvexHull(pts)
    eq = hull.equations
    U = eq[:, :3]
    # offsets from the support functions, not from Qhull's plane fit
    return from_halfspaces(U, P.support(U) + Q.support(U), interior=hint)


def lp_combination(t, P, s, Q, p, mesh=None):
    """Polytopal surrogate of the L_p combination t.P +_p s.Q.

    Support values (t h_P^p + s h_Q^p)^{1/p} are imposed on the facet normals
    of both bodies and on a quasi-uniform direction mesh.  The result
    contains the true L_p combination; ``approx_gap`` holds the Hausdorff gap
    bound (mesh angle times circumradius).
    """
    _check_same_dim(P, Q)
    if p <= 1:
        raise ValueError("lp_combination needs p > 1")
    if t < 0 or s < 0 or t + s <= 0:
        raise ValueError("coefficients must be nonnegative with positive sum")
    if not (P.contains_origin() and Q.contains_origin()):
        raise OriginNotContained("both bodies must contain the origin")
    M = sphere_mesh(P.dim) if mesh is None else np.asarray(mesh, float)
    U = np.vstack([P.normals, Q.normals, M])
    hp = np.clip(P.support(U), 0.0, None)
    hq = np.clip(Q.support(U), 0.0, None)
    vals = (t * hp ** p + s * hq ** p) ** (1.0 / p)
    hint = None
    if t > 0 and s > 0:
        hint = (t * P.centroid + s * Q.centroid) / (t + s) * min(1.0, t + s)
    body = from_halfspaces(U, vals, interior=hint)
    body.approx_gap = mesh_spacing(P.dim, len(M)) * body.circumradius
    return body


def mixed_volume(P, Q, p=1.0):
    """V_p(P, Q) = (1/n) sum_i h_Q(u_i)^p w_i with (u_i, w_i) = S_{P,p}."""
    _check_same_dim(P, Q)
    S = surface_measure(P, p)
    hq = Q.support(S.directions)
    if p > 1:
        if np.any(hq < -1e-12):
            raise OriginNotContained("h_Q < 0 on a facet normal of P")
        hq = np.clip(hq, 0.0, None)
    return float((hq ** p) @ S.weights) / P.dim


class Radii(NamedTuple):
    inradius: float
    circumradius: float
    origin_interior: bool


def radii(P):
    """Radii of the largest/smallest origin-centered balls inside/around P.

    When the origin is not interior the inradius is 0 (sup over an empty set)
    and ``origin_interior`` is False.
    """
    R = P.circumradius
    hmin = float(P.offsets.min())
    if hmin <= 0:
        return Radii(0.0, R, False)
    return Radii(hmin, R, True)


def _segment_distance(x, A, B):
    d = B - A
    L2 = (d * d).sum(axis=1)
    tt = np.clip(((x - A) * d).sum(axis=1) / np.where(L2 > 0, L2, 1.0), 0.0, 1.0)
    return np.linalg.norm(A + tt[:, None] * d - x, axis=1)


def distance_to(P, x):
    """Euclidean distance from point ``x`` to P (0 inside)."""
    x = np.asarray(x, dtype=float)
    viol = P.normals @ x - P.offsets
    if viol.max() <= 0:
        return 0.0
    E = P.edges()
    best = float(_segment_distance(x, P.vertices[E[:, 0]], P.vertices[E[:, 1]]).min())
    if P.dim == 3:
        for i in np.flatnonzero(viol > 0):
            if viol[i] >= best:
                continue
            y = x - viol[i] * P.normals[i]
            F = P.vertices[P.facet_vertices[i]]
            nxt = np.roll(F, -1, axis=0)
            side = np.cross(nxt - F, y - F) @ P.normals[i]
            if np.all(side >= -1e-14) or np.all(side <= 1e-14):
                best = min(best, float(viol[i]))
    return best


def hausdorff(P, Q):
    """Hausdorff distance; the max of dist(., Q) over P sits at a vertex."""
    _check_same_dim(P, Q)
    a = max(distance_to(Q, v) for v in P.vertices)
    b = max(distance_to(P, v) for v in Q.vertices)
    return max(a, b)


def intersection(P, Q, hint=None):
    """P cap Q, or None when the intersection has (numerically) no interior."""
    _check_same_dim(P, Q)
    U = np.vstack([P.normals, Q.normals])
    h = np.concatenate([P.offsets, Q.offsets])
    try:
        R = from_halfspaces(U, h, interior=hint)
    except EmptyBody:
        return None
    if R.volume < EMPTY_VOLUME:
        return None
    return R


def intersection_volume(P, Q, hint=None):
    R = intersection(P, Q, hint)
    return 0.0 if R is None else R.volume


def symmetric_difference_volume(P, Q):
    """|P| + |Q| - 2|P cap Q|."""
    return P.volume + Q.volume - 2.0 * intersection_volume(P, Q)


def _overlap_and_gradient(P, Q, x, hint=None):
    """|P cap (Q + x)| and its gradient in x.

    Translating Q by dx moves each of its facet planes by u_j . dx, so the
    gradient is the sum of area * normal over the facets of the intersection
    that come from Q.
    """
    Qx = Q.translated(x)
    R = intersection(P, Qx, hint)
    if R is None:
        return 0.0, np.zeros(P.dim), None
    tol = 1e-9 * max(1.0, R.scale)
    match = (np.abs(R.normals @ Qx.normals.T - 1.0) <= 1e-12) & \
            (np.abs(R.offsets[:, None] - Qx.offsets[None, :]) <= tol)
    fromq = match.any(axis=1)
    grad = (R.facet_areas[fromq, None] * R.normals[fromq]).sum(axis=0)
    return R.volume, grad, R


def fraenkel_asymmetry(P, Q, restarts=3, rng_seed=0):
    """inf over translations x0 of |P sym-diff (x0 + rQ)| / |P| with r^n |Q| = |P|.

    Overlap^{1/n} is concave in x0, so a local method is enough: BFGS on
    -overlap^{1/n} with the exact translation gradient, started at centroid
    alignment plus ``restarts - 1`` jittered points, then a short compass
    search to settle on kinks.  Result lies in [0, 2].
    """
    _check_same_dim(P, Q)
    n = P.dim
    r = (P.volume / Q.volume) ** (1.0 / n)
    Qr = Q.scaled(r)
    base = P.centroid - Qr.centroid
    scale = P.scale
    state = {"hint": None}
    best = {"x": base, "v": -1.0}

    def evaluate(x):
        v, g, R = _overlap_and_gradient(P, Qr, x, state["hint"])
        if R is not None:
            state["hint"] = R.centroid
        if v > best["v"]:
            best["x"], best["v"] = np.array(x, float), v
        return v, g

    def objective(x):
        v, g = evaluate(x)
        if v <= 0:
            # push back toward alignment when the bodies separate
            d = x - base
            return 1.0 + d @ d, 2.0 * d
        f = v ** (1.0 / n)
        return -f, -(f / (n * v)) * g

    v0, _ = evaluate(base)
    if 2.0 * (P.volume - v0) / P.volume <= 1e-13:
        return 0.0
    rng = np.random.default_rng(rng_seed)
    starts = [base] + [base + 0.05 * scale * rng.standard_normal(n)
                       for _ in range(max(0, restarts - 1))]
    for x0 in starts:
        minimize(objective, x0, jac=True, method="BFGS",
                 options={"gtol": 1e-12 * scale ** (n - 1), "maxiter": 200})
    # compass search; bounded moves per step size so ridges cannot stall it
    D = np.vstack([np.eye(n), -np.eye(n)])
    x, v = best["x"], best["v"]
    step = 1e-3 * scale
    while step > 1e-10 * scale:
        for _ in range(20):
            for d in D:
                fy, _ = evaluate(x + step * d)
                if fy > v + 1e-14 * P.volume:
                    x, v = x + step * d, fy
                    break
            else:
                break
        step *= 0.25
    alpha = 2.0 * (P.volume - best["v"]) / P.volume
    return float(min(max(alpha, 0.0), 2.0))


def projection_area(P, theta):
    """(n-1)-volume of the orthogonal projection of P onto theta-perp (Cauchy)."""
    t = np.asarray(theta, dtype=float)
    t = t / np.linalg.norm(t)
    return 0.5 * float(P.facet_areas @ np.abs(P.normals @ t))
