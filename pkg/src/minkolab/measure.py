"""Finite atomic measures on the unit sphere S^{n-1}, n in {2, 3}.

Besides the container types this module evaluates the dispersion functionals

    theta(mu)      = inf_{|t|=1} sum_i w_i |t . u_i|
    theta_plus(mu) = inf_{|t|=1} sum_i w_i (t . u_i)_+

and two distances between equal-mass measures: the dual-convex distance
(sup over convex K inside the unit ball of |int h_K d(mu - nu)|) and the
Wasserstein-1 distance with chordal ground cost.

Both dispersion functionals are minima of the support function of a zonotope
(sum_i w_i [-u_i, u_i], resp. sum_i w_i [0, u_i]) over the sphere.  That
minimum is attained at a facet normal of the zonotope, and those normals are
the unit vectors orthogonal to one generator (n=2) or to two generators (n=3).
Enumerating them gives the exact value.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.optimize import linprog, minimize
from scipy.spatial import cKDTree

from .errors import DegenerateMeasure, DimensionMismatch, InvalidMeasure, MassMismatch

ANGULAR_TOL = 1e-9
MASS_TOL = 1e-9
_CHUNK = 200_000


def fibonacci_sphere(count):
    """Quasi-uniform unit vectors on S^2 (golden-angle spiral)."""
    k = np.arange(count) + 0.5
    z = 1.0 - 2.0 * k / count
    r = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    phi = k * np.pi * (3.0 - np.sqrt(5.0))
    return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])


def circle_directions(count, offset=0.0):
    ang = offset + 2.0 * np.pi * np.arange(count) / count
    return np.column_stack([np.cos(ang), np.sin(ang)])


def sphere_mesh(dim, count=None):
    """Default quasi-uniform direction mesh: 720 angles or 1280 lattice points."""
    if dim == 2:
        return circle_directions(count or 720)
    return fibonacci_sphere(count or 1280)


def mesh_spacing(dim, count):
    """Nominal angular spacing of :func:`sphere_mesh` with ``count`` nodes."""
    if dim == 2:
        return 2.0 * np.pi / count
    # mean nearest-neighbour distance on the spiral ~ sqrt(4 pi / count)
    return float(np.sqrt(4.0 * np.pi / count))


def _merge_close(directions, weights, tol):
    """Merge atoms whose directions are within ``tol`` (chordal ~ angular)."""
    if len(directions) < 2:
        return directions, weights
    pairs = cKDTree(directions).query_pairs(tol, output_type="ndarray")
    if len(pairs) == 0:
        return directions, weights
    parent = np.arange(len(directions))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for a, b in pairs:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    roots = np.array([find(i) for i in range(len(directions))])
    keep = np.unique(roots)
    merged = np.zeros(len(keep))
    index = {r: k for k, r in enumerate(keep)}
    for i, r in enumerate(roots):
        merged[index[r]] += weights[i]
    return directions[keep], merged


def _as_directions(directions, dim=None):
    U = np.atleast_2d(np.asarray(directions, dtype=float))
    if U.ndim != 2 or U.shape[1] not in (2, 3):
        raise DimensionMismatch(f"directions must be (m, 2) or (m, 3), got {U.shape}")
    if dim is not None and U.shape[1] != dim:
        raise DimensionMismatch(f"expected dimension {dim}, got {U.shape[1]}")
    if not np.all(np.isfinite(U)):
        raise InvalidMeasure("non-finite direction")
    norms = np.linalg.norm(U, axis=1)
    if np.any(norms < 1e-300):
        raise InvalidMeasure("zero direction vector")
    # vectors already unit up to rounding are kept bit-for-bit so files round-trip
    norms[np.abs(norms - 1.0) <= 4e-16] = 1.0
    return U / norms[:, None]


class DirectionalMeasure:
    """Nonnegative atomic measure sum_i w_i delta_{u_i} on S^{n-1}.

    Directions are normalized on construction and atoms closer than
    ``ANGULAR_TOL`` are merged by adding their weights.  Instances are
    immutable and hashable.
    """

    __slots__ = ("_U", "_w", "_key")

    def __init__(self, directions, weights):
        U = _as_directions(directions)
        w = np.atleast_1d(np.asarray(weights, dtype=float)).ravel()
        if len(w) != len(U):
            raise InvalidMeasure("directions and weights differ in length")
        if len(w) == 0:
            raise InvalidMeasure("empty measure")
        if not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise InvalidMeasure("weights must be finite and strictly positive")
        U, w = _merge_close(U, w, ANGULAR_TOL)
        U.setflags(write=False)
        w.setflags(write=False)
        self._U = U
        self._w = w
        self._key = None

    @classmethod
    def from_atoms(cls, atoms):
        atoms = np.asarray(atoms, dtype=float)
        return cls(atoms[:, :-1], atoms[:, -1])

    @property
    def dim(self):
        return self._U.shape[1]

    @property
    def directions(self):
        return self._U

    @property
    def weights(self):
        return self._w

    @property
    def total_mass(self):
        return float(self._w.sum())

    def __len__(self):
        return len(self._w)

    def __iter__(self):
        return iter(zip(self._U, self._w))

    def scaled(self, factor):
        return DirectionalMeasure(self._U, self._w * float(factor))

    def normalized(self):
        """Probability measure with the same atoms."""
        return self.scaled(1.0 / self.total_mass)

    def key(self):
        if self._key is None:
            self._key = (self.dim, self._U.tobytes(), self._w.tobytes())
        return self._key

    def __hash__(self):
        return hash(self.key())

    def __eq__(self, other):
        return isinstance(other, DirectionalMeasure) and self.key() == other.key()

    def __repr__(self):
        return f"DirectionalMeasure(dim={self.dim}, atoms={len(self)}, mass={self.total_mass:.6g})"


@dataclass(frozen=True)
class SignedMeasure:
    """Atomic measure with real (possibly zero or negative) weights."""

    directions: np.ndarray
    weights: np.ndarray

    @property
    def dim(self):
        return self.directions.shape[1]

    def total_variation(self):
        return float(np.abs(self.weights).sum())

    def max_abs(self):
        return float(np.abs(self.weights).max()) if len(self.weights) else 0.0

    def pair(self, values):
        """<measure, function> for function values on the atom directions."""
        return float(np.dot(self.weights, values))


def union_support(mu, nu):
    """Common direction set and both weight vectors on it (zeros where absent)."""
    if mu.dim != nu.dim:
        raise DimensionMismatch(f"dimensions {mu.dim} and {nu.dim} differ")
    U = np.vstack([mu.directions, nu.directions])
    tags = np.concatenate([np.arange(len(mu)), -1 - np.arange(len(nu))])
    if len(U) > 1:
        pairs = cKDTree(U).query_pairs(ANGULAR_TOL, output_type="ndarray")
    else:
        pairs = np.zeros((0, 2), dtype=int)
    alias = np.arange(len(U))
    for a, b in pairs:
        lo, hi = min(a, b), max(a, b)
        alias[hi] = min(alias[hi], alias[lo])
    keep = np.flatnonzero(alias == np.arange(len(U)))
    slot = {k: i for i, k in enumerate(keep)}
    wm = np.zeros(len(keep))
    wn = np.zeros(len(keep))
    for idx, tag in enumerate(tags):
        root = idx
        while alias[root] != root:
            root = alias[root]
        if tag >= 0:
            wm[slot[root]] += mu.weights[tag]
        else:
            wn[slot[root]] += nu.weights[-1 - tag]
    return U[keep], wm, wn


def difference(mu, nu):
    U, wm, wn = union_support(mu, nu)
    return SignedMeasure(U, wm - wn)


def barycenter(mu):
    """sum_i w_i u_i; vanishes exactly for surface measures of bodies."""
    return mu.weights @ mu.directions


# -- dispersion functionals ---------------------------------------------------


def _candidate_directions(U):
    """Facet normals of zonotopes generated by the rows of ``U`` (both signs)."""
    dim = U.shape[1]
    if dim == 2:
        perp = np.column_stack([-U[:, 1], U[:, 0]])
        C = np.vstack([perp, -perp])
    else:
        i, j = np.triu_indices(len(U), k=1)
        c = np.cross(U[i], U[j])
        nrm = np.linalg.norm(c, axis=1)
        ok = nrm > 1e-12
        c = c[ok] / nrm[ok, None]
        extra = []
        # all generators on one line: any direction orthogonal to that line
        if not np.any(ok):
            u = U[0]
            a = np.eye(3)[np.argmin(np.abs(u))]
            v = np.cross(u, a)
            v /= np.linalg.norm(v)
            extra = [v, np.cross(u, v)]
        C = np.vstack([c, -c] + ([np.array(extra)] if len(extra) else []))
    return C


def _min_over(C, U, w, positive):
    best_val, best_dir = np.inf, None
    for start in range(0, len(C), max(1, _CHUNK // max(1, len(U)))):
        block = C[start:start + max(1, _CHUNK // max(1, len(U)))]
        dots = block @ U.T
        vals = (np.clip(dots, 0.0, None) if positive else np.abs(dots)) @ w
        k = int(np.argmin(vals))
        if vals[k] < best_val:
            best_val, best_dir = float(vals[k]), block[k]
    return max(best_val, 0.0), best_dir


def _objective(U, w, positive):
    def f(t):
        d = U @ t
        return float(((np.clip(d, 0.0, None) if positive else np.abs(d)) @ w))
    return f


def _grid_minimum(mu, positive, nodes):
    """Grid + local polish.  Returns (value, direction, bracket_width)."""
    U, w = mu.directions, mu.weights
    if mu.dim == 2:
        G = circle_directions(max(nodes, 720))
    else:
        G = fibonacci_sphere(max(nodes, 4096))
    dots = G @ U.T
    vals = (np.clip(dots, 0.0, None) if positive else np.abs(dots)) @ w
    order = np.argsort(vals)[:8]
    f = _objective(U, w, positive)
    best_val, best_dir = float(vals[order[0]]), G[order[0]]
    for k in order:
        if mu.dim == 2:
            a0 = np.arctan2(G[k, 1], G[k, 0])
            res = minimize(lambda a: f(np.array([np.cos(a[0]), np.sin(a[0])])), [a0],
                           method="Nelder-Mead", options={"xatol": 1e-13, "fatol": 1e-15})
            t = np.array([np.cos(res.x[0]), np.sin(res.x[0])])
        else:
            th0 = np.arccos(np.clip(G[k, 2], -1, 1))
            ph0 = np.arctan2(G[k, 1], G[k, 0])

            def sph(x):
                return np.array([np.sin(x[0]) * np.cos(x[1]), np.sin(x[0]) * np.sin(x[1]), np.cos(x[0])])

            res = minimize(lambda x: f(sph(x)), [th0, ph0], method="Nelder-Mead",
                           options={"xatol": 1e-12, "fatol": 1e-15, "maxiter": 4000})
            t = sph(res.x)
        val = f(t)
        if val < best_val:
            best_val, best_dir = val, t
    spacing = mesh_spacing(mu.dim, len(G))
    return best_val, best_dir, float(w.sum() * spacing)


def theta(mu, method="exact", return_argmin=False, nodes=4096):
    """inf over unit t of sum_i w_i |t . u_i|.

    ``method="exact"`` enumerates zonotope facet normals; ``method="grid"``
    evaluates a quasi-uniform grid and polishes the best nodes locally (its
    Lipschitz bracket has width (sum w) * spacing).
    """
    if method == "exact":
        val, t = _min_over(_candidate_directions(mu.directions), mu.directions, mu.weights, False)
    elif method == "grid":
        val, t, _ = _grid_minimum(mu, False, nodes)
    else:
        raise ValueError(f"unknown method {method!r}")
    return (val, t) if return_argmin else val


def theta_plus(mu, method="exact", return_argmin=False, nodes=4096):
    """inf over unit t of sum_i w_i (t . u_i)_+ ; zero iff mu sits in a closed hemisphere."""
    if method == "exact":
        val, t = _min_over(_candidate_directions(mu.directions), mu.directions, mu.weights, True)
    elif method == "grid":
        val, t, _ = _grid_minimum(mu, True, nodes)
    else:
        raise ValueError(f"unknown method {method!r}")
    return (val, t) if return_argmin else val


@dataclass(frozen=True)
class DispersionReport:
    theta: float
    theta_plus: float
    argmin_direction: np.ndarray
    mass_bound_delta: float
    mass_bound_holds: bool
    min_mass_outside: float = float("nan")
    bracket_width: float = 0.0


def _evaluation_grid(mu):
    base = sphere_mesh(mu.dim, 720 if mu.dim == 2 else 4096)
    return np.vstack([base, _candidate_directions(mu.directions)])


def mass_bound_check(mu):
    """Check mu(|t . u| > delta) > delta on an evaluation grid of directions t.

    delta = min(Theta / (2 mass), Theta / 2).  Raises DegenerateMeasure when
    Theta(mu) = 0.
    """
    th, arg = theta(mu, return_argmin=True)
    if th <= 0.0:
        raise DegenerateMeasure("Theta(mu) = 0: measure lies on a hyperplane")
    thp = theta_plus(mu)
    mass = mu.total_mass
    delta = min(th / (2.0 * mass), th / 2.0)
    G = _evaluation_grid(mu)
    outside = (np.abs(G @ mu.directions.T) > delta) @ mu.weights
    low = float(outside.min())
    return DispersionReport(theta=th, theta_plus=thp, argmin_direction=arg,
                            mass_bound_delta=delta, mass_bound_holds=bool(low > delta),
                            min_mass_outside=low)


# -- distances ------------------------------------------------------------------


def _check_masses(mu, nu):
    if mu.dim != nu.dim:
        raise DimensionMismatch(f"dimensions {mu.dim} and {nu.dim} differ")
    if abs(mu.total_mass - nu.total_mass) > MASS_TOL:
        raise MassMismatch(f"total masses differ: {mu.total_mass!r} vs {nu.total_mass!r}")


def _support_program(U, s):
    """max sum_j s_j h_K(u_j) over convex K in the closed unit ball.

    Variables are one support point y_i in the ball per direction and the
    offsets h; u_i . y_i = h_i and u_j . y_i <= h_j make h the support
    function of conv{y_i}.  Solved as an SOCP; the value returned is
    re-evaluated on the (ball-projected) witnesses, so it is attained.
    """
    import clarabel

    m, n = U.shape
    nv = m + m * n

    def ycol(i, k):
        return m + i * n + k

    rows, cols, vals, b = [], [], [], []
    r = 0
    for i in range(m):  # u_i . y_i - h_i = 0
        rows.append(r); cols.append(i); vals.append(-1.0)
        for k in range(n):
            rows.append(r); cols.append(ycol(i, k)); vals.append(U[i, k])
        b.append(0.0)
        r += 1
    n_eq = r
    for i in range(m):  # u_j . y_i - h_j <= 0
        for j in range(m):
            if i == j:
                continue
            rows.append(r); cols.append(j); vals.append(-1.0)
            for k in range(n):
                rows.append(r); cols.append(ycol(i, k)); vals.append(U[j, k])
            b.append(0.0)
            r += 1
    n_ineq = r - n_eq
    for i in range(m):  # (1, y_i) in SOC
        b.append(1.0)
        r += 1
        for k in range(n):
            rows.append(r); cols.append(ycol(i, k)); vals.append(-1.0)
            b.append(0.0)
            r += 1
    A = sparse.csc_matrix((vals, (rows, cols)), shape=(r, nv))
    P = sparse.csc_matrix((nv, nv))
    q = np.concatenate([-s, np.zeros(m * n)])
    cones = [clarabel.ZeroConeT(n_eq)]
    if n_ineq:
        cones.append(clarabel.NonnegativeConeT(n_ineq))
    cones += [clarabel.SecondOrderConeT(n + 1) for _ in range(m)]
    settings = clarabel.DefaultSettings()
    settings.verbose = False
    settings.tol_gap_abs = 1e-12
    settings.tol_gap_rel = 1e-12
    settings.tol_feas = 1e-12
    settings.max_iter = 400
    sol = clarabel.DefaultSolver(P, q, A, np.array(b), cones, settings).solve()
    Y = np.array(sol.x)[m:].reshape(m, n)
    nrm = np.linalg.norm(Y, axis=1)
    Y[nrm > 1.0] /= nrm[nrm > 1.0, None]
    h = (Y @ U.T).max(axis=0)
    return float(s @ h), Y


def dual_convex_distance(mu, nu, return_witness=False):
    """sup over convex K in B_1 of |int h_K d(mu - nu)| for equal-mass measures."""
    _check_masses(mu, nu)
    U, wm, wn = union_support(mu, nu)
    # canonical atom order so that swapping the arguments gives the same programs
    order = np.lexsort(U.T[::-1])
    U, s = U[order], (wm - wn)[order]
    if not np.any(np.abs(s) > 0):
        return (0.0, np.zeros((1, mu.dim))) if return_witness else 0.0
    best, wit = -np.inf, None
    for sign in (1.0, -1.0):
        val, Y = _support_program(U, sign * s)
        if val > best:
            best, wit = val, Y
    best = max(best, 0.0)
    return (best, wit) if return_witness else best


def wasserstein1(mu, nu):
    """Exact discrete W_1 with ground cost |x - y| (chordal)."""
    _check_masses(mu, nu)
    a, b = mu.weights, nu.weights
    b = b * (a.sum() / b.sum())
    C = np.linalg.norm(mu.directions[:, None, :] - nu.directions[None, :, :], axis=2)
    m, k = C.shape
    A_rows = sparse.kron(sparse.eye(m), np.ones((1, k)))
    A_cols = sparse.kron(np.ones((1, m)), sparse.eye(k))
    A_eq = sparse.vstack([A_rows, A_cols]).tocsr()
    b_eq = np.concatenate([a, b])
    res = linprog(C.ravel(), A_eq=A_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    if res.status != 0:
        raise RuntimeError(f"transport LP failed: {res.message}")
    return float(max(res.fun, 0.0))
