"""Discrete (L_p) Minkowski problems.

Given atoms (u_i, w_i) the solver looks for offsets h with

    h_i^{1-p} * area_i(P(h)) = w_i,      P(h) = {x : u_i . x <= h_i}.

It minimizes the convex function

    G(h) = (1/p) sum_i w_i h_i^p - log |P(h)|

whose stationary points satisfy w_i h_i^{p-1} = area_i / |P|; one dilation
then matches the weights exactly.  G decreases along Newton steps built from
the exact volume Hessian.  After every step the offsets are pulled back to
the slice sum_i w_i h_i^p = n, where G reduces (up to a constant) to the
dilation-invariant merit (n/p) log sum_i w_i h_i^p - log |P(h)|.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (DegenerateMeasure, EmptyBody, ExcludedExponent,
                     HemisphereConcentration, NoConvergence, UnboundedBody)
from .measure import (ANGULAR_TOL, SignedMeasure, _merge_close,
                      barycenter, theta, theta_plus)
from .polytope import Polytope, from_halfspaces, surface_measure

BARYCENTER_TOL = 1e-8


class SupportVector:
    """Support-function values on a finite set of distinct unit directions."""

    __slots__ = ("directions", "values")

    def __init__(self, directions, values):
        U = np.atleast_2d(np.asarray(directions, dtype=float))
        v = np.asarray(values, dtype=float).ravel()
        if len(U) != len(v):
            raise ValueError("directions and values differ in length")
        nrm = np.linalg.norm(U, axis=1)
        if np.any(np.abs(nrm - 1.0) > 1e-12):
            U = U / nrm[:, None]
        if len(U) > 1 and len(_merge_close(U, np.ones(len(U)), ANGULAR_TOL)[1]) != len(U):
            raise ValueError("support directions must be pairwise distinct")
        U.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "directions", U)
        object.__setattr__(self, "values", v)

    def __setattr__(self, name, value):
        raise AttributeError("SupportVector is immutable")

    @property
    def dim(self):
        return self.directions.shape[1]

    def __len__(self):
        return len(self.values)

    def scaled(self, factor):
        return SupportVector(self.directions, self.values * factor)

    @classmethod
    def of(cls, body, directions):
        """Support values of ``body`` on ``directions``."""
        U = np.asarray(directions, dtype=float)
        return cls(U, body.support(U))

    def at(self, directions):
        """Values at ``directions``, which must all belong to the set."""
        U = np.atleast_2d(directions)
        dots = U @ self.directions.T
        idx = dots.argmax(axis=1)
        if np.any(dots[np.arange(len(U)), idx] < 1.0 - 1e-12):
            raise ValueError("support vector is not defined on every requested direction")
        return self.values[idx]

    def __repr__(self):
        return f"SupportVector(dim={self.dim}, entries={len(self)})"


@dataclass(frozen=True)
class SolveOptions:
    tolerance: float = 1e-8
    max_iterations: int = 500
    damping: float = 0.5
    initialization: object = "unit_offsets"

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if not 0 < self.damping <= 1:
            raise ValueError("damping must lie in (0, 1]")
        if not (self.initialization == "unit_offsets"
                or isinstance(self.initialization, SupportVector)):
            raise ValueError("initialization must be 'unit_offsets' or a SupportVector")


@dataclass
class SolveReport:
    body: Polytope
    lam: float
    residual: float
    iterations: int
    centered: bool
    p: float = 1.0
    energy_trace: list = field(default_factory=list)

    @property
    def lambda_(self):
        return self.lam

    def to_dict(self):
        from .io import polytope_to_dict
        return {"body": polytope_to_dict(self.body), "lambda": self.lam,
                "residual": self.residual, "iterations": self.iterations,
                "centered": self.centered, "p": self.p,
                "energy_trace": list(self.energy_trace)}


def body_from_support(phi):
    """E_phi = {x : x . u <= phi(u) for every stored direction u}."""
    return from_halfspaces(phi.directions, phi.values)


def _facet_index(body, U):
    """Atom index of every facet of ``body`` (facets are a subset of the atoms)."""
    dots = body.normals @ U.T
    idx = dots.argmax(axis=1)
    if np.any(dots[np.arange(len(idx)), idx] < 1.0 - 1e-9):
        raise RuntimeError("facet normal does not match any atom direction")
    return idx


def volume_derivatives(body, U):
    """Facet areas and the Hessian of the volume, indexed by the rows of ``U``.

    d area_i / d h_j = L_ij / sin(angle_ij) for facets sharing a ridge of
    (n-2)-measure L_ij (L = 1 in the plane); the diagonal is
    -sum_j L_ij cot(angle_ij).
    """
    m = len(U)
    idx = _facet_index(body, U)
    A = np.zeros(m)
    A[idx] = body.facet_areas
    M = np.zeros((m, m))
    pairs = zip(body.ridge_pairs[:, 0], body.ridge_pairs[:, 1], body.ridge_sizes)
    for f, g, L in pairs:
        i, j = idx[f], idx[g]
        c = float(U[i] @ U[j])
        s = float(np.linalg.norm(np.cross(U[i], U[j]))) if body.dim == 3 else abs(
            U[i, 0] * U[j, 1] - U[i, 1] * U[j, 0])
        if s < 1e-14 or L <= 0:
            continue
        M[i, j] += L / s
        M[j, i] += L / s
        M[i, i] -= L * c / s
        M[j, j] -= L * c / s
    return A, M


def _check_lp_measure(mu, p):
    n = mu.dim
    if p < 1:
        raise ValueError("p must be >= 1")
    if p == n:
        raise ExcludedExponent(f"p = n = {n} is excluded")
    mass = mu.total_mass
    if p == 1:
        b = barycenter(mu)
        if np.linalg.norm(b) > BARYCENTER_TOL:
            raise DegenerateMeasure(f"barycenter has norm {np.linalg.norm(b):.3e} > 1e-8")
        if theta(mu) <= 1e-12 * mass:
            raise DegenerateMeasure("measure is supported on a hyperplane (Theta = 0)")
    elif theta_plus(mu) <= 1e-12 * mass:
        raise HemisphereConcentration("measure is concentrated on a closed hemisphere")


def _build(U, h, hint):
    try:
        return from_halfspaces(U, h, interior=hint)
    except (EmptyBody, UnboundedBody):
        return None


class _State:
    """Offsets on the slice sum w h^p = n together with their body."""

    def __init__(self, U, w, p, h, body):
        n = U.shape[1]
        h = np.maximum(h, 0.0) if p > 1 else h
        # clamp redundant offsets down to the support value (never raises the merit)
        h = np.minimum(h, body.support(U))
        S = float(w @ np.abs(h) ** p)
        t = (n / S) ** (1.0 / p)
        self.h = h * t
        self.body = body.scaled(t)
        self.V = self.body.volume
        self.merit = (n / p) * np.log(S) - np.log(body.volume) if p != 0 else 0.0


def _residual(state, U, w, p):
    A, _ = state.body.facet_areas, None
    idx = _facet_index(state.body, U)
    areas = np.zeros(len(U))
    areas[idx] = A
    meas = state.h ** (1.0 - p) * areas if p != 1 else areas
    c = w.sum() / meas.sum()
    return float(np.max(np.abs(c * meas - w) / w)), areas


def _solve(mu, p, opts):
    opts = opts or SolveOptions()
    _check_lp_measure(mu, p)
    U, w = mu.directions, mu.weights
    m, n = U.shape
    if isinstance(opts.initialization, SupportVector):
        phi = opts.initialization
        try:
            h0 = phi.at(U)
        except ValueError:
            h0 = body_from_support(phi).support(U)
    else:
        h0 = np.ones(m)
    if p > 1 and np.any(h0 <= 0):
        raise ValueError("L_p initialization needs positive offsets")
    body = _build(U, h0, None)
    if body is None:
        raise UnboundedBody("initial offsets do not define a bounded body")
    if p == 1:
        body0 = body
        h0 = h0 - U @ body0.centroid
        body = body0.translated(-body0.centroid)
    st = _State(U, w, p, h0, body)

    volumes = [st.V]
    step = opts.damping
    iterations = 0
    target = min(opts.tolerance, 1e-9) * 1e-2
    res, areas = _residual(st, U, w, p)
    stalled = False
    stagnant = 0
    while res > target and iterations < opts.max_iterations:
        iterations += 1
        h, V = st.h, st.V
        A, M = volume_derivatives(st.body, U)
        g = w * h ** (p - 1) - A / V
        H = -M / V + np.outer(A, A) / V ** 2
        if p > 1:
            H[np.diag_indices(m)] += (p - 1) * w * h ** (p - 2)
        diag = np.abs(np.diag(H))
        scale = float(np.median(diag[A > 0])) if np.any(A > 0) else 1.0
        inactive = A <= 1e-13 * A.sum()
        H[inactive, inactive] += scale
        if p == 1:
            # translations are a null direction of G
            H = H + scale * (U @ U.T)
        try:
            d = np.linalg.solve(H, -g)
        except np.linalg.LinAlgError:
            d = np.linalg.lstsq(H, -g, rcond=None)[0]
        slope = float(g @ d)
        if not np.isfinite(slope) or slope >= 0:
            d = -g
            slope = float(g @ d)
        amax = 1.0
        if p > 1:
            neg = d < 0
            if np.any(neg):
                amax = min(1.0, 0.99 * float(np.min(-h[neg] / d[neg])))
        a = min(step, amax)
        accepted = None
        for _ in range(60):
            trial_h = h + a * d
            trial = _build(U, trial_h, st.body.interior_point)
            if trial is not None:
                if p == 1:
                    trial_h = trial_h - U @ trial.centroid
                    trial = trial.translated(-trial.centroid)
                cand = _State(U, w, p, trial_h, trial)
                if cand.merit <= st.merit + 1e-4 * a * slope:
                    accepted = cand
                    break
                # merit differences at rounding level: let the residual decide
                if abs(cand.merit - st.merit) <= 1e-13 * max(1.0, abs(st.merit)):
                    cres, careas = _residual(cand, U, w, p)
                    if cres < res:
                        accepted = cand
                        break
            a *= 0.5
        if accepted is None:
            stalled = True
            break
        st = accepted
        volumes.append(st.V)
        step = min(1.0, 2.0 * a)
        prev_res = res
        res, areas = _residual(st, U, w, p)
        if res <= opts.tolerance and res >= 0.5 * prev_res:
            stagnant += 1
            if stagnant >= 3:
                break
        else:
            stagnant = 0

    # dilate so the (L_p) measure matches the weights: S_{tK,p} = t^{n-p} S_{K,p}
    meas = st.h ** (1.0 - p) * areas if p != 1 else areas
    t = (w.sum() / meas.sum()) ** (1.0 / (n - p))
    body = st.body.scaled(t)
    if p == 1:
        body = body.translated(-body.centroid)
    final = surface_measure(body, p)
    idx = _facet_index(body, U)
    got = np.zeros(m)
    got[idx] = final.weights
    residual = float(np.max(np.abs(got - w) / w))
    lam = float(w @ body.support(U) ** p) / body.volume ** (p / n)
    lam_final = n * body.volume ** ((n - p) / n)
    trace = [lam_final * v ** (p / n) - n for v in volumes]
    report = SolveReport(body=body, lam=lam, residual=residual, iterations=iterations,
                         centered=(p == 1), p=float(p), energy_trace=trace)
    if residual > opts.tolerance or not np.isfinite(residual):
        missing = np.flatnonzero(got <= 0)
        atom = int(missing[0]) if len(missing) else None
        why = "line search stalled" if stalled else "iteration limit reached"
        raise NoConvergence(f"{why}; residual {residual:.3e} > {opts.tolerance:.1e}",
                            report=report, atom=atom)
    return report


def solve_minkowski(mu, opts=None):
    """Centered polytope whose surface area measure is ``mu``.

    Raises
    ------
    DegenerateMeasure
        barycenter of ``mu`` is not zero (1e-8) or Theta(mu) = 0
    NoConvergence
        residual above tolerance; the best iterate is attached as ``report``
    """
    return _solve(mu, 1.0, opts)


def solve_minkowski_lp(mu, p, opts=None):
    """Polytope whose L_p surface area measure is ``mu`` (1 < p, p != n)."""
    if p <= 1:
        raise ValueError("solve_minkowski_lp needs p > 1; use solve_minkowski")
    return _solve(mu, float(p), opts)


def solve(mu, p=1.0, opts=None):
    return solve_minkowski(mu, opts) if p == 1 else solve_minkowski_lp(mu, p, opts)


_LAMBDA_CACHE = {}


def lambda_constant(mu, p=1.0, opts=None):
    """lambda_{mu,p} = n |E_{mu,p}|^{(n-p)/n}."""
    key = (mu.key(), float(p))
    if key not in _LAMBDA_CACHE:
        rep = solve(mu, p, opts)
        n = mu.dim
        _LAMBDA_CACHE[key] = n * rep.body.volume ** ((n - p) / n)
    return _LAMBDA_CACHE[key]


def energy(mu, phi, p=1.0, lam=None):
    """lambda |E_phi|^{p/n} - sum_i w_i phi(u_i)^p; at most 0, zero at the solution."""
    n = mu.dim
    if p == n:
        raise ExcludedExponent(f"p = n = {n} is excluded")
    if lam is None:
        lam = lambda_constant(mu, p)
    vals = phi.at(mu.directions)
    if p > 1 and np.any(vals < 0):
        raise ValueError("L_p energy needs nonnegative support values")
    body = body_from_support(phi)
    return float(lam * body.volume ** (p / n) - mu.weights @ vals ** p)


def energy_gradient(mu, phi, lam=None):
    """First variation of the p = 1 energy, as a signed measure on phi's directions.

    lambda S_{E_phi} / (n |E_phi|^{(n-1)/n}) - mu.
    """
    n = mu.dim
    if lam is None:
        lam = lambda_constant(mu, 1.0)
    body = body_from_support(phi)
    U = phi.directions
    A = np.zeros(len(U))
    A[_facet_index(body, U)] = body.facet_areas
    dots = mu.directions @ U.T
    j = dots.argmax(axis=1)
    if np.any(dots[np.arange(len(j)), j] < 1.0 - 1e-12):
        raise ValueError("support vector must contain every atom direction of mu")
    wm = np.zeros(len(U))
    np.add.at(wm, j, mu.weights)
    return SignedMeasure(U.copy(), lam * A / (n * body.volume ** ((n - 1) / n)) - wm)
