"""Deficits, radius bounds and perturbation sweeps for Minkowski bodies."""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import GeometryError, InsufficientData, NormalizationRequired
from .measure import (DirectionalMeasure, dual_convex_distance, theta,
                      theta_plus, wasserstein1)
from .polytope import (fraenkel_asymmetry, from_vertices, hausdorff, lp_combination,
                       minkowski_sum, mixed_volume, radii, surface_measure)
from .solvers import solve


@dataclass
class DeficitReport:
    delta_bm: float
    delta_iso_p: float
    alpha: float
    sigma: float
    ratio_bm: float
    ratio_iso: float
    hausdorff_gap_ratio: float
    p: float = 1.0
    delta_lp_bm: float = float("nan")
    lp_gap_bound: float = float("nan")


@dataclass
class SweepRecord:
    epsilon: float
    seed: int
    theta: float
    theta_plus: float
    dc: float
    w1: float
    alpha: float
    hausdorff: float
    main_ratio: float
    midpoint_gap: float = float("nan")
    flagged: bool = False


CSV_FIELDS = ("epsilon", "seed", "theta", "theta_plus", "dc", "w1", "alpha", "hausdorff",
              "main_ratio")


@dataclass
class RadiusBoundReport:
    r: float
    R: float
    theta_s: float
    perimeter: float
    lower_ok: bool
    upper_ok: bool
    slack_lower: float
    slack_upper: float
    constants_used: dict = field(default_factory=dict)
    empirical_lower_constant: float = float("nan")
    empirical_upper_constant: float = float("nan")


def _ratio(num, den):
    """num / den with 0/0 = 0 and x/0 = inf."""
    if den > 0:
        return num / den
    return 0.0 if num <= 0 else float("inf")


def bm_deficit(E, F):
    """|E/2 + F/2|^{1/n} / (|E|^{1/n}/2 + |F|^{1/n}/2) - 1."""
    n = E.dim
    mid = minkowski_sum(E.scaled(0.5), F.scaled(0.5)).volume
    return mid ** (1.0 / n) / (0.5 * E.volume ** (1.0 / n) + 0.5 * F.volume ** (1.0 / n)) - 1.0


def iso_deficit(E, F, p=1.0):
    """V_p(E, F) / (|F|^{p/n} |E|^{(n-p)/n}) - 1."""
    n = E.dim
    return mixed_volume(E, F, p) / (F.volume ** (p / n) * E.volume ** ((n - p) / n)) - 1.0


def wulff_gap(E, F, p=1.0):
    """V_p(E, F) - |E|^{(n-p)/n} |F|^{p/n}."""
    n = E.dim
    return mixed_volume(E, F, p) - E.volume ** ((n - p) / n) * F.volume ** (p / n)


def hausdorff_gap_ratio(E, F, p=1.0):
    """d_H(E, F')^n / (V_p(E, F') - |E|^{(n-p)/n}|F'|^{p/n}).

    F' is F dilated to the volume of E and, for p = 1, translated so the
    centroids agree; the gap alone cannot see translations (p = 1) or a
    common dilation, so the comparison is made on the normalized pair.
    """
    n = E.dim
    Fn = F.scaled((E.volume / F.volume) ** (1.0 / n))
    if p == 1:
        Fn = Fn.translated(E.centroid - Fn.centroid)
    return _ratio(hausdorff(E, Fn) ** n, max(wulff_gap(E, Fn, p), 0.0))


def deficits(E, F, p=1.0):
    """Brunn-Minkowski and (L_p) Wulff deficits of a pair, with the Fraenkel asymmetry.

    Parameters
    ----------
    E, F : Polytope
    p : float
        exponent of the isoperimetric deficit; p > 1 needs h_E > 0 on the
        facet normals of E and h_F >= 0.  The Brunn-Minkowski deficit always
        uses the ordinary Minkowski sum.

    Returns
    -------
    DeficitReport
        for p > 1 also ``delta_lp_bm``, the deficit of |E/2 +_p F/2|^{p/n}
        against (|E|^{p/n} + |F|^{p/n})/2 on the polytopal surrogate, and
        the surrogate's Hausdorff gap bound.
    """
    n = E.dim
    d_bm = bm_deficit(E, F)
    d_iso = iso_deficit(E, F, p)
    alpha = fraenkel_asymmetry(E, F)
    sigma = max(E.volume / F.volume, F.volume / E.volume)
    rep = DeficitReport(
        delta_bm=float(d_bm), delta_iso_p=float(d_iso), alpha=alpha, sigma=float(sigma),
        ratio_bm=_ratio(alpha ** 2, sigma ** (1.0 / n) * max(d_bm, 0.0)),
        ratio_iso=_ratio(alpha ** 2, max(d_iso, 0.0)),
        hausdorff_gap_ratio=float(hausdorff_gap_ratio(E, F, p)), p=float(p))
    if p > 1:
        L = lp_combination(0.5, E, 0.5, F, p)
        rep.delta_lp_bm = float(L.volume ** (p / n)
                                / (0.5 * E.volume ** (p / n) + 0.5 * F.volume ** (p / n)) - 1.0)
        rep.lp_gap_bound = L.approx_gap
    return rep


def lemma_constants(n):
    """(c_n, C_n) of the p = 1 radius bounds: 1/(2 n^{n^{(n-2)/(n-1)}}), (n/2) n^{...}."""
    k = float(n) ** (float(n) ** ((n - 2.0) / (n - 1.0)))
    return 1.0 / (2.0 * k), 0.5 * n * k


def radius_bounds(P, p=1.0):
    """Check the inradius/circumradius bounds in terms of Theta of the (L_p) surface measure.

    Radii are measured about the origin.  p = 1 uses the explicit constants
    of :func:`lemma_constants`; for p > 1 only exponents are known, so the
    bounds are checked with constants 1 and the constants that would make
    them hold are reported.
    """
    n = P.dim
    S = surface_measure(P, p)
    th = theta(S)
    per = P.surface_area
    rr = radii(P)
    r, R = rr.inradius, rr.circumradius
    if p == 1:
        c, C = lemma_constants(n)
        e = (n - 2.0) / (n - 1.0)
        lower = c * th / per ** e
        upper = C * per / th ** e if th > 0 else float("inf")
        consts = {"c": c, "C": C, "lower": "c*Theta/S^((n-2)/(n-1))",
                  "upper": "C*S/Theta^((n-2)/(n-1))", "exponent": e}
        emp_c = r * per ** e / th if th > 0 else float("inf")
        emp_C = R * th ** e / per
    else:
        mass = S.total_mass
        if abs(mass - 1.0) > 1e-9:
            raise NormalizationRequired(f"L_p surface measure has mass {mass:.12g}, expected 1")
        if p == n:
            raise ValueError("p = n is excluded")
        if p < n:
            b_low = (n - 1.0) * n * p / ((p - 1.0) * (n - p))
            b_up = p / (p - 1.0)
        else:
            b_low = p * (n - 1.0) / (p - n)
            b_up = p / (p - n)
        lower = th ** b_low
        upper = th ** (-b_up) if th > 0 else float("inf")
        consts = {"c": 1.0, "C": 1.0, "lower_exponent": b_low, "upper_exponent": b_up}
        emp_c = r / th ** b_low if th > 0 else float("inf")
        emp_C = R * th ** b_up
    return RadiusBoundReport(
        r=r, R=R, theta_s=th, perimeter=per,
        lower_ok=bool(r >= lower - 1e-9), upper_ok=bool(R <= upper + 1e-9),
        slack_lower=float(r - lower), slack_upper=float(upper - R),
        constants_used=consts, empirical_lower_constant=float(emp_c),
        empirical_upper_constant=float(emp_C))


# -- perturbation sweeps -----------------------------------------------------------------


def recenter_weights(directions, weights):
    """Smallest weighted change of the weights that zeroes the barycenter.

    Solves min sum dw_i^2 / w_i subject to sum (w_i + dw_i) u_i = 0, i.e.
    dw = W U (U^T W U)^{-1} (-b).  Returns None when a weight would turn
    nonpositive.
    """
    U = np.asarray(directions, float)
    w = np.asarray(weights, float)
    for _ in range(2):
        b = U.T @ w
        G = (U * w[:, None]).T @ U
        dw = w * (U @ np.linalg.solve(G, -b))
        w = w + dw
    if np.any(w <= 0):
        return None
    return w


def perturb(base, epsilon, rng, p=1.0):
    """Multiplicative weight noise in [1 - eps, 1 + eps], recentered for p = 1, unit mass."""
    w = base.weights * rng.uniform(1.0 - epsilon, 1.0 + epsilon, size=len(base))
    if p == 1:
        w = recenter_weights(base.directions, w)
        if w is None:
            return None
    return DirectionalMeasure(base.directions, w / w.sum())


def _dispersion(mu, p):
    return theta(mu) if p == 1 else theta_plus(mu)


def _record(task):
    base, body, p, eps, i_eps, i_seed, vartheta, master = task
    n = base.dim
    rng = np.random.default_rng([master, i_eps, i_seed])
    nu = perturb(base, eps, rng, p)
    nan = float("nan")
    if nu is None:
        return SweepRecord(eps, i_seed, nan, nan, nan, nan, nan, nan, nan, flagged=True)
    th, thp = theta(nu), theta_plus(nu)
    flagged = (th if p == 1 else thp) < vartheta
    try:
        other = solve(nu, p).body
    except GeometryError:
        return SweepRecord(eps, i_seed, th, thp, nan, nan, nan, nan, nan, flagged=True)
    dc = dual_convex_distance(base, nu)
    w1 = wasserstein1(base, nu)
    alpha = fraenkel_asymmetry(body, other)
    dh = hausdorff(body, other)
    ratio = _ratio(alpha ** 2, dc ** (1.0 + 1.0 / n))
    gap = bm_deficit(body, other)
    return SweepRecord(float(eps), int(i_seed), th, thp, dc, w1, alpha, dh, ratio,
                       midpoint_gap=float(gap), flagged=bool(flagged))


def resolve_jobs(jobs=None):
    env = os.environ.get("MINKOLAB_JOBS")
    if env:
        jobs = int(env)
    return max(1, int(jobs or 1))


def _map(fn, tasks, jobs):
    jobs = resolve_jobs(jobs)
    if jobs == 1 or len(tasks) < 2:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))


def stability_sweep(base, p, epsilons, seeds_per_eps, vartheta=0.0, master_seed=0, jobs=None):
    """Perturb ``base``, solve both measures and record distances and asymmetry.

    Each (epsilon, seed) record uses its own generator seeded with
    (master_seed, epsilon index, seed index), so records do not depend on
    evaluation order.  Records whose perturbed measure has dispersion
    below ``vartheta`` (Theta for p = 1, Theta_+ otherwise) or whose solve
    fails are flagged.
    """
    base = base.normalized()
    if _dispersion(base, p) < vartheta:
        raise ValueError("base measure violates the dispersion floor")
    body = solve(base, p).body
    tasks = [(base, body, float(p), float(eps), i, s, float(vartheta), int(master_seed))
             for i, eps in enumerate(epsilons) for s in range(int(seeds_per_eps))]
    return _map(_record, tasks, jobs)


def exponent_fit(records):
    """Least-squares slope of log alpha against log d_c.

    Uses unflagged records with d_c > 0 and alpha > 0, aggregated by the
    median of the logs per epsilon when there are at least two epsilon
    levels.  Returns (slope, intercept, r2).
    """
    ok = [r for r in records if not r.flagged and r.dc > 0 and r.alpha > 0
          and np.isfinite(r.dc) and np.isfinite(r.alpha)]
    if len(ok) < 8:
        raise InsufficientData(f"need at least 8 usable records, got {len(ok)}")
    x = np.log([r.dc for r in ok])
    y = np.log([r.alpha for r in ok])
    eps = np.array([r.epsilon for r in ok])
    levels = np.unique(eps)
    if len(levels) >= 2:
        x = np.array([np.median(x[eps == e]) for e in levels])
        y = np.array([np.median(y[eps == e]) for e in levels])
    slope, intercept = np.polyfit(x, y, 1)
    fit = slope * x + intercept
    ss = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - float(((y - fit) ** 2).sum()) / ss if ss > 0 else 1.0
    return float(slope), float(intercept), float(r2)


def regular_measure(m, dim=2, weight=None):
    """Surface measure of the regular m-gon with unit edges (or equal ``weight``)."""
    ang = 2 * np.pi * np.arange(m) / m
    U = np.column_stack([np.cos(ang), np.sin(ang)])
    return DirectionalMeasure(U, np.full(m, 1.0 if weight is None else weight))


def elongated_hexagon(aspect):
    """Hexagon with vertices (cos(k pi/3), sin(k pi/3)/aspect)."""
    k = np.arange(6)
    return from_vertices(np.column_stack([np.cos(k * np.pi / 3), np.sin(k * np.pi / 3) / aspect]))


DEGENERACY_FACTORS = np.array([1.02, 0.99, 1.01, 0.98, 1.015, 0.985])


def degeneracy_sweep(aspect_ratios, factors=None):
    """Theta and the constant alpha^2 / d_c^{1+1/n} along hexagons collapsing to a segment.

    Every hexagon's surface measure is normalized to unit mass and perturbed
    by the same multiplicative factors (recentered), so the only thing that
    changes along the family is the aspect ratio.
    """
    f = DEGENERACY_FACTORS if factors is None else np.asarray(factors, float)
    out = []
    for a in aspect_ratios:
        mu = surface_measure(elongated_hexagon(float(a))).normalized()
        order = np.argsort(np.arctan2(mu.directions[:, 1], mu.directions[:, 0]))
        mu = DirectionalMeasure(mu.directions[order], mu.weights[order])
        w = recenter_weights(mu.directions, mu.weights * f)
        nu = DirectionalMeasure(mu.directions, w / w.sum())
        E, F = solve(mu).body, solve(nu).body
        dc = dual_convex_distance(mu, nu)
        alpha = fraenkel_asymmetry(E, F)
        out.append(SweepRecord(
            epsilon=float(a), seed=0, theta=theta(mu), theta_plus=theta_plus(mu), dc=dc,
            w1=wasserstein1(mu, nu), alpha=alpha, hausdorff=hausdorff(E, F),
            main_ratio=_ratio(alpha ** 2, dc ** 1.5), midpoint_gap=bm_deficit(E, F)))
    return out
