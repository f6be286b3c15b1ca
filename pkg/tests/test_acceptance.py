"""Acceptance gate: one pass/fail line per criterion, printed even under capture."""
import subprocess
import sys
import time

import numpy as np
import pytest

from conftest import random_body, random_centered_measure, random_polygon, random_polyhedron
from oracles import circular_segment
from minkolab.measure import DirectionalMeasure, dual_convex_distance, theta, wasserstein1
from minkolab.polytope import (box, fraenkel_asymmetry, from_halfspaces, minkowski_sum,
                               regular_polygon, surface_measure)
from minkolab.solvers import solve
from minkolab.stability import (bm_deficit, degeneracy_sweep, deficits, exponent_fit,
                                iso_deficit, lemma_constants, radius_bounds, regular_measure,
                                stability_sweep, wulff_gap)

I2 = np.eye(2)
SQUARE_DIRS = np.vstack([I2, -I2])


@pytest.fixture
def gate(capsys):
    def report(label, checks):
        """checks: list of (description, ok)."""
        ok = all(c for _, c in checks)
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] {label}")
            for text, c in checks:
                print(f"    {'ok ' if c else 'BAD'} {text}")
        failed = [t for t, c in checks if not c]
        assert ok, f"{label}: " + "; ".join(failed)
    return report


def atom_residual(body, mu, p):
    S = surface_measure(body, p)
    got = np.array([S.weights[np.argmax(S.directions @ u)] for u in mu.directions])
    return float(np.max(np.abs(got - mu.weights) / mu.weights))


def test_criterion_01_round_trip(gate):
    rng = np.random.default_rng(2024)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(50):
        mu = random_centered_measure(rng, 2, m=int(rng.integers(4, 13)), min_theta=0.3)
        rep = solve(mu)
        worst = max(worst, atom_residual(rep.body, mu, 1.0))
    dt = time.perf_counter() - t0
    gate("C1 solver round trip, p=1, n=2, 50 measures",
         [(f"max atomwise residual {worst:.2e} <= 1e-6", worst <= 1e-6),
          (f"runtime {dt:.2f} s < 10 s", dt < 10)])


def test_criterion_02_square_oracles(gate):
    mu = DirectionalMeasure(SQUARE_DIRS, np.ones(4))
    corners = np.array([[s, t] for s in (-1, 1) for t in (-1, 1)], float)

    def vertex_error(body, half):
        V = body.vertices
        return max(np.linalg.norm(V - c * half, axis=1).min() for c in corners)

    e1 = vertex_error(solve(mu).body, 0.5)
    e3 = vertex_error(solve(mu, 3.0).body, 2.0)
    gate("C2 square oracles",
         [(f"p=1 -> [-1/2,1/2]^2, vertex error {e1:.2e} <= 1e-8", e1 <= 1e-8),
          (f"p=3 -> [-2,2]^2, vertex error {e3:.2e} <= 1e-6", e3 <= 1e-6)])


def test_criterion_03_lambda_identity(gate):
    rng = np.random.default_rng(3)
    worst, count = 0.0, 0
    for dim, ps in ((2, (1.0, 1.5, 3.0)), (3, (1.0, 2.0, 4.0))):
        for p in ps:
            for _ in range(5):
                mu = random_centered_measure(rng, dim, m=int(rng.integers(5, 11)))
                rep = solve(mu, p)
                worst = max(worst, abs(rep.lam - dim * rep.body.volume ** ((dim - p) / dim)))
                count += 1
    gate("C3 lambda identity",
         [(f"max |lambda - n|E|^((n-p)/n)| = {worst:.2e} <= 1e-6 over {count} solves",
           worst <= 1e-6)])


def test_criterion_04_first_variation(gate):
    rng = np.random.default_rng(4)
    step = 1e-5
    checks = []
    for dim in (2, 3):
        worst = 0.0
        for _ in range(20):
            P = random_body(rng, dim)
            for i in range(len(P.normals)):
                hp, hm = P.offsets.copy(), P.offsets.copy()
                hp[i] += step
                hm[i] -= step
                d = (from_halfspaces(P.normals, hp).volume
                     - from_halfspaces(P.normals, hm).volume) / (2 * step)
                worst = max(worst, abs(d - P.facet_areas[i]) / P.facet_areas[i])
        checks.append((f"n={dim}: max relative error {worst:.2e} <= 1e-4 (20 bodies, "
                       "every offset)", worst <= 1e-4))
    gate("C4 first variation of volume", checks)


def test_criterion_05_inequalities(gate):
    rng = np.random.default_rng(5)
    checks = []
    for dim, ps in ((2, (1.0, 1.5, 3.0)), (3, (1.0, 2.0, 4.0))):
        bm, iso, gap = np.inf, np.inf, np.inf
        for _ in range(200):
            E, F = random_body(rng, dim).centered(), random_body(rng, dim).centered()
            bm = min(bm, bm_deficit(E, F))
            gap = min(gap, wulff_gap(E, F))
            iso = min(iso, min(iso_deficit(E, F, p) for p in ps))
        checks += [(f"n={dim}: min delta_BM {bm:.2e} >= -1e-10 (200 pairs)", bm >= -1e-10),
                   (f"n={dim}: min delta_ISO,p {iso:.2e} >= -1e-10, p in {ps}", iso >= -1e-10),
                   (f"n={dim}: min Diskant V1 gap {gap:.2e} >= -1e-10", gap >= -1e-10)]
        worst_def, worst_alpha = 0.0, 0.0
        for _ in range(10):
            E = random_body(rng, dim).centered()
            lam = rng.uniform(0.3, 3.0)
            F = E.scaled(lam).translated(rng.standard_normal(dim))
            rep = deficits(E, F)
            worst_def = max(worst_def, rep.delta_bm, max(iso_deficit(E, E.scaled(lam), p)
                                                         for p in ps))
            worst_alpha = max(worst_alpha, rep.alpha)
        checks += [(f"n={dim}: homothetic deficits max {worst_def:.2e} <= 1e-9",
                    worst_def <= 1e-9),
                   (f"n={dim}: homothetic alpha max {worst_alpha:.2e} <= 1e-4",
                    worst_alpha <= 1e-4)]
    gate("C5 inequality suite", checks)


def test_criterion_06_dc_oracles(gate):
    e1 = np.array([[1.0, 0.0]])
    v1 = dual_convex_distance(DirectionalMeasure(e1, [1.0]), DirectionalMeasure(-e1, [1.0]))
    mu = DirectionalMeasure(SQUARE_DIRS, np.ones(4))
    nu = DirectionalMeasure(SQUARE_DIRS, [1.1, 1.0, 0.9, 1.0])
    v2 = dual_convex_distance(mu, nu)
    rng = np.random.default_rng(6)

    def rand(dim, m=None):
        k = m or int(rng.integers(3, 9))
        return DirectionalMeasure(rng.standard_normal((k, dim)), rng.uniform(0.2, 1.0, k))

    worst_w1 = -np.inf
    for i in range(100):
        dim = 2 if i < 50 else 3
        a, b = rand(dim), rand(dim)
        b = b.scaled(a.total_mass / b.total_mass)
        worst_w1 = max(worst_w1, dual_convex_distance(a, b) - wasserstein1(a, b))
    worst_tri = -np.inf
    for i in range(100):
        dim = 2 if i < 50 else 3
        a, b, c = rand(dim), rand(dim), rand(dim)
        b, c = b.scaled(a.total_mass / b.total_mass), c.scaled(a.total_mass / c.total_mass)
        viol = (dual_convex_distance(a, b) - dual_convex_distance(a, c)
                - dual_convex_distance(c, b))
        worst_tri = max(worst_tri, viol)
    gate("C6 dual-convex distance oracles",
         [(f"d_c(delta_e1, delta_-e1) = {v1:.9f}, expected 2 +- 1e-6", abs(v1 - 2) <= 1e-6),
          (f"0.1 weight-shift square pair = {v2:.9f}, expected 0.1 +- 1e-6",
           abs(v2 - 0.1) <= 1e-6),
          (f"max d_c - W1 = {worst_w1:.2e} <= 1e-8 (100 pairs)", worst_w1 <= 1e-8),
          (f"max triangle violation {worst_tri:.2e} <= 1e-8 (100 triples)", worst_tri <= 1e-8)])


def test_criterion_07_fraenkel(gate):
    S = box([-0.5, -0.5], [0.5, 0.5])
    m = 64
    B = regular_polygon(m, np.sqrt(2 / (m * np.sin(2 * np.pi / m))))
    a = fraenkel_asymmetry(S, B)
    ref = 8 * circular_segment(1 / np.sqrt(np.pi), 0.5)
    gate("C7 Fraenkel asymmetry, unit square vs area-1 64-gon",
         [(f"alpha = {a:.6f}, expected 0.1812 +- 0.005 (true disk {ref:.6f})",
           abs(a - 0.1812) <= 0.005)])


def test_criterion_08_radius_bounds(gate):
    rng = np.random.default_rng(8)
    sq = radius_bounds(box([-0.5, -0.5], [0.5, 0.5]))
    low_fail, up_fail, worst_low = 0, 0, np.inf
    for _ in range(100):
        P = random_polygon(rng).centered()
        rep = radius_bounds(P)
        worst_low = min(worst_low, rep.empirical_lower_constant)
        low_fail += not (rep.r >= rep.theta_s / 4 - 1e-9)
        up_fail += not (rep.R <= 2 * rep.perimeter + 1e-9)
    c3, C3 = lemma_constants(3)
    fail3 = 0
    for _ in range(50):
        rep = radius_bounds(random_polyhedron(rng).centered())
        fail3 += not (rep.lower_ok and rep.upper_ok)
    gate("C8 radius bounds",
         [(f"n=2: r >= Theta/4 failed on {low_fail}/100 centered polygons "
           f"(smallest r/Theta = {worst_low:.4f})", low_fail == 0),
          (f"n=2: square r - Theta/4 = {sq.slack_lower:.1e}, equality within 1e-9",
           abs(sq.slack_lower) <= 1e-9),
          (f"n=2: R <= 2 S(K) failed on {up_fail}/100", up_fail == 0),
          (f"n=3: c3 = {c3:.4f} (0.0746), C3 = {C3:.2f} (10.06)",
           abs(c3 - 0.0746) <= 1e-4 and abs(C3 - 10.06) <= 1e-2),
          (f"n=3: bounds failed on {fail3}/50 centered polyhedra", fail3 == 0)])


def _sweep_checks(p):
    t0 = time.perf_counter()
    eps = [1e-1, 1e-2, 1e-3, 1e-4]
    recs = stability_sweep(regular_measure(8), p, eps, 20, jobs=1)
    dt = time.perf_counter() - t0
    slope, _, r2 = exponent_fit(recs)
    good = [r for r in recs if not r.flagged]
    mx = {e: max(r.main_ratio for r in good if r.epsilon == e) for e in eps}
    finite = all(np.isfinite(v) for v in mx.values())
    spread = max(mx[1e-3], mx[1e-4]) / min(mx[1e-3], mx[1e-4])
    w1ok = all(r.dc <= r.w1 + 1e-8 for r in good)
    return [(f"p={p}: slope {slope:.3f} >= 0.70 (r2 {r2:.3f})", slope >= 0.70),
            (f"p={p}: max ratio per eps " + ", ".join(f"{e:g}:{v:.3g}" for e, v in mx.items())
             + " finite", finite),
            (f"p={p}: max ratio spread between eps 1e-3 and 1e-4 is {spread:.2f}x < 10x",
             spread < 10),
            (f"p={p}: {len(good)}/80 records usable, d_c <= W1 on all", len(good) == 80 and w1ok),
            (f"p={p}: runtime {dt:.1f} s < 120 s", dt < 120)]


def test_criterion_09_stability_sweeps(gate):
    gate("C9 stability sweeps on the regular octagon (p=1 and p=1.5)",
         _sweep_checks(1.0) + _sweep_checks(1.5))


def test_criterion_10_degeneracy(gate):
    recs = degeneracy_sweep([1, 2, 4, 8, 16])
    th = [r.theta for r in recs]
    cs = [r.main_ratio for r in recs]
    gate("C10 degeneracy sweep over aspect ratios 1, 2, 4, 8, 16",
         [("Theta " + ", ".join(f"{v:.4f}" for v in th) + " strictly decreasing",
           bool(np.all(np.diff(th) < 0))),
          ("constant " + ", ".join(f"{v:.4f}" for v in cs) + " strictly increasing",
           bool(np.all(np.diff(cs) > 0)))])


def test_criterion_11_determinism(gate, tmp_path):
    from minkolab import io
    base = tmp_path / "oct.json"
    io.save_measure(regular_measure(8), base)
    sq = tmp_path / "sq.json"
    io.save_measure(DirectionalMeasure(SQUARE_DIRS, np.ones(4)), sq)
    runs = {"sweep": ["sweep", "--base", str(base), "--eps", "1e-1,1e-2", "--seeds", "4"],
            "solve": ["solve", "--measure", str(sq), "--p", "3"],
            "degeneracy": ["degeneracy", "--aspects", "1,4"]}
    checks = []
    for name, args in runs.items():
        outs = []
        for k in range(2):
            target = tmp_path / f"{name}{k}.out"
            subprocess.run([sys.executable, "-m", "minkolab", *args, "--out", str(target)],
                           check=True, capture_output=True)
            outs.append(target.read_bytes())
        checks.append((f"{name}: two runs byte-identical ({len(outs[0])} bytes)",
                       outs[0] == outs[1]))
    gate("C11 determinism of CLI outputs", checks)
