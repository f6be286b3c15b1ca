"""Command-line entry point: ``minkolab <command> ...``.

Exit status is 0 on success, 2 on domain errors (the error class name is
printed on stderr) and 1 on I/O errors.
"""
from __future__ import annotations

import argparse
import dataclasses
import sys
from dataclasses import dataclass, field

from . import io
from .errors import ExcludedExponent, GeometryError, InsufficientData
from .measure import dual_convex_distance, wasserstein1
from .polytope import fraenkel_asymmetry
from .solvers import SolveOptions, solve
from .stability import degeneracy_sweep, deficits, exponent_fit, radius_bounds, stability_sweep

COMMANDS = ("solve", "distance", "asymmetry", "deficits", "radii", "sweep", "degeneracy")


@dataclass
class RunConfig:
    command: str
    inputs: list = field(default_factory=list)
    p: float = 1.0
    tolerance: float = 1e-8
    seed: int = 0
    output: str | None = None
    format: str = "json"
    max_iterations: int = 500
    body_output: str | None = None
    epsilons: list = field(default_factory=lambda: [1e-1, 1e-2, 1e-3, 1e-4])
    seeds: int = 20
    vartheta: float = 0.0
    aspects: list = field(default_factory=lambda: [1, 2, 4, 8, 16])
    jobs: int = 1

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        if self.format not in ("json", "csv"):
            raise ValueError("format must be json or csv")
        if self.p < 1:
            raise ValueError("p must be >= 1")


def _emit(text, path):
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _floats(text):
    return [float(t) for t in text.split(",") if t.strip()]


def _run(cfg):
    cmd = cfg.command
    if cmd == "solve":
        mu = io.load_measure(cfg.inputs[0])
        if cfg.p == mu.dim:
            raise ExcludedExponent(f"p = n = {mu.dim} is excluded")
        opts = SolveOptions(tolerance=cfg.tolerance, max_iterations=cfg.max_iterations)
        rep = solve(mu, cfg.p, opts)
        if cfg.body_output:
            io.save_polytope(rep.body, cfg.body_output)
        if cfg.output:
            io.write_json(rep.to_dict(), cfg.output)
            print(f"residual={io.format_float(rep.residual)} lambda={io.format_float(rep.lam)} "
                  f"iterations={rep.iterations}")
        else:
            sys.stdout.write(io.dumps(rep.to_dict()))
    elif cmd == "distance":
        a, b = (io.load_measure(x) for x in cfg.inputs[:2])
        dc, w1 = dual_convex_distance(a, b), wasserstein1(a, b)
        line = f"dc={io.format_float(dc)} w1={io.format_float(w1)}\n"
        if cfg.output:
            io.write_json({"dc": dc, "w1": w1}, cfg.output)
        sys.stdout.write(line)
    elif cmd == "asymmetry":
        P, Q = (io.load_polytope(x) for x in cfg.inputs[:2])
        alpha = fraenkel_asymmetry(P, Q, rng_seed=cfg.seed)
        if cfg.output:
            io.write_json({"alpha": alpha}, cfg.output)
        sys.stdout.write(f"alpha={io.format_float(alpha)}\n")
    elif cmd == "deficits":
        P, Q = (io.load_polytope(x) for x in cfg.inputs[:2])
        _emit(io.dumps(deficits(P, Q, cfg.p)), cfg.output)
    elif cmd == "radii":
        P = io.load_polytope(cfg.inputs[0])
        _emit(io.dumps(radius_bounds(P, cfg.p)), cfg.output)
    elif cmd == "sweep":
        base = io.load_measure(cfg.inputs[0])
        recs = stability_sweep(base, cfg.p, cfg.epsilons, cfg.seeds, cfg.vartheta,
                               master_seed=cfg.seed, jobs=cfg.jobs)
        text = (io.records_to_csv(recs) if cfg.format == "csv"
                else io.dumps([dataclasses.asdict(r) for r in recs]))
        _emit(text, cfg.output)
        try:
            slope, intercept, r2 = exponent_fit(recs)
            fit = (f"slope={io.format_float(slope)} intercept={io.format_float(intercept)} "
                   f"r2={io.format_float(r2)}\n")
        except InsufficientData as exc:
            # the records are still valid output; only the summary is skipped
            fit = f"fit skipped: {exc}\n"
        (sys.stdout if cfg.output else sys.stderr).write(fit)
    elif cmd == "degeneracy":
        recs = degeneracy_sweep(cfg.aspects)
        text = (io.records_to_csv(recs) if cfg.format == "csv"
                else io.dumps([dataclasses.asdict(r) for r in recs]))
        _emit(text, cfg.output)


def run(cfg):
    """Execute one command; returns the process exit status."""
    try:
        _run(cfg)
    except GeometryError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        # unreadable or malformed input files
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


def build_parser():
    ap = argparse.ArgumentParser(prog="minkolab", description="Minkowski problem toolkit")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp, p=True):
        sp.add_argument("--out", dest="output")
        sp.add_argument("--seed", type=int, default=0)
        if p:
            sp.add_argument("--p", type=float, default=1.0)

    sp = sub.add_parser("solve", help="recover a body from a measure")
    sp.add_argument("--measure", required=True)
    sp.add_argument("--tolerance", type=float, default=1e-8)
    sp.add_argument("--max-iterations", type=int, default=500)
    sp.add_argument("--body-out", dest="body_output")
    common(sp)

    sp = sub.add_parser("distance", help="d_c and W1 between two measures")
    sp.add_argument("--a", required=True)
    sp.add_argument("--b", required=True)
    common(sp, p=False)

    for name, hlp in (("asymmetry", "Fraenkel asymmetry of two polytopes"),
                      ("deficits", "Brunn-Minkowski and Wulff deficits")):
        sp = sub.add_parser(name, help=hlp)
        sp.add_argument("--a", required=True)
        sp.add_argument("--b", required=True)
        common(sp)

    sp = sub.add_parser("radii", help="radius bounds of a polytope")
    sp.add_argument("--polytope", required=True)
    common(sp)

    sp = sub.add_parser("sweep", help="perturbation sweep around a base measure")
    sp.add_argument("--base", required=True)
    sp.add_argument("--eps", default="1e-1,1e-2,1e-3,1e-4")
    sp.add_argument("--seeds", type=int, default=20)
    sp.add_argument("--vartheta", type=float, default=0.0)
    sp.add_argument("--jobs", type=int, default=1)
    sp.add_argument("--format", choices=("csv", "json"), default="csv")
    common(sp)

    sp = sub.add_parser("degeneracy", help="hexagons collapsing to a segment")
    sp.add_argument("--aspects", default="1,2,4,8,16")
    sp.add_argument("--format", choices=("csv", "json"), default="csv")
    common(sp, p=False)
    return ap


def config_from_args(ns):
    cmd = ns.command
    inputs = {"solve": lambda: [ns.measure], "distance": lambda: [ns.a, ns.b],
              "asymmetry": lambda: [ns.a, ns.b], "deficits": lambda: [ns.a, ns.b],
              "radii": lambda: [ns.polytope], "sweep": lambda: [ns.base],
              "degeneracy": lambda: []}[cmd]()
    kw = dict(command=cmd, inputs=inputs, seed=ns.seed, output=ns.output,
              p=getattr(ns, "p", 1.0), format=getattr(ns, "format", "json"))
    if cmd == "solve":
        kw.update(tolerance=ns.tolerance, max_iterations=ns.max_iterations,
                  body_output=ns.body_output)
    if cmd == "sweep":
        kw.update(epsilons=_floats(ns.eps), seeds=ns.seeds, vartheta=ns.vartheta, jobs=ns.jobs)
    if cmd == "degeneracy":
        kw.update(aspects=_floats(ns.aspects))
    return RunConfig(**kw)


def main(argv=None):
    ns = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(ns)
    except ValueError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
