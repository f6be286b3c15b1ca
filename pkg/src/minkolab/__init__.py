"""Discrete classical and L_p Minkowski problems and their quantitative stability."""
from .errors import (DegenerateMeasure, DimensionMismatch, EmptyBody, ExcludedExponent,
                     GeometryError, HemisphereConcentration, InsufficientData, InvalidMeasure,
                     MassMismatch, NoConvergence, NormalizationRequired, OriginNotContained,
                     OriginNotInterior, OriginOnSingularBoundary, UnboundedBody)
from .measure import (DirectionalMeasure, DispersionReport, SignedMeasure, barycenter,
                      dual_convex_distance, mass_bound_check, theta, theta_plus, wasserstein1)
from .polytope import (Polytope, Radii, fraenkel_asymmetry, from_halfspaces, from_vertices,
                       hausdorff, lp_combination, minkowski_sum, mixed_volume,
                       projection_area, radii, support, surface_measure,
                       symmetric_difference_volume, volume)
from .solvers import (SolveOptions, SolveReport, SupportVector, body_from_support, energy,
                      energy_gradient, lambda_constant, solve, solve_minkowski,
                      solve_minkowski_lp)
from .stability import (DeficitReport, RadiusBoundReport, SweepRecord, deficits,
                        degeneracy_sweep, exponent_fit, radius_bounds, stability_sweep)

__version__ = "0.1.0"

__all__ = [
    "DegenerateMeasure", "DimensionMismatch", "EmptyBody", "ExcludedExponent", "GeometryError",
    "HemisphereConcentration", "InsufficientData", "InvalidMeasure", "MassMismatch",
    "NoConvergence", "NormalizationRequired", "OriginNotContained", "OriginNotInterior",
    "OriginOnSingularBoundary", "UnboundedBody",
    "DirectionalMeasure", "DispersionReport", "SignedMeasure", "barycenter",
    "dual_convex_distance", "mass_bound_check", "theta", "theta_plus", "wasserstein1",
    "Polytope", "Radii", "fraenkel_asymmetry", "from_halfspaces", "from_vertices", "hausdorff",
    "lp_combination", "minkowski_sum", "mixed_volume", "projection_area", "radii", "support",
    "surface_measure", "symmetric_difference_volume", "volume",
    "SolveOptions", "SolveReport", "SupportVector", "body_from_support", "energy",
    "energy_gradient", "lambda_constant", "solve", "solve_minkowski", "solve_minkowski_lp",
    "DeficitReport", "RadiusBoundReport", "SweepRecord", "deficits", "degeneracy_sweep",
    "exponent_fit", "radius_bounds", "stability_sweep",
]
