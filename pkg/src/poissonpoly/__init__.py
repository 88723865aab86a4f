"""Monte Carlo laboratory for the moment identities of Poisson random polytopes.

The hull of a Poisson process with intensity measure t * mu splits its points
into vertices N and inner points I. This package simulates such hulls in
dimensions 1 to 3 and checks exact identities linking the moments of N and I
to those of the covered mass mu(hull) and the missed mass 1 - mu(hull).
"""
__version__ = "0.1.0"

from .geometry import Polytope, contains_interior, convex_hull, extension_volume, hull_volume
from .measure import ConvexBody, MeasureModel, extension_mass, missed_mass, mu_mass
from .oracle import brute_force_small, oracle_1d
from .process import evaluate, sample_binomial, sample_poisson, split
from .reports import IdentityReport, merge_reports

__all__ = [
    "ConvexBody", "IdentityReport", "MeasureModel", "Polytope", "brute_force_small",
    "contains_interior", "convex_hull", "evaluate", "extension_mass", "extension_volume",
    "hull_volume", "merge_reports", "missed_mass", "mu_mass", "oracle_1d",
    "sample_binomial", "sample_poisson", "split",
]
