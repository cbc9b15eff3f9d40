"""Numerical diagnostics for Anosov and Hitchin representations of Fuchsian groups."""
from . import diagnostics, errors, freegroup, hyperbolic, matnum, posflags, reps
from .freegroup import GroupElement, LimitSample, enumerate_ball, parse_word, sample_limit_set, word_to_str
from .hyperbolic import BoundaryPoint, Kind, MoebiusMap, classify, dist_h2, fixed_points
from .posflags import Flag, PartialFlagPair, is_positive_tuple
from .reps import CuspRep, Representation, build_cusp_rep, tau_d, tau_rep, veronese

__version__ = "0.1.0"

__all__ = [
    "BoundaryPoint", "CuspRep", "Flag", "GroupElement", "Kind", "LimitSample", "MoebiusMap", "PartialFlagPair",
    "Representation", "build_cusp_rep", "classify", "diagnostics", "dist_h2", "enumerate_ball", "errors",
    "fixed_points", "freegroup", "hyperbolic", "is_positive_tuple", "matnum", "parse_word", "posflags", "reps",
    "sample_limit_set", "tau_d", "tau_rep", "veronese", "word_to_str",
]
