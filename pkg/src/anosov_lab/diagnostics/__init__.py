"""Certification suites for Anosov and Hitchin representations."""
from .cusps import (
    DistortionResult,
    GrowthResult,
    TPResult,
    cusp_norm_distortion,
    invariant_gram,
    log_wedge_norms_of_power,
    parabolic_growth_exponents,
    tp_check,
)
from .fits import FitResult, Verdict, fit_bounds, slope_verdict
from .gaps import (
    EigengapStatistics,
    GapSample,
    GapStatistics,
    QIStatistics,
    eigengap_statistics,
    gap_samples,
    gap_statistics,
    orbit_qi_check,
)
from .hitchin import Category, HitchinReport, hitchin_certify, positivity_category
from .limits import (
    CartanResult,
    ExtensionResult,
    LimitMapSample,
    Trajectory,
    cartan_property_check,
    extend_positive_map,
    limit_map_sample,
    limit_value,
    power_trajectory,
    pumped_trajectory,
)

__all__ = [
    "Category", "CartanResult", "DistortionResult", "EigengapStatistics", "ExtensionResult", "FitResult",
    "GapSample", "GapStatistics", "GrowthResult", "HitchinReport", "LimitMapSample", "QIStatistics", "TPResult",
    "Trajectory", "Verdict", "cartan_property_check", "cusp_norm_distortion", "eigengap_statistics",
    "extend_positive_map", "fit_bounds", "gap_samples", "gap_statistics", "hitchin_certify", "invariant_gram",
    "limit_map_sample", "limit_value", "log_wedge_norms_of_power", "orbit_qi_check", "parabolic_growth_exponents",
    "positivity_category", "power_trajectory", "pumped_trajectory", "slope_verdict", "tp_check",
]
