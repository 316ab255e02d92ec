"""Metric models, pullback sampling, Heintze curvature and Jacobi contraction."""

from .curvature import (
    CurvatureScan,
    DegeneratePlane,
    coordinate_to_algebra,
    fd_sectional,
    heintze_curvature,
    levi_civita,
    riemann_tensor,
    sectional,
    structure_constants,
)
from .jacobi import JacobiResult, NotContracting, jacobi_contraction
from .models import (
    AffineMap,
    Heintze,
    MetricModel,
    OutOfDomain,
    ProductGIB,
    UpperHalfSpace,
    gib_pullback_report,
    glide_map,
    heintze_to_uhs,
    metric_eval,
    pullback_ratio_report,
    translation_map,
    uhs_to_heintze,
)

__all__ = [
    "AffineMap", "CurvatureScan", "DegeneratePlane", "Heintze", "JacobiResult", "MetricModel",
    "NotContracting", "OutOfDomain", "ProductGIB", "UpperHalfSpace", "coordinate_to_algebra",
    "fd_sectional", "gib_pullback_report", "glide_map", "heintze_curvature", "heintze_to_uhs",
    "jacobi_contraction", "levi_civita", "metric_eval", "pullback_ratio_report", "riemann_tensor",
    "sectional", "structure_constants", "translation_map", "uhs_to_heintze",
]
