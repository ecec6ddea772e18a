"""Zero inclusion for the differential composition of complex polynomials."""

from .poly import (
    Polynomial,
    derivative,
    differential_compose,
    evaluate,
    linear_factor_apply,
    origin_multiplicity,
)
from .region import ConvexRegion, Segment, contains, convex_hull, minkowski_sum_segment, signed_distance
from .roots import RootFindingError, RootMultiset, cluster_multiplicities, find_roots, polish_root
from .theorem import (
    Certificate,
    TakagiInstance,
    analyze,
    build_region,
    certificate,
    factor_operator,
    log_derivative_residual,
    quadratic_closed_form,
)

__version__ = "0.1.0"
