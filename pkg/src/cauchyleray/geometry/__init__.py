"""Domains, defining functions and the convexity-condition estimators."""

from .conditions import (
    ALL_TAGS,
    TAGS,
    ConditionEstimate,
    ConditionReport,
    SamplerConfig,
    SamplingError,
    StabilityError,
    check_stability,
    condition_report,
    estimate_condition,
    failure_tolerance,
    leray_denominator,
)
from .defining import (
    DefiningFunction,
    ball_function,
    limacon_function,
    mixed_from_real,
    power_function,
    quadratic_function,
    star_function,
    to_complex,
    to_real,
    wirtinger_from_real,
)
from .domains import (
    CATALOG,
    Ball,
    Domain,
    DomainError,
    Ellipsoid,
    Limacon,
    PowerDomain,
    StarShaped,
    make_domain,
    random_directions,
)
from .mollify import mollify
from .power import power_gap, power_value_grad

__all__ = [name for name in dir() if not name.startswith("_")]
