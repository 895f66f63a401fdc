"""Percentile-based research assessment with a lognormal citation model."""

__version__ = "0.1.0"

from .citation_model import (
    BREAKTHROUGH_LEVEL,
    NOBEL_LEVEL,
    WORLD,
    CitationModelParams,
    PercentileObservation,
    expected_breakthroughs,
    fit_least_squares,
    fit_two_point,
    std_normal_cdf,
    std_normal_quantile,
    top_fraction_probability,
    world_threshold,
)
from .errors import (
    BreakthroughsError,
    DegenerateFitError,
    DomainError,
    EmptyInputError,
    InputFormatError,
    InsufficientDataError,
)
