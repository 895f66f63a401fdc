"""Lognormal citation model in the world reference frame.

Log-citations of the world's publications are normalised to the standard
normal.  An institution is then described by the location ``m`` and scale
``s`` of its own log-citation distribution in that frame, and its share of
papers in any world top-x set follows from a single normal tail:

    P(top x) = 1 - Phi((Phi^-1(1 - x) - m) / s)

Because both distributions are lognormal, ``Phi^-1(1 - P)`` is linear in
``Phi^-1(1 - x)``; fitting happens on that probit-transformed line.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from statistics import NormalDist
from typing import Sequence

from .errors import DegenerateFitError, DomainError

#: Top 0.02% of world publications; the breakthrough level.
BREAKTHROUGH_LEVEL = 0.0002
#: Top 0.001%; the stricter prize-grade level.
NOBEL_LEVEL = 0.00001

_STD_NORMAL = NormalDist()
_SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class CitationModelParams:
    """Location and scale of an institution's log-citations in world z-space."""

    m: float
    s: float

    def __post_init__(self):
        if not (math.isfinite(self.m) and math.isfinite(self.s)):
            raise DomainError(f"non-finite model parameters ({self.m}, {self.s})")
        if self.s <= 0:
            raise DomainError(f"scale must be positive, got {self.s}")


WORLD = CitationModelParams(0.0, 1.0)


@dataclass(frozen=True)
class PercentileObservation:
    """Share ``proportion`` of an institution's papers inside the world top ``level``."""

    level: float
    proportion: float

    def __post_init__(self):
        check_level(self.level)
        if not 0.0 <= self.proportion <= 1.0:
            raise DomainError(f"proportion must lie in [0, 1], got {self.proportion}")


def check_level(level: float) -> float:
    if not 0.0 < level < 1.0:
        raise DomainError(f"level must lie strictly between 0 and 1, got {level}")
    return level


def std_normal_cdf(z: float) -> float:
    return 0.5 * math.erfc(-z / _SQRT2)


def std_normal_quantile(p: float) -> float:
    """Inverse of :func:`std_normal_cdf` (Wichura's AS241, via the stdlib)."""
    if not 0.0 < p < 1.0:
        raise DomainError(f"quantile argument must lie in (0, 1), got {p}")
    return _STD_NORMAL.inv_cdf(p)


def world_threshold(level: float) -> float:
    """z-space cut above which the world's top ``level`` fraction lies."""
    check_level(level)
    # Phi^-1(1 - x) == -Phi^-1(x); the right side avoids rounding 1 - x.
    return -std_normal_quantile(level)


def _probit_of_proportion(proportion: float) -> float:
    if not 0.0 < proportion < 1.0:
        raise DomainError(
            f"proportion {proportion} is on the boundary and has no probit transform"
        )
    return -std_normal_quantile(proportion)


def top_fraction_probability(params: CitationModelParams, level: float) -> float:
    """Probability that one of the institution's papers is in the world top ``level``."""
    t = world_threshold(level)
    return std_normal_cdf((params.m - t) / params.s)


def fit_two_point(
    obs_a: PercentileObservation, obs_b: PercentileObservation
) -> CitationModelParams:
    """Closed-form model through two percentile observations."""
    if obs_a.level == obs_b.level:
        raise DegenerateFitError(f"both observations are at level {obs_a.level}")
    z_a, z_b = world_threshold(obs_a.level), world_threshold(obs_b.level)
    u_a = _probit_of_proportion(obs_a.proportion)
    u_b = _probit_of_proportion(obs_b.proportion)
    if u_a == u_b:
        raise DegenerateFitError("observations share the same probit value")
    s = (z_a - z_b) / (u_a - u_b)
    if not s > 0:
        raise DegenerateFitError(
            f"observations imply non-positive scale {s}; proportions are not "
            "increasing with level"
        )
    return CitationModelParams(z_a - s * u_a, s)


def fit_least_squares(
    observations: Sequence[PercentileObservation],
) -> CitationModelParams:
    """Ordinary least squares of the probit proportions on the world thresholds.

    Regresses ``u = a + b z`` and returns ``s = 1/b``, ``m = -a/b``.  With
    two observations this is the same line as :func:`fit_two_point`.
    """
    if len(observations) < 2:
        raise DegenerateFitError(f"need at least 2 observations, got {len(observations)}")
    if len({o.level for o in observations}) < 2:
        raise DegenerateFitError("need at least 2 distinct levels")
    if len(observations) == 2:
        return fit_two_point(observations[0], observations[1])

    zs = [world_threshold(o.level) for o in observations]
    us = [_probit_of_proportion(o.proportion) for o in observations]
    n = len(zs)
    z_mean = math.fsum(zs) / n
    u_mean = math.fsum(us) / n
    sxx = math.fsum((z - z_mean) ** 2 for z in zs)
    sxy = math.fsum((z - z_mean) * (u - u_mean) for z, u in zip(zs, us))
    slope = sxy / sxx
    if not slope > 0:
        raise DegenerateFitError(f"fitted probit slope {slope} is not positive")
    intercept = u_mean - slope * z_mean
    return CitationModelParams(-intercept / slope, 1.0 / slope)


def probit_residual_ss(
    params: CitationModelParams, observations: Sequence[PercentileObservation]
) -> float:
    """Residual sum of squares of the probit-space line at ``params``."""
    b = 1.0 / params.s
    a = -params.m / params.s
    return math.fsum(
        (_probit_of_proportion(o.proportion) - (a + b * world_threshold(o.level))) ** 2
        for o in observations
    )


def expected_breakthroughs(p: float, n_publications: float) -> float:
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"probability must lie in [0, 1], got {p}")
    if n_publications < 0:
        raise DomainError(f"publication count must be non-negative, got {n_publications}")
    return p * n_publications
