"""Monte Carlo validation of the fit-and-extrapolate pipeline.

Random numbers come from numpy's PCG64 bit generator; normal variates use
numpy's ziggurat sampler.  Both are fixed algorithms, so a given seed
reproduces the same draws for a given numpy release.  Trial ``i`` of a run
with master seed ``S`` draws from ``SeedSequence(S, spawn_key=(i,))``.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .citation_model import (
    BREAKTHROUGH_LEVEL,
    CitationModelParams,
    PercentileObservation,
    check_level,
    fit_least_squares,
    top_fraction_probability,
    world_threshold,
)
from .errors import DegenerateFitError, DomainError, EmptyInputError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SimulationSpec:
    params: CitationModelParams
    n_papers: int
    n_trials: int
    seed: int
    levels: tuple[float, ...]
    assessment_level: float = BREAKTHROUGH_LEVEL
    # 0 means thresholds come from the analytic world frame.
    world_size: int = 0

    def __post_init__(self):
        if self.n_papers < 1:
            raise DomainError(f"n_papers must be >= 1, got {self.n_papers}")
        if self.n_trials < 1:
            raise DomainError(f"n_trials must be >= 1, got {self.n_trials}")
        if not 0 <= self.seed < 2**64:
            raise DomainError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.world_size < 0:
            raise DomainError(f"world_size must be >= 0, got {self.world_size}")
        object.__setattr__(self, "levels", tuple(self.levels))
        if len(set(self.levels)) < 2:
            raise DomainError("validation needs at least two distinct levels")
        for level in self.levels:
            check_level(level)
        check_level(self.assessment_level)


@dataclass(frozen=True)
class TrialResult:
    trial: int
    fitted: CitationModelParams | None
    proportions: tuple[float, ...]
    analytic_p: float | None
    empirical_p: float
    warnings: tuple[str, ...] = ()
    error: str | None = None


@dataclass(frozen=True)
class ValidationReport:
    spec: SimulationSpec
    true_p: float
    trials: tuple[TrialResult, ...] = field(default_factory=tuple)

    @property
    def true_params(self) -> CitationModelParams:
        return self.spec.params

    def discrepancies(self) -> list[dict[str, float | None]]:
        out = []
        for t in self.trials:
            if t.fitted is None:
                out.append({"m": None, "s": None, "p_rel": None})
                continue
            out.append(
                {
                    "m": t.fitted.m - self.spec.params.m,
                    "s": t.fitted.s - self.spec.params.s,
                    "p_rel": (t.analytic_p - t.empirical_p) / t.empirical_p
                    if t.empirical_p > 0
                    else None,
                }
            )
        return out


def _generator(seed: int, trial: int | None = None) -> np.random.Generator:
    if trial is None:
        seq = np.random.SeedSequence(seed)
    else:
        seq = np.random.SeedSequence(seed, spawn_key=(trial,))
    return np.random.Generator(np.random.PCG64(seq))


def sample_z_scores(params: CitationModelParams, n: int, seed: int) -> np.ndarray:
    """``n`` independent draws from normal(m, s) in world z-space."""
    if n < 1:
        raise DomainError(f"sample size must be >= 1, got {n}")
    return _draw(params, n, _generator(seed))


def _draw(params: CitationModelParams, n: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.standard_normal(n)
    z *= params.s
    z += params.m
    return z


def empirical_tail_probability(z_scores, level: float) -> float:
    """Fraction of draws above the analytic world cut for ``level``."""
    z = np.asarray(z_scores, dtype=float)
    if z.size == 0:
        raise EmptyInputError("no draws given")
    return np.count_nonzero(z > world_threshold(level)) / z.size


def sampled_world_threshold(world_z: np.ndarray, level: float) -> float:
    """Cut of the top ``level`` set of a sampled world, by order statistic."""
    check_level(level)
    k = int(level * world_z.size)
    if k == 0:
        return float(world_z.max())
    pos = world_z.size - k
    part = np.partition(world_z, (pos - 1, pos))
    return float(0.5 * (part[pos - 1] + part[pos]))


def _run_trial(spec: SimulationSpec, trial: int) -> TrialResult:
    rng = _generator(spec.seed, trial)
    z = _draw(spec.params, spec.n_papers, rng)
    if spec.world_size:
        world = rng.standard_normal(spec.world_size)
        cuts = [sampled_world_threshold(world, x) for x in spec.levels]
    else:
        cuts = [world_threshold(x) for x in spec.levels]
    proportions = tuple(np.count_nonzero(z > c) / z.size for c in cuts)
    empirical_p = empirical_tail_probability(z, spec.assessment_level)

    notes = []
    usable = []
    for level, p in zip(spec.levels, proportions):
        if p in (0.0, 1.0):
            msg = f"boundary proportion {p:g} at level {level:g} dropped"
            log.warning("trial %d: %s", trial, msg)
            notes.append(msg)
        else:
            usable.append(PercentileObservation(level, p))
    try:
        fitted = fit_least_squares(usable)
    except DegenerateFitError as exc:
        return TrialResult(trial, None, proportions, None, empirical_p, tuple(notes), str(exc))
    return TrialResult(
        trial,
        fitted,
        proportions,
        top_fraction_probability(fitted, spec.assessment_level),
        empirical_p,
        tuple(notes),
    )


def validate_fit_pipeline(
    spec: SimulationSpec, *, workers: int = 1, strict: bool = False
) -> ValidationReport:
    """Sample, measure, refit and compare against the generating model.

    Discrepancies are reported, not judged.  With ``strict=True`` the first
    degenerate fit is raised instead of being recorded on its trial.
    """
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            trials = list(pool.map(lambda i: _run_trial(spec, i), range(spec.n_trials)))
    else:
        trials = [_run_trial(spec, i) for i in range(spec.n_trials)]
    if strict:
        for t in trials:
            if t.error is not None:
                raise DegenerateFitError(f"trial {t.trial}: {t.error}")
    return ValidationReport(
        spec,
        top_fraction_probability(spec.params, spec.assessment_level),
        tuple(trials),
    )
