"""Derived indicators: per-institution assessments, pooling, comparisons, ratios."""

from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .citation_model import (
    BREAKTHROUGH_LEVEL,
    CitationModelParams,
    PercentileObservation,
    check_level,
    expected_breakthroughs,
    fit_least_squares,
    top_fraction_probability,
)
from .datasets import (
    InstitutionRecord,
    PopulationRecord,
    ResearcherRecord,
    normalize_name,
)
from .errors import DegenerateFitError, DomainError, EmptyInputError, InsufficientDataError

log = logging.getLogger(__name__)

PREFERRED_LEVELS = (0.10, 0.01)


@dataclass(frozen=True)
class AssessmentReport:
    institution: str
    period: str
    probability: float
    publications: float
    expected_breakthroughs: float
    ioannidis_count: int | None
    confidence: str = "normal"
    country: str = ""
    tags: frozenset[str] = field(default_factory=frozenset)
    params: CitationModelParams | None = None

    @property
    def avances(self) -> float:
        return self.expected_breakthroughs


@dataclass(frozen=True)
class SkippedInstitution:
    institution: str
    period: str
    reason: str


@dataclass(frozen=True)
class CountryAggregate:
    country: str
    ioannidis_count: int
    population_millions: float
    per_million: float


@dataclass(frozen=True)
class PeriodComparison:
    institution: str
    probability_a: float | None
    probability_b: float | None
    publications_a: float | None
    publications_b: float | None
    avances_a: float | None
    avances_b: float | None

    @property
    def probability_delta(self) -> float | None:
        if self.probability_a is None or self.probability_b is None:
            return None
        return self.probability_b - self.probability_a

    @property
    def avances_delta(self) -> float | None:
        if self.avances_a is None or self.avances_b is None:
            return None
        return self.avances_b - self.avances_a


@dataclass(frozen=True)
class ComparisonTable:
    period_a: str
    period_b: str
    rows: tuple[PeriodComparison, ...]
    publications_a: float
    publications_b: float
    avances_a: float
    avances_b: float
    pooled_a: float | None
    pooled_b: float | None
    skipped: tuple[SkippedInstitution, ...] = ()
    reports_a: tuple[AssessmentReport, ...] = ()
    reports_b: tuple[AssessmentReport, ...] = ()


def select_observations(
    record: InstitutionRecord,
) -> tuple[list[PercentileObservation], str]:
    """Percentile observations to fit, and the confidence they carry.

    The top-10%/top-1% pair is preferred.  Boundary proportions (0 or 1) are
    dropped with a warning; without the preferred pair the remaining usable
    levels (normally top-50%/top-10%) are used and the fit is marked low
    confidence.
    """
    usable: dict[float, float] = {}
    for level, proportion in record.percentiles():
        if proportion in (0.0, 1.0):
            log.warning(
                "%s: proportion %g at top %g%% dropped (no probit transform)",
                record.institution,
                proportion,
                level * 100,
            )
            continue
        usable[level] = proportion
    if all(level in usable for level in PREFERRED_LEVELS):
        return [PercentileObservation(x, usable[x]) for x in PREFERRED_LEVELS], "normal"
    if len(usable) >= 2:
        return [PercentileObservation(x, p) for x, p in usable.items()], "low"
    raise InsufficientDataError(
        f"{record.institution}: {len(usable)} usable percentile observation(s), need 2"
    )


def fit_record(record: InstitutionRecord) -> tuple[CitationModelParams, str]:
    observations, confidence = select_observations(record)
    return fit_least_squares(observations), confidence


def count_researchers(
    researchers: Iterable[ResearcherRecord],
    group_by: str = "institution",
    aliases: Mapping[str, str] | None = None,
) -> dict[str, int]:
    """Researchers per institution or per country.

    Keys are the first-seen spelling of each name; names that differ only by
    case or Unicode normalization are counted together.
    """
    if group_by not in ("institution", "country"):
        raise DomainError(f"group_by must be 'institution' or 'country', got {group_by!r}")
    counts: Counter[str] = Counter()
    display: dict[str, str] = {}
    for r in researchers:
        name = resolve_alias(getattr(r, group_by), aliases)
        key = normalize_name(name)
        display.setdefault(key, name)
        counts[key] += 1
    return {display[k]: n for k, n in counts.items()}


def resolve_alias(name: str, aliases: Mapping[str, str] | None) -> str:
    if not aliases:
        return name
    return aliases.get(normalize_name(name), name)


def _normalized_counts(counts: Mapping[str, int]) -> dict[str, int]:
    out: dict[str, int] = {}
    for name, n in counts.items():
        key = normalize_name(name)
        out[key] = out.get(key, 0) + n
    return out


def assess(
    record: InstitutionRecord,
    researchers: Iterable[ResearcherRecord] | None = None,
    level: float = BREAKTHROUGH_LEVEL,
    *,
    researcher_counts: Mapping[str, int] | None = None,
    aliases: Mapping[str, str] | None = None,
) -> AssessmentReport:
    """Fit the record's citation model and evaluate it at ``level``.

    Researchers are matched to the record by normalized institution name.
    Pass ``researcher_counts`` (from :func:`count_researchers`) instead of the
    list when assessing many records.  The count is ``None`` when neither is
    given.
    """
    check_level(level)
    try:
        params, confidence = fit_record(record)
    except DegenerateFitError as exc:
        raise InsufficientDataError(f"{record.institution}: {exc}") from exc
    p = top_fraction_probability(params, level)

    if researcher_counts is None and researchers is not None:
        researcher_counts = count_researchers(researchers, "institution", aliases)
    ioannidis = None
    if researcher_counts is not None:
        key = normalize_name(resolve_alias(record.institution, aliases))
        ioannidis = _normalized_counts(researcher_counts).get(key, 0)

    return AssessmentReport(
        institution=record.institution,
        period=record.period,
        probability=p,
        publications=record.publications,
        expected_breakthroughs=expected_breakthroughs(p, record.publications),
        ioannidis_count=ioannidis,
        confidence=confidence,
        country=record.country,
        tags=record.tags,
        params=params,
    )


def assess_all(
    records: Sequence[InstitutionRecord],
    researchers: Iterable[ResearcherRecord] | None = None,
    level: float = BREAKTHROUGH_LEVEL,
    *,
    aliases: Mapping[str, str] | None = None,
) -> tuple[list[AssessmentReport], list[SkippedInstitution]]:
    """Assess every record; records without enough data are returned as skipped."""
    counts = None
    if researchers is not None:
        counts = count_researchers(researchers, "institution", aliases)
    reports, skipped = [], []
    for rec in records:
        try:
            reports.append(
                assess(rec, level=level, researcher_counts=counts, aliases=aliases)
            )
        except InsufficientDataError as exc:
            log.warning("%s", exc)
            skipped.append(SkippedInstitution(rec.institution, rec.period, str(exc)))
    return reports, skipped


def pooled_probability(reports: Sequence[AssessmentReport], *, weighted: bool = True) -> float:
    """Publication-weighted mean probability, i.e. total avances over total publications.

    ``weighted=False`` gives the plain mean of the probabilities instead.
    """
    if not reports:
        raise EmptyInputError("cannot pool an empty set of reports")
    if not weighted:
        return math.fsum(r.probability for r in reports) / len(reports)
    total = math.fsum(r.publications for r in reports)
    if total <= 0:
        raise EmptyInputError("pooled reports carry no publications")
    return math.fsum(r.expected_breakthroughs for r in reports) / total


def pooled_excluding(
    reports: Sequence[AssessmentReport],
    excluded: Iterable[str],
    *,
    weighted: bool = True,
) -> float:
    """:func:`pooled_probability` over the reports not named in ``excluded``."""
    keys = {normalize_name(n): n for n in excluded}
    present = {normalize_name(r.institution) for r in reports}
    for key, name in keys.items():
        if key not in present:
            log.warning("excluded institution %r not found among the reports", name)
    kept = [r for r in reports if normalize_name(r.institution) not in keys]
    if not kept:
        raise EmptyInputError("every report was excluded")
    return pooled_probability(kept, weighted=weighted)


def per_million(
    counts: Mapping[str, int], populations: Sequence[PopulationRecord]
) -> list[CountryAggregate]:
    """Researchers per million inhabitants, highest ratio first."""
    pops = {normalize_name(p.country): p for p in populations}
    out = []
    for country, n in counts.items():
        pop = pops.get(normalize_name(country))
        if pop is None:
            log.warning("no population record for %r; country omitted", country)
            continue
        out.append(
            CountryAggregate(pop.country, n, pop.population_millions, n / pop.population_millions)
        )
    out.sort(key=lambda a: (-a.per_million, normalize_name(a.country)))
    return out


def compare_periods(
    records_a: Sequence[InstitutionRecord],
    records_b: Sequence[InstitutionRecord],
    level: float = BREAKTHROUGH_LEVEL,
    *,
    aliases: Mapping[str, str] | None = None,
) -> ComparisonTable:
    """Pair each institution's assessments across two periods.

    Institutions are matched by normalized name (after aliases).  Rows keep
    the order of ``records_b`` then append institutions only present in
    ``records_a``; one-sided rows are logged.
    """
    reports_a, skipped_a = assess_all(records_a, level=level, aliases=aliases)
    reports_b, skipped_b = assess_all(records_b, level=level, aliases=aliases)

    def keyed(reports):
        return {normalize_name(resolve_alias(r.institution, aliases)): r for r in reports}

    by_a, by_b = keyed(reports_a), keyed(reports_b)
    order = list(by_b) + [k for k in by_a if k not in by_b]
    rows = []
    for key in order:
        a, b = by_a.get(key), by_b.get(key)
        if a is None or b is None:
            log.warning(
                "%s appears only in period %s",
                (a or b).institution,
                (a or b).period,
            )
        rows.append(
            PeriodComparison(
                institution=(b or a).institution,
                probability_a=a.probability if a else None,
                probability_b=b.probability if b else None,
                publications_a=a.publications if a else None,
                publications_b=b.publications if b else None,
                avances_a=a.expected_breakthroughs if a else None,
                avances_b=b.expected_breakthroughs if b else None,
            )
        )

    def period_label(records):
        return ",".join(sorted({r.period for r in records}))

    return ComparisonTable(
        period_a=period_label(records_a),
        period_b=period_label(records_b),
        rows=tuple(rows),
        publications_a=math.fsum(r.publications for r in reports_a),
        publications_b=math.fsum(r.publications for r in reports_b),
        avances_a=math.fsum(r.expected_breakthroughs for r in reports_a),
        avances_b=math.fsum(r.expected_breakthroughs for r in reports_b),
        pooled_a=pooled_probability(reports_a) if reports_a else None,
        pooled_b=pooled_probability(reports_b) if reports_b else None,
        skipped=tuple(skipped_a + skipped_b),
        reports_a=tuple(reports_a),
        reports_b=tuple(reports_b),
    )


RANK_KEYS = {
    "probability": lambda r: r.probability,
    "avances": lambda r: r.expected_breakthroughs,
    "ioannidis": lambda r: r.ioannidis_count or 0,
    "publications": lambda r: r.publications,
}


def rank(
    reports: Iterable[AssessmentReport],
    key: str = "ioannidis",
    filter_tags: Iterable[str] = (),
) -> list[AssessmentReport]:
    """Descending by ``key``, ties by institution name; keeps reports carrying all ``filter_tags``."""
    if key not in RANK_KEYS:
        raise DomainError(f"unknown rank key {key!r}; choose from {sorted(RANK_KEYS)}")
    wanted = set(filter_tags)
    kept = [r for r in reports if wanted <= r.tags]
    value = RANK_KEYS[key]
    return sorted(kept, key=lambda r: (-value(r), r.institution))
