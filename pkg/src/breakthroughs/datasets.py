"""Readers and writers for the three CSV inputs.

* ``institutions.csv`` -- ``institution,country,period,counting,publications,pp_top50,pp_top10,pp_top1,tags``
* ``researchers.csv``  -- ``researcher_id,name,institution,country,field,rank_score``
* ``populations.csv``  -- ``country,population_millions``

Files are UTF-8 and comma-delimited.  Decimal separators are always ``.``.
Rows that break a record invariant are reported as warnings and skipped;
they never abort a parse.
"""

from __future__ import annotations

import csv
import functools
import io
import math
import os
import unicodedata
from dataclasses import dataclass, field
from typing import Callable, Iterable, TextIO, TypeVar

from .errors import InputFormatError

INSTITUTION_COLUMNS = (
    "institution",
    "country",
    "period",
    "counting",
    "publications",
    "pp_top50",
    "pp_top10",
    "pp_top1",
    "tags",
)
RESEARCHER_COLUMNS = ("researcher_id", "name", "institution", "country", "field", "rank_score")
POPULATION_COLUMNS = ("country", "population_millions")
COUNTING_MODES = ("fractional", "full")

#: (level, record attribute) for the percentile columns, widest first.
PP_LEVELS = ((0.50, "pp_top50"), (0.10, "pp_top10"), (0.01, "pp_top1"))


@functools.lru_cache(maxsize=4096)
def normalize_name(name: str) -> str:
    """Matching key for institution and country names: NFC, casefolded, single-spaced."""
    return " ".join(unicodedata.normalize("NFC", name).casefold().split())


@dataclass(frozen=True)
class ParseWarning:
    line: int
    message: str

    def __str__(self):
        return f"line {self.line}: {self.message}"


@dataclass(frozen=True)
class InstitutionRecord:
    institution: str
    country: str
    period: str
    counting: str
    publications: float
    pp_top50: float | None = None
    pp_top10: float | None = None
    pp_top1: float | None = None
    tags: frozenset[str] = field(default_factory=frozenset)

    def percentiles(self) -> list[tuple[float, float]]:
        """Present (level, proportion) pairs, widest level first."""
        out = []
        for level, attr in PP_LEVELS:
            value = getattr(self, attr)
            if value is not None:
                out.append((level, value))
        return out


@dataclass(frozen=True)
class ResearcherRecord:
    researcher_id: str
    institution: str
    country: str
    field: str = ""
    name: str = ""
    rank_score: float | None = None


@dataclass(frozen=True)
class PopulationRecord:
    country: str
    population_millions: float


class _RowError(ValueError):
    pass


def _number(raw: str, column: str) -> float:
    try:
        value = float(raw)
    except ValueError:
        raise _RowError(f"{column} {raw!r} is not a number") from None
    if not math.isfinite(value):
        raise _RowError(f"{column} {raw!r} is not finite")
    return value


def _optional_fraction(raw: str, column: str) -> float | None:
    if raw == "":
        return None
    value = _number(raw, column)
    if not 0.0 <= value <= 1.0:
        raise _RowError(f"{column} {value} lies outside [0, 1]")
    return value


def _count(raw: str, column: str) -> float:
    value = _number(raw, column)
    if value < 0:
        raise _RowError(f"{column} must be non-negative, got {value}")
    return int(value) if value.is_integer() else value


def _required(raw: str, column: str) -> str:
    if raw == "":
        raise _RowError(f"{column} is empty")
    return raw


def _institution_row(cells: list[str]) -> InstitutionRecord:
    institution, country, period, counting, publications, pp50, pp10, pp1, tags = cells
    if counting.lower() not in COUNTING_MODES:
        raise _RowError(f"counting must be one of {COUNTING_MODES}, got {counting!r}")
    rec = InstitutionRecord(
        institution=_required(institution, "institution"),
        country=country,
        period=period,
        counting=counting.lower(),
        publications=_count(publications, "publications"),
        pp_top50=_optional_fraction(pp50, "pp_top50"),
        pp_top10=_optional_fraction(pp10, "pp_top10"),
        pp_top1=_optional_fraction(pp1, "pp_top1"),
        tags=frozenset(t.strip() for t in tags.split("|") if t.strip()),
    )
    present = rec.percentiles()
    for (wide, p_wide), (narrow, p_narrow) in zip(present, present[1:]):
        if p_narrow > p_wide:
            raise _RowError(
                f"pp at top {narrow:g} ({p_narrow}) exceeds pp at top {wide:g} ({p_wide})"
            )
    if present and rec.publications <= 0:
        raise _RowError("percentile values given for an institution without publications")
    return rec


def _researcher_row(cells: list[str]) -> ResearcherRecord:
    researcher_id, name, institution, country, field_, score = cells
    return ResearcherRecord(
        _required(researcher_id, "researcher_id"),
        institution,
        country,
        field_,
        name,
        None if score == "" else _number(score, "rank_score"),
    )


def _population_row(cells: list[str]) -> PopulationRecord:
    country, population = cells
    value = _number(population, "population_millions")
    if value <= 0:
        raise _RowError(f"population_millions must be positive, got {value}")
    return PopulationRecord(_required(country, "country"), value)


R = TypeVar("R")


def _parse(
    stream: TextIO,
    columns: tuple[str, ...],
    build: Callable[[list[str]], R],
    key: Callable[[R], str] | None = None,
    key_label: str = "",
) -> tuple[list[R], list[ParseWarning]]:
    try:
        text = stream.read()
    except (OSError, UnicodeDecodeError) as exc:
        raise InputFormatError(f"cannot read input: {exc}") from exc
    text = text.removeprefix("\ufeff")
    reader = csv.reader(io.StringIO(text, newline=""))
    header = next(reader, None)
    if header is None:
        raise InputFormatError("input is empty; expected a header row")
    header = [h.strip() for h in header]
    if tuple(header) != columns:
        raise InputFormatError(
            f"malformed header {','.join(header)!r}; expected {','.join(columns)!r}"
        )

    records: list[R] = []
    warnings: list[ParseWarning] = []
    seen: set[str] = set()
    width = len(columns)
    for row in reader:
        line = reader.line_num
        if not "".join(row).strip():
            continue
        if len(row) != width:
            warnings.append(
                ParseWarning(line, f"expected {width} fields, found {len(row)}")
            )
            continue
        try:
            rec = build([cell.strip() for cell in row])
        except _RowError as exc:
            warnings.append(ParseWarning(line, str(exc)))
            continue
        if key is not None:
            k = key(rec)
            if k in seen:
                warnings.append(
                    ParseWarning(line, f"duplicate {key_label} {k!r}; first occurrence kept")
                )
                continue
            seen.add(k)
        records.append(rec)
    return records, warnings


def parse_institutions(stream: TextIO) -> tuple[list[InstitutionRecord], list[ParseWarning]]:
    return _parse(stream, INSTITUTION_COLUMNS, _institution_row)


def parse_researchers(stream: TextIO) -> tuple[list[ResearcherRecord], list[ParseWarning]]:
    return _parse(
        stream, RESEARCHER_COLUMNS, _researcher_row, lambda r: r.researcher_id, "researcher_id"
    )


def parse_populations(stream: TextIO) -> tuple[list[PopulationRecord], list[ParseWarning]]:
    return _parse(
        stream,
        POPULATION_COLUMNS,
        _population_row,
        lambda r: normalize_name(r.country),
        "country",
    )


def _open(path: str | os.PathLike) -> TextIO:
    try:
        return open(path, encoding="utf-8", newline="")
    except OSError as exc:
        raise InputFormatError(f"cannot open {os.fspath(path)}: {exc.strerror}") from exc


def read_institutions(path):
    with _open(path) as fh:
        return parse_institutions(fh)


def read_researchers(path):
    with _open(path) as fh:
        return parse_researchers(fh)


def read_populations(path):
    with _open(path) as fh:
        return parse_populations(fh)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_institutions(records: Iterable[InstitutionRecord], stream: TextIO) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(INSTITUTION_COLUMNS)
    for r in records:
        w.writerow(
            [
                r.institution,
                r.country,
                r.period,
                r.counting,
                _fmt(r.publications),
                _fmt(r.pp_top50),
                _fmt(r.pp_top10),
                _fmt(r.pp_top1),
                "|".join(sorted(r.tags)),
            ]
        )


def write_researchers(records: Iterable[ResearcherRecord], stream: TextIO) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(RESEARCHER_COLUMNS)
    for r in records:
        w.writerow(
            [r.researcher_id, r.name, r.institution, r.country, r.field, _fmt(r.rank_score)]
        )


def write_populations(records: Iterable[PopulationRecord], stream: TextIO) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(POPULATION_COLUMNS)
    for r in records:
        w.writerow([r.country, _fmt(r.population_millions)])


def parse_aliases(stream: TextIO) -> dict[str, str]:
    """Read an ``aliases.csv`` (``from,to``) into a normalized-name lookup."""
    records, warnings = _parse(
        stream, ("from", "to"), lambda cells: (_required(cells[0], "from"), _required(cells[1], "to"))
    )
    if warnings:
        raise InputFormatError("; ".join(str(w) for w in warnings))
    return {normalize_name(src): dst for src, dst in records}


def read_aliases(path) -> dict[str, str]:
    with _open(path) as fh:
        return parse_aliases(fh)
