"""Display rounding, tabular reports and their markdown/CSV/JSON renderings.

Every cell keeps its full-precision value next to the display string.  The
display string is a pure function of the value: half-up rounding at the
column's precision, probabilities shown x1000.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from typing import Any, Sequence

import numpy as np

from .citation_model import (
    BREAKTHROUGH_LEVEL,
    CitationModelParams,
    std_normal_cdf,
    world_threshold,
)
from .errors import DomainError


def half_up(value: float, places: int, scale: int = 1) -> Decimal:
    """``value * scale`` rounded half-up to ``places`` decimals.

    Works on the shortest decimal representation of the float, so a value
    printed as 0.125 rounds to 0.13.
    """
    d = Decimal(repr(float(value))) * scale
    return d.quantize(Decimal(1).scaleb(-places), rounding=ROUND_HALF_UP)


def display_x1000(p: float, places: int = 2) -> str:
    return str(half_up(p, places, 1000))


def display_fixed(value: float, places: int = 2) -> str:
    return str(half_up(value, places))


def display_number(value: float) -> str:
    """Shortest faithful rendering: integers without a decimal point."""
    if float(value).is_integer():
        return str(int(value))
    return repr(float(value))


def to_locale(text: str, locale: str) -> str:
    return text.replace(".", ",") if locale == "es" else text


@dataclass(frozen=True)
class Column:
    key: str
    header: str
    numeric: bool = True


@dataclass
class Row:
    """One rendered line: display strings per column plus the record it projects."""

    cells: dict[str, str]
    record: dict[str, Any]
    label: str | None = None


@dataclass
class Table:
    kind: str
    columns: list[Column]
    rows: list[Row] = field(default_factory=list)
    summary: list[Row] = field(default_factory=list)
    skipped: list[dict[str, str]] = field(default_factory=list)
    meta: dict[str, Any] = field(default_factory=dict)
    title: str = ""

    def display_values(self) -> list[str]:
        """Every non-empty display string, in row order."""
        out = []
        for row in self.rows + self.summary:
            out += [row.cells[c.key] for c in self.columns if row.cells.get(c.key, "") != ""]
        return out


def render_markdown(table: Table, locale: str = "en") -> str:
    lines = []
    if table.title:
        lines += [f"## {table.title}", ""]
    lines.append("| " + " | ".join(c.header for c in table.columns) + " |")
    lines.append(
        "|" + "|".join("---:" if c.numeric else ":---" for c in table.columns) + "|"
    )
    for row in table.rows + table.summary:
        cells = []
        for c in table.columns:
            text = row.cells.get(c.key, "")
            cells.append(to_locale(text, locale) if c.numeric else text)
        lines.append("| " + " | ".join(cells) + " |")
    if table.skipped:
        lines += ["", "### Skipped", ""]
        lines += [f"- {s['institution']}: {s['reason']}" for s in table.skipped]
    return "\n".join(lines) + "\n"


def render_csv(table: Table) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([c.key for c in table.columns])
    for row in table.rows + table.summary:
        w.writerow([row.cells.get(c.key, "") for c in table.columns])
    return buf.getvalue()


def _jsonable(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, (frozenset, set)):
        return sorted(value)
    return value


def render_json(table: Table) -> str:
    def project(row: Row) -> dict[str, Any]:
        obj = {k: _jsonable(v) for k, v in row.record.items()}
        obj["display"] = {c.key: row.cells.get(c.key, "") for c in table.columns}
        if row.label is not None:
            obj["label"] = row.label
        return obj

    doc = {
        "meta": {k: _jsonable(v) for k, v in table.meta.items()},
        "rows": [project(r) for r in table.rows],
        "summary": [project(r) for r in table.summary],
        "skipped": table.skipped,
    }
    return json.dumps(doc, ensure_ascii=False, indent=2) + "\n"


def render(table: Table, fmt: str, locale: str = "en") -> str:
    if fmt == "markdown":
        return render_markdown(table, locale)
    if fmt == "csv":
        return render_csv(table)
    if fmt == "json":
        return render_json(table)
    raise DomainError(f"unknown output format {fmt!r}")


def lognormal_density(x: np.ndarray, params: CitationModelParams) -> np.ndarray:
    """Density of citations relative to the world median, ln(x) ~ normal(m, s)."""
    z = (np.log(x) - params.m) / params.s
    return np.exp(-0.5 * z * z) / (params.s * x * math.sqrt(2.0 * math.pi))


def emit_distribution_curve(
    params: CitationModelParams, n_points: int = 100, level: float = BREAKTHROUGH_LEVEL
) -> list[tuple[float, float, str]]:
    """Lognormal citation density on a log-spaced grid, for external plotting.

    Citations are expressed relative to the world median, with one log unit
    per world standard deviation.  The grid spans at least [0.01, 100] times
    the institution's median and always reaches the ``level`` cut.  Two
    extra rows sit exactly on the distribution mean and on the cut and carry
    ``mean`` and ``top_<level>%`` in the marker column.
    """
    if n_points < 10:
        raise DomainError(f"n_points must be >= 10, got {n_points}")
    cut = world_threshold(level)
    half_width = max(math.log(100.0), 6.0 * params.s, abs(cut - params.m) + 0.5)
    logs = np.linspace(params.m - half_width, params.m + half_width, n_points)
    markers = {
        params.m + 0.5 * params.s**2: "mean",
        cut: f"top_{level * 100:g}%",
    }
    points = {float(v): "" for v in logs}
    for v, name in markers.items():
        points[float(v)] = (points.get(float(v), "") + "|" + name).strip("|")
    grid = sorted(points)
    x = np.exp(np.array(grid))
    dens = lognormal_density(x, params)
    return [(float(xi), float(di), points[g]) for xi, di, g in zip(x, dens, grid)]


def trapezoid_mass(rows: Sequence[tuple[float, float, str]], lo: int = 0, hi: int | None = None) -> float:
    """Trapezoid integral of the density over ``rows[lo:hi]``."""
    part = rows[lo:hi]
    x = np.array([r[0] for r in part])
    y = np.array([r[1] for r in part])
    return float(np.sum(0.5 * (y[1:] + y[:-1]) * np.diff(x)))


def mass_left_of_mean(params: CitationModelParams) -> float:
    """Exact share of papers below the distribution mean: Phi(s / 2)."""
    return std_normal_cdf(params.s / 2.0)
