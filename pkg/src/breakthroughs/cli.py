"""Command-line entry point: ``breakthroughs {assess,ratio,compare,simulate,curve}``.

Exit codes: 0 on success (warnings allowed), 1 on fatal input errors, 2 when
an internal invariant fails.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path
from typing import Sequence

from . import __version__
from .analysis import (
    ComparisonTable,
    assess_all,
    compare_periods,
    count_researchers,
    per_million,
    pooled_excluding,
    pooled_probability,
    rank,
)
from .citation_model import BREAKTHROUGH_LEVEL, CitationModelParams, check_level
from .datasets import (
    read_aliases,
    read_institutions,
    read_populations,
    read_researchers,
)
from .errors import BreakthroughsError
from .report import (
    Column,
    Row,
    Table,
    display_fixed,
    display_number,
    display_x1000,
    emit_distribution_curve,
    render,
)
from .simulate import SimulationSpec, validate_fit_pipeline

log = logging.getLogger("breakthroughs")

TOOL = "breakthroughs"


class InvariantError(AssertionError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _level(text: str) -> float:
    try:
        return check_level(float(text))
    except (ValueError, BreakthroughsError):
        raise argparse.ArgumentTypeError(f"level must be a number in (0, 1), got {text!r}")


def _levels(text: str) -> list[float]:
    return [_level(t) for t in text.split(",") if t.strip()]


def _names(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def _warn_parse(path, warnings) -> None:
    for w in warnings:
        log.warning("%s %s", path, w)


def _meta(command: str, level: float | None, **extra) -> dict:
    meta = {"tool": TOOL, "version": __version__, "command": command, "level": level}
    meta.update(extra)
    return meta


# -- assess -----------------------------------------------------------------

ASSESS_COLUMNS = [
    Column("institution", "Institution", numeric=False),
    Column("probability_x1000", "Probability (x1000)"),
    Column("publications", "Publications"),
    Column("avances", "Avances"),
    Column("ioannidis", "Ioannidis"),
    Column("confidence", "Confidence", numeric=False),
]


def assessment_table(reports, skipped, level: float, meta: dict) -> Table:
    table = Table("assessment", ASSESS_COLUMNS, meta=meta, title="Assessment")
    for r in reports:
        if r.expected_breakthroughs != r.probability * r.publications:
            raise InvariantError(f"{r.institution}: avances differ from probability x publications")
        table.rows.append(
            Row(
                cells={
                    "institution": r.institution,
                    "probability_x1000": display_x1000(r.probability),
                    "publications": display_number(r.publications),
                    "avances": display_fixed(r.expected_breakthroughs),
                    "ioannidis": "" if r.ioannidis_count is None else str(r.ioannidis_count),
                    "confidence": r.confidence,
                },
                record={
                    "institution": r.institution,
                    "country": r.country,
                    "period": r.period,
                    "probability": r.probability,
                    "publications": r.publications,
                    "expected_breakthroughs": r.expected_breakthroughs,
                    "ioannidis_count": r.ioannidis_count,
                    "confidence": r.confidence,
                    "m": r.params.m if r.params else None,
                    "s": r.params.s if r.params else None,
                    "tags": sorted(r.tags),
                },
            )
        )
    total_pubs = math.fsum(r.publications for r in reports)
    total_av = math.fsum(r.expected_breakthroughs for r in reports)
    counted = [r.ioannidis_count for r in reports if r.ioannidis_count is not None]
    total_ioannidis = sum(counted) if counted else None
    table.summary.append(
        Row(
            cells={
                "institution": "Total",
                "probability_x1000": "",
                "publications": display_number(total_pubs),
                "avances": display_fixed(total_av),
                "ioannidis": "" if total_ioannidis is None else str(total_ioannidis),
                "confidence": "",
            },
            record={
                "publications": total_pubs,
                "expected_breakthroughs": total_av,
                "ioannidis_count": total_ioannidis,
            },
            label="total",
        )
    )
    table.skipped = [
        {"institution": s.institution, "period": s.period, "reason": s.reason} for s in skipped
    ]
    return table


def cmd_assess(args) -> Table:
    records, warnings = read_institutions(args.institutions)
    _warn_parse(args.institutions, warnings)
    if not records:
        raise BreakthroughsError(f"{args.institutions}: no usable institution records")
    if args.period:
        records = [r for r in records if r.period == args.period]
        if not records:
            raise BreakthroughsError(f"no records for period {args.period!r}")
    aliases = read_aliases(args.aliases) if args.aliases else None
    researchers = None
    if args.researchers:
        researchers, rwarn = read_researchers(args.researchers)
        _warn_parse(args.researchers, rwarn)

    reports, skipped = assess_all(records, researchers, args.level, aliases=aliases)
    tags = _names(args.tags) if args.tags else []
    if args.rank:
        reports = rank(reports, args.rank, tags)
    elif tags:
        reports = [r for r in reports if set(tags) <= r.tags]
    meta = _meta(
        "assess",
        args.level,
        counting=",".join(sorted({r.counting for r in records})),
        period=",".join(sorted({r.period for r in records})),
        tags=tags,
    )
    return assessment_table(reports, skipped, args.level, meta)


# -- ratio --------------------------------------------------------------------

RATIO_COLUMNS = [
    Column("country", "Country", numeric=False),
    Column("ioannidis", "Ioannidis"),
    Column("population_millions", "Population (millions)"),
    Column("ratio", "Ratio per million"),
]


def ratio_table(aggregates, meta: dict) -> Table:
    table = Table("ratio", RATIO_COLUMNS, meta=meta, title="Researchers per million inhabitants")
    for a in aggregates:
        table.rows.append(
            Row(
                cells={
                    "country": a.country,
                    "ioannidis": str(a.ioannidis_count),
                    "population_millions": display_number(a.population_millions),
                    "ratio": display_fixed(a.per_million, 0),
                },
                record={
                    "country": a.country,
                    "ioannidis_count": a.ioannidis_count,
                    "population_millions": a.population_millions,
                    "per_million": a.per_million,
                },
            )
        )
    return table


def cmd_ratio(args) -> Table:
    researchers, rwarn = read_researchers(args.researchers)
    _warn_parse(args.researchers, rwarn)
    populations, pwarn = read_populations(args.populations)
    _warn_parse(args.populations, pwarn)
    aliases = read_aliases(args.aliases) if args.aliases else None
    counts = count_researchers(researchers, "country", aliases)
    return ratio_table(per_million(counts, populations), _meta("ratio", None))


# -- compare ------------------------------------------------------------------

COMPARE_COLUMNS = [
    Column("institution", "Institution", numeric=False),
    Column("probability_a", "Probability A (x1000)"),
    Column("probability_b", "Probability B (x1000)"),
    Column("publications_a", "Publications A"),
    Column("publications_b", "Publications B"),
    Column("avances_a", "Avances A"),
    Column("avances_b", "Avances B"),
]


def _opt(fn, value):
    return "" if value is None else fn(value)


def comparison_table(cmp: ComparisonTable, meta: dict, exclude=(), unweighted=False) -> Table:
    columns = [
        Column(c.key, c.header.replace(" A", f" {cmp.period_a}").replace(" B", f" {cmp.period_b}"), c.numeric)
        for c in COMPARE_COLUMNS
    ]
    table = Table("comparison", columns, meta=meta, title="Period comparison")
    for r in cmp.rows:
        table.rows.append(
            Row(
                cells={
                    "institution": r.institution,
                    "probability_a": _opt(display_x1000, r.probability_a),
                    "probability_b": _opt(display_x1000, r.probability_b),
                    "publications_a": _opt(display_number, r.publications_a),
                    "publications_b": _opt(display_number, r.publications_b),
                    "avances_a": _opt(display_fixed, r.avances_a),
                    "avances_b": _opt(display_fixed, r.avances_b),
                },
                record={
                    "institution": r.institution,
                    "probability_a": r.probability_a,
                    "probability_b": r.probability_b,
                    "publications_a": r.publications_a,
                    "publications_b": r.publications_b,
                    "avances_a": r.avances_a,
                    "avances_b": r.avances_b,
                    "probability_delta": r.probability_delta,
                    "avances_delta": r.avances_delta,
                },
            )
        )

    def summary(label, name, pa=None, pb=None, na=None, nb=None, aa=None, ab=None):
        table.summary.append(
            Row(
                cells={
                    "institution": name,
                    "probability_a": _opt(display_x1000, pa),
                    "probability_b": _opt(display_x1000, pb),
                    "publications_a": _opt(display_number, na),
                    "publications_b": _opt(display_number, nb),
                    "avances_a": _opt(display_fixed, aa),
                    "avances_b": _opt(display_fixed, ab),
                },
                record={
                    "probability_a": pa,
                    "probability_b": pb,
                    "publications_a": na,
                    "publications_b": nb,
                    "avances_a": aa,
                    "avances_b": ab,
                },
                label=label,
            )
        )

    summary("total", "Total", na=cmp.publications_a, nb=cmp.publications_b,
            aa=cmp.avances_a, ab=cmp.avances_b)
    summary("mean", "Media", pa=cmp.pooled_a, pb=cmp.pooled_b)
    if unweighted:
        summary(
            "unweighted_mean",
            "Media (unweighted)",
            pa=pooled_probability(cmp.reports_a, weighted=False) if cmp.reports_a else None,
            pb=pooled_probability(cmp.reports_b, weighted=False) if cmp.reports_b else None,
        )
    if exclude:
        summary(
            "mean_excluding",
            "Media excluding " + ", ".join(exclude),
            pa=pooled_excluding(cmp.reports_a, exclude),
            pb=pooled_excluding(cmp.reports_b, exclude),
        )
    table.skipped = [
        {"institution": s.institution, "period": s.period, "reason": s.reason}
        for s in cmp.skipped
    ]
    return table


def cmd_compare(args) -> Table:
    records_a, wa = read_institutions(args.institutions_a)
    _warn_parse(args.institutions_a, wa)
    records_b, wb = read_institutions(args.institutions_b)
    _warn_parse(args.institutions_b, wb)
    if not records_a or not records_b:
        raise BreakthroughsError("both institution files need at least one usable record")
    aliases = read_aliases(args.aliases) if args.aliases else None
    cmp = compare_periods(records_a, records_b, args.level, aliases=aliases)
    exclude = _names(args.exclude) if args.exclude else []
    meta = _meta(
        "compare",
        args.level,
        counting=",".join(sorted({r.counting for r in records_a + records_b})),
        period_a=cmp.period_a,
        period_b=cmp.period_b,
        excluded=exclude,
    )
    return comparison_table(cmp, meta, exclude, args.unweighted)


# -- simulate -----------------------------------------------------------------

SIMULATE_COLUMNS = [
    Column("trial", "Trial"),
    Column("m", "m"),
    Column("s", "s"),
    Column("m_error", "m error"),
    Column("s_error", "s error"),
    Column("analytic_x1000", "Analytic p (x1000)"),
    Column("empirical_x1000", "Empirical p (x1000)"),
]


def _g(value: float | None, places: int = 6) -> str:
    return "" if value is None else f"{value:.{places}f}"


def cmd_simulate(args) -> Table:
    params = CitationModelParams(args.m, args.s)
    spec = SimulationSpec(
        params=params,
        n_papers=args.papers,
        n_trials=args.trials,
        seed=args.seed,
        levels=tuple(args.levels),
        assessment_level=args.level,
        world_size=args.world_size,
    )
    report = validate_fit_pipeline(spec, workers=args.workers)
    meta = _meta(
        "simulate",
        args.level,
        true_m=params.m,
        true_s=params.s,
        true_probability=report.true_p,
        papers=args.papers,
        trials=args.trials,
        seed=args.seed,
        levels=list(spec.levels),
        world_size=args.world_size,
    )
    table = Table("simulation", SIMULATE_COLUMNS, meta=meta, title="Fit pipeline validation")
    for t, d in zip(report.trials, report.discrepancies()):
        for w in t.warnings:
            log.warning("trial %d: %s", t.trial, w)
        if t.error:
            log.warning("trial %d: %s", t.trial, t.error)
        table.rows.append(
            Row(
                cells={
                    "trial": str(t.trial),
                    "m": _g(t.fitted.m if t.fitted else None),
                    "s": _g(t.fitted.s if t.fitted else None),
                    "m_error": _g(d["m"]),
                    "s_error": _g(d["s"]),
                    "analytic_x1000": _g(None if t.analytic_p is None else t.analytic_p * 1000, 4),
                    "empirical_x1000": _g(t.empirical_p * 1000, 4),
                },
                record={
                    "trial": t.trial,
                    "m": t.fitted.m if t.fitted else None,
                    "s": t.fitted.s if t.fitted else None,
                    "m_error": d["m"],
                    "s_error": d["s"],
                    "proportions": list(t.proportions),
                    "analytic_probability": t.analytic_p,
                    "empirical_probability": t.empirical_p,
                    "error": t.error,
                },
            )
        )
    table.summary.append(
        Row(
            cells={
                "trial": "",
                "m": _g(params.m),
                "s": _g(params.s),
                "m_error": "",
                "s_error": "",
                "analytic_x1000": _g(report.true_p * 1000, 4),
                "empirical_x1000": "",
            },
            record={"m": params.m, "s": params.s, "analytic_probability": report.true_p},
            label="true",
        )
    )
    return table


# -- curve --------------------------------------------------------------------

CURVE_COLUMNS = [
    Column("citations_relative", "Citations / world median"),
    Column("density", "Density"),
    Column("marker", "Marker", numeric=False),
]


def cmd_curve(args) -> Table:
    params = CitationModelParams(args.m, args.s)
    rows = emit_distribution_curve(params, args.points, args.level)
    table = Table(
        "curve",
        CURVE_COLUMNS,
        meta=_meta("curve", args.level, m=params.m, s=params.s, points=args.points),
        title="Citation distribution",
    )
    for x, d, marker in rows:
        table.rows.append(
            Row(
                cells={"citations_relative": f"{x:.9g}", "density": f"{d:.9g}", "marker": marker},
                record={"citations_relative": x, "density": d, "marker": marker},
            )
        )
    return table


# -- wiring -------------------------------------------------------------------

COMMANDS = {
    "assess": cmd_assess,
    "ratio": cmd_ratio,
    "compare": cmd_compare,
    "simulate": cmd_simulate,
    "curve": cmd_curve,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("markdown", "csv", "json"))
    common.add_argument("--output", metavar="PATH", help="write here instead of stdout")
    common.add_argument("--locale", choices=("en", "es"), default="en",
                        help="es prints decimal commas in markdown output")
    common.add_argument("--level", type=_level, default=BREAKTHROUGH_LEVEL,
                        help="assessment level as a fraction (default 0.0002)")

    parser = _Parser(prog=TOOL, description="Percentile-based research assessment.")
    parser.add_argument("--version", action="version", version=f"{TOOL} {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("assess", parents=[common], help="per-institution assessment table")
    p.add_argument("--institutions", required=True, metavar="PATH")
    p.add_argument("--researchers", metavar="PATH")
    p.add_argument("--aliases", metavar="PATH")
    p.add_argument("--period", metavar="LABEL")
    p.add_argument("--tags", metavar="LIST", help="comma-separated; keep rows carrying all")
    p.add_argument("--rank", choices=("probability", "avances", "ioannidis", "publications"))

    p = sub.add_parser("ratio", parents=[common], help="researchers per million inhabitants")
    p.add_argument("--researchers", required=True, metavar="PATH")
    p.add_argument("--populations", required=True, metavar="PATH")
    p.add_argument("--aliases", metavar="PATH")

    p = sub.add_parser("compare", parents=[common], help="two-period comparison")
    p.add_argument("--institutions-a", required=True, metavar="PATH")
    p.add_argument("--institutions-b", required=True, metavar="PATH")
    p.add_argument("--exclude", metavar="NAME[,NAME...]")
    p.add_argument("--aliases", metavar="PATH")
    p.add_argument("--unweighted", action="store_true",
                   help="also report the unweighted mean probability")

    p = sub.add_parser("simulate", parents=[common], help="Monte Carlo check of the fit")
    p.add_argument("--m", type=float, required=True)
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--papers", type=_positive_int, required=True)
    p.add_argument("--trials", type=_positive_int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--levels", type=_levels, default=[0.1, 0.01], metavar="LIST")
    p.add_argument("--world-size", type=int, default=0,
                   help="sample a world of this size instead of using analytic cuts")
    p.add_argument("--workers", type=_positive_int, default=1)

    p = sub.add_parser("curve", parents=[common], help="lognormal density curve data")
    p.add_argument("--m", type=float, default=0.0)
    p.add_argument("--s", type=float, default=1.0)
    p.add_argument("--points", type=int, default=100)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("warning: %(message)s"))
    saved = (log.handlers[:], log.propagate, log.level)
    log.handlers[:] = [handler]
    log.propagate = False
    log.setLevel(logging.WARNING)
    try:
        return _run(args)
    finally:
        # Leave logging as found so library callers in the same process are unaffected.
        log.handlers[:], log.propagate = saved[0], saved[1]
        log.setLevel(saved[2])


def _run(args) -> int:
    fmt = args.format or ("csv" if args.command == "curve" else "markdown")
    try:
        table = COMMANDS[args.command](args)
        text = render(table, fmt, args.locale)
    except InvariantError as exc:
        print(f"{TOOL}: internal invariant violated: {exc}", file=sys.stderr)
        return 2
    except BreakthroughsError as exc:
        print(f"{TOOL}: error: {exc}", file=sys.stderr)
        return 1

    if args.output:
        try:
            Path(args.output).write_text(text, encoding="utf-8")
        except OSError as exc:
            print(f"{TOOL}: error: cannot write {args.output}: {exc.strerror}", file=sys.stderr)
            return 1
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
