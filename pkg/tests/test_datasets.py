import io

import pytest
from hypothesis import given
from hypothesis import strategies as st

from breakthroughs.datasets import (
    InstitutionRecord,
    PopulationRecord,
    ResearcherRecord,
    normalize_name,
    parse_aliases,
    parse_institutions,
    parse_populations,
    parse_researchers,
    read_institutions,
    read_populations,
    read_researchers,
    write_institutions,
    write_populations,
    write_researchers,
)
from breakthroughs.errors import InputFormatError

from .reference_values import COUNTRIES, SPAIN_2015

INST_HEADER = "institution,country,period,counting,publications,pp_top50,pp_top10,pp_top1,tags\n"
RES_HEADER = "researcher_id,name,institution,country,field,rank_score\n"
POP_HEADER = "country,population_millions\n"


def institutions(body):
    return parse_institutions(io.StringIO(INST_HEADER + body))


class TestInstitutions:
    def test_single_row(self):
        recs, warns = institutions(
            "Universidad de Barcelona,ES,2015-2018,fractional,6015,0.55,0.12,0.015,\n"
        )
        assert warns == []
        assert recs == [
            InstitutionRecord(
                "Universidad de Barcelona", "ES", "2015-2018", "fractional", 6015, 0.55, 0.12, 0.015
            )
        ]
        assert recs[0].percentiles() == [(0.5, 0.55), (0.1, 0.12), (0.01, 0.015)]

    def test_inverted_percentiles_warn(self):
        recs, warns = institutions("X,ES,2015-2018,fractional,100,0.05,0.12,0.01,\n")
        assert recs == []
        assert len(warns) == 1 and warns[0].line == 2
        assert "exceeds" in warns[0].message

    def test_malformed_header(self):
        with pytest.raises(InputFormatError, match="malformed header"):
            parse_institutions(io.StringIO("institution,pubs\nX,1\n"))

    def test_empty_input(self):
        with pytest.raises(InputFormatError):
            parse_institutions(io.StringIO(""))

    def test_header_only(self):
        assert institutions("") == ([], [])

    @pytest.mark.parametrize(
        "row, fragment",
        [
            ("X,ES,p,fractional,-5,,,,", "non-negative"),
            ("X,ES,p,fractional,abc,,,,", "not a number"),
            ("X,ES,p,fractional,10,1.2,,,", "outside"),
            ("X,ES,p,whole,10,,,,", "counting"),
            (",ES,p,fractional,10,,,,", "institution is empty"),
            ("X,ES,p,fractional,10", "expected 9 fields"),
            ("X,ES,p,fractional,0,0.5,0.1,,", "without publications"),
            ("X,ES,p,fractional,nan,,,,", "not finite"),
        ],
    )
    def test_bad_rows_become_warnings(self, row, fragment):
        recs, warns = institutions(row + "\nY,ES,p,fractional,10,,,,\n")
        assert [r.institution for r in recs] == ["Y"]
        assert len(warns) == 1 and fragment in warns[0].message

    def test_comma_decimal_is_rejected(self):
        recs, warns = institutions('X,ES,p,fractional,10,"0,55",,,\n')
        assert recs == [] and "not a number" in warns[0].message

    def test_bom_crlf_and_quotes(self):
        text = "\ufeff" + INST_HEADER.replace("\n", "\r\n")
        text += '"University of California, Berkeley",EEUU,2015-2018,FULL,10671,,0.3,0.05,a|b\r\n'
        recs, warns = parse_institutions(io.StringIO(text, newline=""))
        assert warns == []
        (r,) = recs
        assert r.institution == "University of California, Berkeley"
        assert r.counting == "full"
        assert r.tags == frozenset({"a", "b"})
        assert r.percentiles() == [(0.1, 0.3), (0.01, 0.05)]

    def test_fractional_publications_kept(self):
        (r,), _ = institutions("X,ES,p,fractional,12.5,,,,\n")
        assert r.publications == 12.5

    def test_bundled_fixture(self, spain_2015):
        recs, warns = read_institutions(spain_2015)
        assert warns == []
        assert len(recs) == 41
        # Rows sum to one more than the reference total, within per-row rounding.
        assert sum(r.publications for r in recs) == 92831
        assert [r.institution for r in recs] == [row[0] for row in SPAIN_2015]
        tagged = {r.institution for r in recs if "technical" in r.tags}
        assert tagged == {"Politécnica de Cataluña", "Politécnica de Valencia", "Politécnica de Madrid"}

    def test_missing_file(self, tmp_path):
        missing = tmp_path / "nope.csv"
        with pytest.raises(InputFormatError, match="nope.csv"):
            read_institutions(missing)


class TestResearchers:
    def test_rows_and_duplicates(self):
        text = RES_HEADER + (
            "r1,Ana,Barcelona,España,Biology,\n"
            "r2,Luis,Barcelona,España,Physics,1.5\n"
            "r3,,Navarra,España,,\n"
            "r2,Luis again,Navarra,España,,\n"
        )
        recs, warns = parse_researchers(io.StringIO(text))
        assert [r.researcher_id for r in recs] == ["r1", "r2", "r3"]
        assert recs[1].rank_score == 1.5 and recs[0].rank_score is None
        assert len(warns) == 1 and "duplicate researcher_id" in warns[0].message
        assert warns[0].line == 5

    def test_bundled_spain_list(self, spain_researchers):
        recs, warns = read_researchers(spain_researchers)
        assert warns == []
        assert len(recs) == 2291
        assert {r.country for r in recs} == {"España"}
        by_inst = {}
        for r in recs:
            by_inst[r.institution] = by_inst.get(r.institution, 0) + 1
        for name, *_, count in SPAIN_2015:
            assert by_inst[name] == count


class TestPopulations:
    def test_bundled(self, populations):
        recs, warns = read_populations(populations)
        assert warns == []
        assert len(recs) == 17
        assert {r.country: r.population_millions for r in recs}["España"] == 47.0
        assert [r.country for r in recs] == [c[0] for c in COUNTRIES]

    def test_invalid_and_duplicate(self):
        text = POP_HEADER + "España,47\nFrancia,many\nGrecia,0\nespaña,46\n"
        recs, warns = parse_populations(io.StringIO(text))
        assert recs == [PopulationRecord("España", 47.0)]
        assert [w.line for w in warns] == [3, 4, 5]
        assert "duplicate country" in warns[-1].message


def test_aliases():
    mapping = parse_aliases(io.StringIO("from,to\nUB,Barcelona\n Universitat  de Barcelona ,Barcelona\n"))
    assert mapping == {"ub": "Barcelona", "universitat de barcelona": "Barcelona"}
    with pytest.raises(InputFormatError):
        parse_aliases(io.StringIO("from,to\nUB,\n"))


def test_normalize_name():
    composed = "Polit\u00e9cnica"
    decomposed = "Polite\u0301cnica"
    assert normalize_name(decomposed) == normalize_name(composed.upper()) == "politécnica"
    assert normalize_name("  La   Laguna ") == "la laguna"


names = st.text(
    alphabet=st.characters(blacklist_categories=("Cc", "Cs", "Zl", "Zp")), min_size=1, max_size=20
).filter(lambda s: s.strip() == s and s != "")
fractions = st.floats(0, 1, allow_nan=False)


@st.composite
def institution_records(draw):
    ordered = sorted((draw(fractions) for _ in range(3)), reverse=True)
    keep = draw(st.lists(st.booleans(), min_size=3, max_size=3))
    values = [v if k else None for v, k in zip(ordered, keep)]
    return InstitutionRecord(
        institution=draw(names),
        country=draw(names),
        period=draw(names),
        counting=draw(st.sampled_from(["fractional", "full"])),
        publications=draw(st.integers(1, 10**6) | st.floats(0.5, 1e6)),
        pp_top50=values[0],
        pp_top10=values[1],
        pp_top1=values[2],
        tags=frozenset(draw(st.lists(st.sampled_from(["technical", "x", "y"]), max_size=3))),
    )


@given(st.lists(institution_records(), max_size=8))
def test_institution_round_trip(records):
    buf = io.StringIO()
    write_institutions(records, buf)
    back, warns = parse_institutions(io.StringIO(buf.getvalue()))
    assert warns == []
    assert back == [
        r if not float(r.publications).is_integer() else
        InstitutionRecord(**{**r.__dict__, "publications": int(r.publications)})
        for r in records
    ]


@given(
    st.lists(
        st.builds(
            ResearcherRecord,
            researcher_id=names,
            institution=names,
            country=names,
            field=names,
            name=names,
            rank_score=st.none() | st.floats(-1e6, 1e6),
        ),
        max_size=8,
        unique_by=lambda r: r.researcher_id,
    )
)
def test_researcher_round_trip(records):
    buf = io.StringIO()
    write_researchers(records, buf)
    back, warns = parse_researchers(io.StringIO(buf.getvalue()))
    assert (back, warns) == (records, [])


@given(
    st.lists(
        st.builds(PopulationRecord, country=names, population_millions=st.floats(1e-3, 2e3)),
        max_size=8,
        unique_by=lambda r: normalize_name(r.country),
    )
)
def test_population_round_trip(records):
    buf = io.StringIO()
    write_populations(records, buf)
    back, warns = parse_populations(io.StringIO(buf.getvalue()))
    assert (back, warns) == (records, [])
