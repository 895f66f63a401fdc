"""Regenerate the bundled CSV fixtures under src/breakthroughs/data/.

Source tables give, per university, the top-0.02% probability (x1000),
the publication count and the expected number of breakthroughs, but not the
percentile shares they were computed from.  For each row this script picks a
target probability that reproduces both reported cells under half-up
rounding, chooses model parameters hitting it, and writes the pp_top50,
pp_top10 and pp_top1 values those parameters generate.

Scale defaults to 1 (the world's own spread).  Where the top-1% share of an
institution is known it is used as a second anchor and the scale is solved
for instead.

Run from the repository root:  python tools/build_fixtures.py [--world-researchers PATH]
"""

from __future__ import annotations

import argparse
import io
import sys
from decimal import Decimal
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))

from breakthroughs.citation_model import (  # noqa: E402
    BREAKTHROUGH_LEVEL,
    CitationModelParams,
    PercentileObservation,
    fit_two_point,
    std_normal_quantile,
    top_fraction_probability,
    world_threshold,
)
from breakthroughs.datasets import (  # noqa: E402
    InstitutionRecord,
    PopulationRecord,
    ResearcherRecord,
    normalize_name,
    write_institutions,
    write_populations,
    write_researchers,
)

DATA = ROOT / "src" / "breakthroughs" / "data"

# name | prob x1000 | publications | avances | ioannidis
SPAIN_2015 = """\
Barcelona|0,28|6015|1,71|140
Complutense de Madrid|0,08|5154|0,42|78
Autónoma de Barcelona|0,17|5102|0,86|70
Politécnica de Cataluña|0,11|3401|0,37|68
Valencia|0,12|4668|0,56|64
Zaragoza|0,06|3186|0,20|55
País Vasco|0,15|3945|0,60|51
Granada|0,16|4380|0,71|49
Autónoma de Madrid|0,24|3885|0,92|47
Politécnica de Valencia|0,13|3776|0,50|46
Sevilla|0,10|4124|0,41|46
Santiago de Compostela|0,10|2826|0,28|39
Pompeu Fabra|0,50|1355|0,68|34
Oviedo|0,07|2491|0,17|29
Alicante|0,04|1710|0,06|28
Murcia|0,09|2115|0,19|27
Politécnica de Madrid|0,10|3123|0,33|25
Extremadura|0,05|1349|0,07|23
Salamanca|0,08|1614|0,13|21
Vigo|0,08|1841|0,14|20
Alcalá|0,08|1239|0,09|19
Córdoba|0,09|1650|0,15|19
Gerona|0,37|1149|0,42|18
Málaga|0,10|1925|0,19|18
Islas Baleares|0,32|1137|0,37|18
Castilla-La Mancha|0,06|2055|0,12|17
Valladolid|0,04|1574|0,07|16
Rovira i Virgili|0,21|1608|0,33|14
Lérida|0,19|838|0,16|14
Carlos III de Madrid|0,12|1560|0,18|13
Cantabria|0,13|1203|0,16|13
Navarra|0,34|1255|0,43|13
Almería|0,05|888|0,04|10
Rey Juan Carlos|0,16|1013|0,16|9
Miguel Hernández|0,09|1068|0,10|8
Jaume I|0,10|1216|0,12|8
La Laguna|0,06|1179|0,07|7
Las Palmas de Gran Canaria|0,03|929|0,02|7
La Coruña|0,09|1194|0,10|6
Cádiz|0,05|1095|0,06|5
Jaén|0,04|996|0,04|3
"""

# name | prob x1000 | publications | avances
SPAIN_2006 = """\
Barcelona|0,20|5148|1,04
Complutense de Madrid|0,09|4371|0,39
Autónoma de Barcelona|0,15|3848|0,57
Politécnica de Cataluña|0,13|2528|0,33
Valencia|0,11|3482|0,37
Zaragoza|0,16|2506|0,39
País Vasco|0,11|2438|0,26
Granada|0,10|2900|0,28
Autónoma de Madrid|0,21|3314|0,68
Politécnica de Valencia|0,17|2441|0,42
Sevilla|0,12|2611|0,32
Santiago de Compostela|0,15|2670|0,40
Pompeu Fabra|0,48|668|0,32
Oviedo|0,06|1967|0,12
Alicante|0,33|1225|0,40
Murcia|0,05|1737|0,08
Politécnica de Madrid|0,04|1801|0,07
Extremadura|0,06|1115|0,07
Salamanca|0,04|1471|0,05
Vigo|0,14|1516|0,22
Alcalá|0,07|916|0,06
Córdoba|0,13|1202|0,16
Gerona|0,27|688|0,18
Málaga|0,04|1187|0,05
Islas Baleares|0,33|794|0,26
Castilla-La Mancha|0,12|1393|0,17
Valladolid|0,06|1200|0,07
Rovira i Virgili|0,26|1163|0,31
Lérida|0,10|516|0,05
Carlos III de Madrid|0,14|909|0,13
Cantabria|0,07|962|0,07
Navarra|0,05|1201|0,06
Almería|0,12|562|0,07
Rey Juan Carlos|0,16|644|0,10
Miguel Hernández|0,09|722|0,06
Jaume I|0,15|636|0,09
La Laguna|0,02|1042|0,02
Las Palmas de Gran Canaria|0,03|521|0,01
La Coruña|0,03|714|0,02
Cádiz|0,07|633|0,04
Jaén|0,03|611|0,02
"""

# name | country | prob x1000 | publications | avances | ioannidis
INTERNATIONAL = """\
University of Queensland|Australia|0,59|12316|7,23|393
University of Sydney|Australia|0,56|12604|7,05|421
University of Toronto|Canada|0,69|22995|15,7|933
University of British Columbia|Canada|0,59|12988|7,65|687
Ludwig-Maximilians-Universität München|Alemania|0,57|7409|4,19|229
University of Freiburg|Alemania|0,32|4923|1,59|193
Karolinska Institutet|Suecia|0,51|8324|4,28|287
Lund University|Suecia|0,30|8181|2,44|258
Sorbonne University|Francia|0,43|8767|3,80|254
Université Paris-Saclay|Francia|0,46|8235|3,76|214
University of Padova|Italia|0,24|7678|1,83|214
University of Bologna|Italia|0,21|7271|1,51|190
Utrecht University|Países Bajos|1,04|9391|9,81|196
University of Amsterdam|Países Bajos|0,95|9081|8,66|209
Eidgenössische Technische Hochschule (ETH) Zürich|Suiza|1,88|9342|17,6|406
Ecole Polytechnique Fédérale de Lausanne|Suiza|1,85|5506|10,1|233
University of Cambridge|Reino Unido|1,90|13485|25,6|605
University of Oxford|Reino Unido|2,00|15353|30,7|801
Harvard University|EEUU|3,42|33722|115,3|1510
Massachusetts Institute of Technology (MIT)|EEUU|5,48|10563|57,9|619
University of California, Berkeley|EEUU|3,31|10671|35,2|734
University of California, San Francisco|EEUU|2,21|9994|22,1|686
University of California, Los Angeles|EEUU|1,29|13645|17,5|634
University of California, San Diego|EEUU|1,71|12135|20,7|474
"""

# name | country | prob x1000 | publications | avances | ioannidis
TECHNICAL = """\
Massachusetts Institute of Technology (MIT)|EEUU|5,49|10573|57,99|619
Eidgenössische Technische Hochschule (ETH) Zürich|Suiza|1,88|9342|17,60|406
Ecole Polytechnique Fédérale de Lausanne|Suiza|1,85|5506|10,16|233
Technical University of Denmark|Dinamarca|0,56|5860|3,29|246
Technical University of Munich|Alemania|0,43|8142|3,48|174
Universidad Politécnica de Cataluña|España|0,11|3401|0,37|68
Universidad Politécnica de Valencia|España|0,13|3776|0,50|46
Universidad Politécnica de Madrid|España|0,11|3123|0,33|25
"""

# country | ioannidis | population (millions)
COUNTRIES = """\
Suiza|2545|8,6
Dinamarca|1494|5,8
Suecia|2545|10,3
Gran Bretaña|15002|64
Australia|5440|25
EEUU|68015|328,2
Países Bajos|3352|17
Canadá|7224|37,6
Nueva Zelanda|802|5
Bélgica|1411|11,4
Austria|961|8,9
Alemania|8791|83
Francia|5011|67
Italia|4006|60
Grecia|647|10,7
España|2291|47
Portugal|384|10,3
"""

SPAIN_TECHNICAL = {"Politécnica de Cataluña", "Politécnica de Valencia", "Politécnica de Madrid"}

# Known top-1% shares, 2015-2018: Harvard 3.3%, Barcelona 1.1%.
TOP1_ANCHORS = {("Harvard University", "2015-2018"): 0.033, ("Barcelona", "2015-2018"): 0.011}

# Researchers outside the universities: CSIC and everything else.
SPAIN_OTHER = {"CSIC": 393, "Otras instituciones": 2291 - 1215 - 393}

FIELDS = (
    "Biology", "Chemistry", "Clinical Medicine", "Computer Science", "Earth Sciences",
    "Economics", "Engineering", "Mathematics", "Physics", "Psychology",
)


def _dec(text: str) -> Decimal:
    return Decimal(text.replace(",", "."))


def _half(text: str) -> Decimal:
    exp = _dec(text).as_tuple().exponent
    return Decimal(5) * Decimal(10) ** (exp - 1)


def target_probability(prob_x1000: str, pubs: int, avances: str) -> tuple[float, bool]:
    """Midpoint of the probabilities consistent with both reported cells.

    Returns (probability, consistent); when the two cells cannot both be
    reproduced, the reported probability wins.
    """
    p, hp = _dec(prob_x1000) / 1000, _half(prob_x1000) / 1000
    a, ha = _dec(avances), _half(avances)
    lo = max(p - hp, (a - ha) / pubs)
    hi = min(p + hp, (a + ha) / pubs)
    if lo < hi:
        return float((lo + hi) / 2), True
    return float(p), False


def params_for(name: str, period: str, p: float) -> CitationModelParams:
    anchor = TOP1_ANCHORS.get((name, period))
    if anchor is not None:
        return fit_two_point(
            PercentileObservation(0.01, anchor),
            PercentileObservation(BREAKTHROUGH_LEVEL, p),
        )
    s = 1.0
    return CitationModelParams(world_threshold(BREAKTHROUGH_LEVEL) + s * std_normal_quantile(p), s)


def _pp(params: CitationModelParams, level: float) -> float:
    return float(f"{top_fraction_probability(params, level):.12g}")


def institution_record(name, country, period, prob, pubs, avances, tags=()):
    p, consistent = target_probability(prob, pubs, avances)
    if not consistent:
        print(f"  {period} {name}: reported probability {prob} and avances {avances} "
              f"disagree for {pubs} publications; probability kept")
    params = params_for(name, period, p)
    return InstitutionRecord(
        institution=name,
        country=country,
        period=period,
        counting="fractional",
        publications=pubs,
        pp_top50=_pp(params, 0.50),
        pp_top10=_pp(params, 0.10),
        pp_top1=_pp(params, 0.01),
        tags=frozenset(tags),
    )


def _rows(block: str) -> list[list[str]]:
    return [line.split("|") for line in block.strip().splitlines()]


def _write(name: str, writer, records) -> None:
    buf = io.StringIO()
    writer(records, buf)
    (DATA / name).write_text(buf.getvalue(), encoding="utf-8")
    print(f"wrote {name} ({len(records)} rows)")


def main(world_path: str | None = None) -> None:
    DATA.mkdir(parents=True, exist_ok=True)

    spain_2015 = [
        institution_record(n, "España", "2015-2018", pr, int(pu), av,
                           ["technical"] if n in SPAIN_TECHNICAL else [])
        for n, pr, pu, av, _ in _rows(SPAIN_2015)
    ]
    _write("institutions_spain_2015-2018.csv", write_institutions, spain_2015)

    spain_2006 = [
        institution_record(n, "España", "2006-2009", pr, int(pu), av,
                           ["technical"] if n in SPAIN_TECHNICAL else [])
        for n, pr, pu, av in _rows(SPAIN_2006)
    ]
    _write("institutions_spain_2006-2009.csv", write_institutions, spain_2006)

    intl = [
        institution_record(n, c, "2015-2018", pr, int(pu), av)
        for n, c, pr, pu, av, _ in _rows(INTERNATIONAL)
    ]
    _write("institutions_international_2015-2018.csv", write_institutions, intl)

    tech = [
        institution_record(n, c, "2015-2018", pr, int(pu), av, ["technical"])
        for n, c, pr, pu, av, _ in _rows(TECHNICAL)
    ]
    _write("institutions_technical_2015-2018.csv", write_institutions, tech)

    researchers = []
    per_institution = [(n, int(k)) for n, _, _, _, k in _rows(SPAIN_2015)]
    per_institution += list(SPAIN_OTHER.items())
    for inst, k in per_institution:
        for _ in range(k):
            i = len(researchers)
            researchers.append(
                ResearcherRecord(
                    researcher_id=f"es-{i + 1:05d}",
                    institution=inst,
                    country="España",
                    field=FIELDS[i % len(FIELDS)],
                )
            )
    _write("researchers_spain.csv", write_researchers, researchers)
    if world_path:
        world = world_researchers(researchers)
        with open(world_path, "w", encoding="utf-8", newline="") as fh:
            write_researchers(world, fh)
        print(f"wrote {world_path} ({len(world)} rows)")

    pops = [PopulationRecord(c, float(_dec(pop))) for c, _, pop in _rows(COUNTRIES)]
    _write("populations.csv", write_populations, pops)



def world_researchers(spain: list[ResearcherRecord]) -> list[ResearcherRecord]:
    """Spain's researchers plus synthetic rows for the other countries."""
    out = list(spain)
    for country, k, _ in _rows(COUNTRIES):
        if country == "España":
            continue
        prefix = normalize_name(country).replace(" ", "-")
        out += [
            ResearcherRecord(f"{prefix}-{i + 1:05d}", "", country, FIELDS[i % len(FIELDS)])
            for i in range(int(k))
        ]
    return out


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument(
        "--world-researchers",
        metavar="PATH",
        help="also write a researchers CSV covering every country in populations.csv",
    )
    main(parser.parse_args().world_researchers)
