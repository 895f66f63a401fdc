import io
from dataclasses import dataclass

import pytest

from breakthroughs import cli
from breakthroughs.data import path as data_path

from .reference_values import COUNTRIES


@pytest.fixture(scope="session")
def spain_2015():
    return data_path("institutions_spain_2015-2018.csv")


@pytest.fixture(scope="session")
def spain_2006():
    return data_path("institutions_spain_2006-2009.csv")


@pytest.fixture(scope="session")
def international():
    return data_path("institutions_international_2015-2018.csv")


@pytest.fixture(scope="session")
def technical():
    return data_path("institutions_technical_2015-2018.csv")


@pytest.fixture(scope="session")
def spain_researchers():
    return data_path("researchers_spain.csv")


@pytest.fixture(scope="session")
def populations():
    return data_path("populations.csv")


@pytest.fixture(scope="session")
def world_researchers(tmp_path_factory, spain_researchers):
    """The bundled Spanish list plus placeholder rows for every other country."""
    out = tmp_path_factory.mktemp("researchers") / "researchers_world.csv"
    text = spain_researchers.read_text(encoding="utf-8")
    buf = io.StringIO()
    buf.write(text if text.endswith("\n") else text + "\n")
    for country, n, _, _ in COUNTRIES:
        if country == "España":
            continue
        for i in range(n):
            buf.write(f"{country}-{i},,,{country},,\n")
    out.write_text(buf.getvalue(), encoding="utf-8")
    return out


@dataclass
class CliResult:
    code: int
    out: str
    err: str


@pytest.fixture
def run_cli(capsys):
    def run(*argv):
        try:
            code = cli.main([str(a) for a in argv])
        except SystemExit as exc:
            code = exc.code
        captured = capsys.readouterr()
        return CliResult(code, captured.out, captured.err)

    return run


def pytest_terminal_summary(terminalreporter):
    from . import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for number in sorted(test_acceptance.RESULTS):
            terminalreporter.write_line(test_acceptance.RESULTS[number])
