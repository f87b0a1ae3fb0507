from __future__ import annotations

from pathlib import Path

import pytest

from gridshed.network import Network, parse_case
from gridshed.risk import RiskTable, load_risk_table

CORPUS_DIR = Path(__file__).parent / "data" / "corpus"
GOLDEN_DIR = Path(__file__).parent / "golden"

CORPUS_NAMES = sorted(p.stem for p in CORPUS_DIR.glob("*.case"))
SMALL_CORPUS = [
    name
    for name in CORPUS_NAMES
    if name != "medium16"  # above the enumeration-oracle size cut
]


def load_corpus(name: str) -> tuple[Network, RiskTable]:
    network = parse_case((CORPUS_DIR / f"{name}.case").read_text())
    table = load_risk_table((CORPUS_DIR / f"{name}.risk").read_text(), network)
    return network, table


@pytest.fixture(scope="session")
def corpus() -> dict[str, tuple[Network, RiskTable]]:
    return {name: load_corpus(name) for name in CORPUS_NAMES}


@pytest.fixture(scope="session")
def triangle(corpus):
    return corpus["triangle"]


@pytest.fixture(scope="session")
def two_bus(corpus):
    return corpus["two_bus"]


@pytest.fixture(scope="session")
def bundled_case() -> tuple[Network, RiskTable]:
    from importlib import resources

    case_text = resources.files("gridshed.data").joinpath("case73.case").read_text()
    risk_text = resources.files("gridshed.data").joinpath("case73.risk").read_text()
    network = parse_case(case_text)
    return network, load_risk_table(risk_text, network)
