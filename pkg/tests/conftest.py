import gzip
import json
import os
import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

from jsjcalc.textformat import parse  # noqa: E402

DATA = Path(__file__).parent / "data"
CENSUS_FILE = DATA / "census.jsjg.gz"
CENSUS_MANIFEST = DATA / "census_manifest.json"

settings.register_profile("default", deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def split_documents(text: str) -> list:
    docs, current = [], []
    for line in text.splitlines(keepends=True):
        if line.startswith("manifold ") and current:
            docs.append("".join(current))
            current = []
        current.append(line)
    if current:
        docs.append("".join(current))
    return docs


def load_census_texts() -> list:
    with gzip.open(CENSUS_FILE, "rt", encoding="utf-8") as fh:
        return split_documents(fh.read())


def census_manifest() -> dict:
    return json.loads(CENSUS_MANIFEST.read_text())


def _tuples(v):
    return tuple(_tuples(x) for x in v) if isinstance(v, list) else v


def census_bounds(**overrides):
    from jsjcalc.oracle import EnumerationBounds
    fields = {k: _tuples(v) for k, v in census_manifest()["bounds"].items()}
    return EnumerationBounds(**{**fields, **overrides})


def load(name: str):
    return parse((DATA / name).read_text(encoding="utf-8"))


@pytest.fixture(scope="session")
def census_texts():
    return load_census_texts()


@pytest.fixture(scope="session")
def census(census_texts):
    return [parse(t) for t in census_texts]


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
