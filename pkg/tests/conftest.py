from __future__ import annotations

import json
import os
from importlib import resources
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

ROOT = Path(__file__).resolve().parents[1]
FIXTURES = ROOT / "fixtures"

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", deadline=None, max_examples=1000, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

CELECOXIB = "CC1=CC=C(C=C1)C2=CC(=NN2C3=CC=C(C=C3)S(=O)(=O)N)CF"
CELECOXIB_MOD = "CC1=CC=C(C=C1)C2=CC(=NN2C3=CC=C(C=C3)S(=O)(=O)NC(C)C)CF"
JAK2 = "CC1=C(C=C(C=C1)NC(=O)C2=CC=C(C=C2)CN3CCN(CC3)C)NC4=NC=CC(=N4)C5=CN=CC=C5"


def load_drugs() -> list[tuple[str, str]]:
    text = resources.files("validmol.data").joinpath("drugs50.smi").read_text()
    return [tuple(line.split("\t")) for line in text.splitlines() if line.strip()]  # type: ignore[misc]


@pytest.fixture(scope="session")
def drugs() -> list[tuple[str, str]]:
    return load_drugs()


@pytest.fixture(scope="session")
def fixture_tasks() -> list[dict]:
    return [json.loads(line) for line in (FIXTURES / "tasks.jsonl").read_text().splitlines()]


@pytest.fixture(scope="session")
def cassette() -> Path:
    return FIXTURES / "cassettes" / "cases.jsonl"


# ---- acceptance summary: one PASS/FAIL line per criterion -------------------

_criteria: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by a test")


def pytest_collection_finish(session):
    for item in session.items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            number, title = mark.args
            _criteria.setdefault(number, {"title": title, "tests": {}})["tests"][item.nodeid] = None


def pytest_runtest_logreport(report):
    for entry in _criteria.values():
        if report.nodeid in entry["tests"]:
            tests = entry["tests"]
            if report.failed:
                tests[report.nodeid] = "failed"  # sticky across setup/call/teardown
            elif report.when == "call" and tests[report.nodeid] is None:
                tests[report.nodeid] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        entry = _criteria[number]
        outcomes = list(entry["tests"].values())
        if any(o == "failed" for o in outcomes):
            verdict = "FAIL"
        elif outcomes and all(o == "passed" for o in outcomes):
            verdict = "PASS"
        else:
            verdict = "NOT RUN"
        terminalreporter.write_line(f"criterion {number}: {verdict}  {entry['title']}")
