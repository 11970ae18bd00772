import json
from pathlib import Path

import pytest

from eventir.synthetic import generate_synthetic

_ACCEPTANCE: dict[str, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(cid, title): acceptance criterion id and title")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    marker = report.user_properties and dict(report.user_properties).get("acceptance")
    if marker:
        cid, title = marker
        prev = _ACCEPTANCE.get(cid, ("PASS", title))[0]
        outcome = "PASS" if report.outcome == "passed" and prev == "PASS" else "FAIL"
        _ACCEPTANCE[cid] = (outcome, title)


@pytest.fixture(autouse=True)
def _record_acceptance(request, record_property):
    m = request.node.get_closest_marker("acceptance")
    if m is not None:
        record_property("acceptance", m.args)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(_ACCEPTANCE, key=lambda c: int(c.lstrip("AC"))):
        outcome, title = _ACCEPTANCE[cid]
        terminalreporter.write_line(f"[{outcome}] {cid} {title}")


def write_jsonl(path: Path, records) -> Path:
    path.write_text("".join(json.dumps(r) + "\n" for r in records), encoding="utf-8")
    return path


@pytest.fixture(scope="session")
def synthetic(tmp_path_factory):
    return generate_synthetic(tmp_path_factory.mktemp("syn"), seed=42, n_articles=200, n_queries=50)


@pytest.fixture(scope="session")
def synthetic_adversarial(tmp_path_factory):
    return generate_synthetic(tmp_path_factory.mktemp("syn_adv"), seed=42, n_articles=200, n_queries=50,
                              adversarial=True)
