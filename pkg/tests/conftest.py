from __future__ import annotations

import shutil
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

ROOT = Path(__file__).resolve().parent.parent
DEMO = ROOT / "demo" / "memory"
EXTRA = ROOT / "demo" / "extra"

_criteria: dict[int, tuple[str, list[str]]] = {}


@pytest.fixture(scope="session")
def demo_kb():
    from satis import load_memory

    kb, diags = load_memory(DEMO)
    assert not [d for d in diags if d.is_error]
    return kb


@pytest.fixture
def demo_copy(tmp_path):
    """A writable copy of the demo memory."""
    dst = tmp_path / "memory"
    shutil.copytree(DEMO, dst)
    return dst


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion checked by a test")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    marker = getattr(report, "_criterion", None)
    if marker is None:
        return
    n, title = marker
    _criteria.setdefault(n, (title, []))[1].append(report.outcome)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is not None:
        report._criterion = tuple(mark.args)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        title, outcomes = _criteria[n]
        verdict = "PASS" if outcomes and all(o == "passed" for o in outcomes) else "FAIL"
        terminalreporter.write_line(f"{verdict} criterion {n}: {title}")
