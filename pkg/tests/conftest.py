import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

ACCEPTANCE_LINES = []


@pytest.fixture
def criterion(request):
    """Record one acceptance line; the outcome is filled in after the test runs."""
    entry = {"name": request.node.name, "label": None, "detail": ""}
    ACCEPTANCE_LINES.append(entry)

    def record(label, detail=""):
        entry["label"] = label
        entry["detail"] = detail

    yield record
    rep = getattr(request.node, "rep_call", None)
    entry["passed"] = bool(rep and rep.passed)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for entry in ACCEPTANCE_LINES:
        status = "PASS" if entry.get("passed") else "FAIL"
        label = entry["label"] or entry["name"]
        detail = f" ({entry['detail']})" if entry["detail"] else ""
        terminalreporter.write_line(f"[{status}] {label}{detail}")
