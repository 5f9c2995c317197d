from __future__ import annotations

import pytest

from codelineage import kernels
from codelineage.demo import CorpusBuilder


@pytest.fixture(params=sorted(kernels.backends()))
def backend(request):
    """Each importable kernel implementation in turn."""
    return kernels.backends()[request.param]


@pytest.fixture
def builder(tmp_path):
    return CorpusBuilder(tmp_path / "corpus")


def pytest_terminal_summary(terminalreporter):
    """One PASS/FAIL line per acceptance criterion."""
    lines = []
    for outcome in ("passed", "failed", "error"):
        for report in terminalreporter.stats.get(outcome, []):
            props = dict(getattr(report, "user_properties", ()))
            if "criterion" in props and report.when == "call":
                lines.append((props["criterion"], "PASS" if outcome == "passed" else "FAIL"))
    if lines:
        terminalreporter.section("acceptance criteria")
        for label, verdict in sorted(lines, key=lambda x: int(x[0].split()[0])):
            terminalreporter.write_line(f"{verdict}  criterion {label}")
