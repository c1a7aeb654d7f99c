from __future__ import annotations

import re
from pathlib import Path

import numpy as np
import pytest

from support import FIXTURES

_CRITERION = re.compile(r"test_\w*acceptance\.py::test_c(\d+)")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One verdict line per release criterion exercised this run."""
    verdicts: dict[int, str] = {}
    for outcome in ("passed", "failed", "error"):
        for report in terminalreporter.stats.get(outcome, []):
            match = _CRITERION.search(getattr(report, "nodeid", ""))
            if not match:
                continue
            number = int(match.group(1))
            if outcome == "passed" and getattr(report, "when", "call") != "call":
                continue
            if outcome != "passed":
                verdicts[number] = "FAIL"
            else:
                verdicts.setdefault(number, "PASS")
    if verdicts:
        terminalreporter.write_sep("-", "acceptance criteria")
        for number in sorted(verdicts):
            terminalreporter.write_line(f"criterion {number}: {verdicts[number]}")


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)
