import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from simmap.corpus import CoOccurrenceMatrix, Corpus  # noqa: E402
from simmap.synthetic import random_connected_counts  # noqa: E402

_RESULTS = []


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")
    config.addinivalue_line("markers", "slow: takes more than a few seconds")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and not report.passed):
        detail = "; ".join(f"{k}={v}" for k, v in item.user_properties)
        _RESULTS.append((marker.args[0], marker.args[1], report.outcome, detail))


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, outcome, detail in sorted(_RESULTS, key=lambda r: int(r[0])):
        status = "PASS" if outcome == "passed" else "FAIL"
        line = f"AC{number} {status}  {title}"
        if detail:
            line += f"  [{detail}]"
        terminalreporter.write_line(line)


def make_corpus(counts, prefix="i"):
    ids = tuple(f"{prefix}{k}" for k in range(len(counts)))
    return Corpus.from_matrix(CoOccurrenceMatrix(ids, np.asarray(counts)))


@pytest.fixture
def random_counts():
    return lambda n, seed, **kw: random_connected_counts(n, seed=seed, **kw)
