import sys
from pathlib import Path

import numpy as np
import pytest

from mabcvk.keys import KeyPair, generate_keypair, make_context

sys.path.insert(0, str(Path(__file__).parent))

# Demo keys from the worked example; valid for "WORLD" but not for every byte.
DEMO = (263, 317)
# 15-bit pair valid at 6-bit blocks: 31469 follows the 72-long gap after 31397.
WIDE6 = (31397, 31469)
# Smallest pair valid for all 8-bit blocks: k2 follows the first prime gap >= 256.
WIDE8 = (436273009, 436273291)


@pytest.fixture
def demo_kp():
    return KeyPair(*DEMO, "1/10")


@pytest.fixture
def demo_ctx(demo_kp):
    return make_context(demo_kp, 8)


@pytest.fixture(scope="session")
def wide8_ctx():
    return make_context(KeyPair(*WIDE8, "1/10"), 8)


@pytest.fixture(scope="session")
def small_ctx():
    """Generated 14-bit key valid at 4-bit blocks."""
    kp = generate_keypair(14, "3/10", 4, np.random.default_rng(2024))
    return make_context(kp, 4)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# --- acceptance summary ------------------------------------------------------

_CRITERIA = []


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(label, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    if report.when == "call" or (report.when == "setup" and not report.passed):
        title = mark.args[1]
        if hasattr(item, "callspec"):
            title += f" [{item.callspec.id}]"
        _CRITERIA.append((str(mark.args[0]), title, report.passed))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for label, title, passed in _CRITERIA:
        terminalreporter.write_line(f"criterion {label:<3} {'PASS' if passed else 'FAIL'}  {title}")
