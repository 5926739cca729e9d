"""Shared fixtures and the acceptance-criteria summary printer."""

import pytest

# registry filled by tests/test_acceptance.py: number -> (description, passed)
CRITERIA: dict = {}


def record_criterion(number, description, passed):
    """Register one acceptance result; assertion still lives in the test."""
    CRITERIA[number] = (description, bool(passed))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not CRITERIA:
        return
    tw = terminalreporter
    tw.section("acceptance criteria")
    def order(key):
        digits = "".join(ch for ch in str(key) if ch.isdigit())
        return (int(digits) if digits else 0, str(key))

    for number in sorted(CRITERIA, key=order):
        description, passed = CRITERIA[number]
        status = "PASS" if passed else "FAIL"
        tw.write_line(f"criterion {number}: {status} — {description}")


@pytest.fixture
def criterion():
    return record_criterion


@pytest.fixture(scope="session")
def lda():
    from fermisurf.xc import make_functional

    return make_functional("lda_exchange")
