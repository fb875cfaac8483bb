import os
import sys

import pytest
from hypothesis import settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@pytest.fixture(scope="session")
def fig3():
    from mdsearch.channels import ChannelModel

    return ChannelModel.linear_bsc(0.7, 0.1)


@pytest.fixture(scope="session")
def bsc01():
    from mdsearch.channels import ChannelModel

    return ChannelModel.linear_bsc(0.0, 0.1)


ACCEPTANCE = {}


@pytest.fixture
def record():
    """Log one acceptance line; returns the verdict so tests can assert on it."""

    def _record(k, ok, detail):
        line = f"criterion {k:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE[k] = line
        print(line)
        return ok

    return _record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.write_sep("=", "acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])
