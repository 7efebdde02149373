import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from hystereact.relay import BranchPair, affine_branch, cubic_branch_pair


@pytest.fixture
def unit_affine():
    """alpha=0, beta=1 with identity branches."""
    return BranchPair(0.0, 1.0, affine_branch(1.0, 0.0, hi=1.0), affine_branch(1.0, 0.0, lo=0.0))


@pytest.fixture(scope="session")
def cubic():
    return cubic_branch_pair()


def pytest_terminal_summary(terminalreporter):
    from verdicts import LINES
    if LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(LINES, key=lambda kv: kv[0]):
            terminalreporter.write_line(line)
