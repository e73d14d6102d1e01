import numpy as np
import pytest

from freqkelly.returns_model import new_joint_distribution, with_riskless


@pytest.fixture
def stock_cash():
    """Stock returning +50% or -30% with equal odds, plus cash at r = 0."""
    stock = new_joint_distribution([[0.5], [-0.3]], [0.5, 0.5], ["stock"])
    return with_riskless(stock, 0.0)


@pytest.fixture
def two_point_stock():
    return new_joint_distribution([[0.5], [-0.3]], [0.5, 0.5], ["stock"])


@pytest.fixture
def rng():
    return np.random.default_rng(20240214)


ACCEPTANCE_LINES = pytest.StashKey[list]()


@pytest.fixture
def acceptance_report(request):
    """Print one pass/fail line for a criterion and keep it for the session summary."""
    lines = request.config.stash.setdefault(ACCEPTANCE_LINES, [])

    def report(number, passed, detail):
        status = "SKIP" if passed is None else "PASS" if passed else "FAIL"
        line = f"criterion {number}: {status}  {detail}"
        lines.append(line)
        print(line)
        return passed

    return report


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE_LINES, [])
    if lines:
        terminalreporter.section("acceptance")
        for line in lines:
            terminalreporter.write_line(line)
