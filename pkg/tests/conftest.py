import math
from pathlib import Path

import pytest

from phisum.semiring import SEMIRINGS

FIXTURES = Path(__file__).resolve().parents[1] / "src" / "phisum" / "fixtures"

EXACT = ("boolean", "tropical-min", "tropical-max", "count")


def same(sr, x, y, rel=1e-9, log_abs=1e-6):
    """Equality at the tolerance each semiring is held to."""
    if sr.name in EXACT:
        return x == y
    if x == y:
        return True
    if sr.name == "log":
        return math.isclose(x, y, rel_tol=0.0, abs_tol=log_abs)
    return math.isclose(x, y, rel_tol=rel, abs_tol=1e-12)


@pytest.fixture
def fixtures_dir():
    return FIXTURES


@pytest.fixture(params=sorted(SEMIRINGS))
def semiring(request):
    return SEMIRINGS[request.param]


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
