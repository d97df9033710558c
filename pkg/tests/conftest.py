import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from blocktoeplitz import MatrixSymbol  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


@pytest.fixture
def w():
    return MatrixSymbol.scalar({1: 1.0})


@pytest.fixture
def wbar():
    return MatrixSymbol.scalar({-1: 1.0})


@pytest.fixture
def cancel_pair(w, wbar):
    """``F = [[w, w], [0, 0]]``, ``G = [[conj w, 0], [-conj w, 0]]``."""
    F = MatrixSymbol.from_entries([[w, w], [None, None]])
    G = MatrixSymbol.from_entries([[wbar, None], [-wbar, None]])
    return F, G


#: ``{criterion number: (passed, detail)}`` filled by the acceptance suite.
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
