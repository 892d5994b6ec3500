import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from layered_fsi import GeometryConfig, build_forms  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def small_forms():
    return build_forms(GeometryConfig(nz=4, nr_f=4, nr_s=2))


@pytest.fixture(scope="session")
def tiny_forms():
    return build_forms(GeometryConfig(nz=2, nr_f=2, nr_s=1))


def pytest_terminal_summary(terminalreporter):
    lines = {}
    for mod in list(sys.modules.values()):
        lines.update(getattr(mod, "ACCEPTANCE_RESULTS", None) or {})
    if lines:
        terminalreporter.section("acceptance criteria")
        for k in sorted(lines):
            terminalreporter.write_line(lines[k])
