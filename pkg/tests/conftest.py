import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from nlch import Domain, PotentialSpec, build_kernel  # noqa: E402

DEFAULT_KERNEL = {"family": "gaussian", "amplitude": 1.0, "width": 0.5, "target_cJ": 1.0}


@pytest.fixture
def dom16():
    return Domain.make(16)


@pytest.fixture
def setup16(dom16):
    return dom16, build_kernel(dom16, DEFAULT_KERNEL), PotentialSpec()


@pytest.fixture
def setup64():
    d = Domain.make(64)
    return d, build_kernel(d, DEFAULT_KERNEL), PotentialSpec()


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n][1])
