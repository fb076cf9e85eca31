import numpy as np
import pytest

from lidskii_evolve.operators import composite_operator, make_grid

N_CRITERIA = 14


def pytest_configure(config):
    config._acceptance = {}


@pytest.fixture
def record(request):
    """Register the outcome of one acceptance case: ``record(k, passed, detail)``."""
    store = request.config._acceptance

    def _record(criterion: int, passed: bool, detail: str):
        store.setdefault(criterion, []).append((bool(passed), detail))
        return passed

    return _record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    store = getattr(config, "_acceptance", {})
    if not store:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for k in range(1, N_CRITERIA + 1):
        cases = store.get(k)
        if not cases:
            terminalreporter.write_line(f"criterion {k:2d}: FAIL (not run or errored)")
            continue
        ok = all(p for p, _ in cases)
        worst = next((d for p, d in cases if not p), cases[-1][1])
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'} ({len(cases)} cases; {worst})")


@pytest.fixture(scope="session")
def grid64():
    return make_grid(0.0, 1.0, 64)


@pytest.fixture(scope="session")
def composite64(grid64):
    return composite_operator(-1.0, 1.0, 0.5, grid64)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
