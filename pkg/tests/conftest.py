import numpy as np
import pytest

from botorus import smooth_random_potential

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion checked by this test")
    config.addinivalue_line("markers", "slow: takes more than a few seconds")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    key = (mark.args[0], mark.args[1])
    failed = rep.failed or (rep.when == "call" and rep.skipped)
    if rep.when == "call" or failed:
        _CRITERIA[key] = _CRITERIA.get(key, True) and not failed


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for (num, title), ok in sorted(_CRITERIA.items()):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {num:2d}  {title}")


def random_family(count, seed, max_modes=8):
    """Smooth zero-mean potentials with ``M <= max_modes`` and L2 norm in [0.2, 2]."""
    rng = np.random.default_rng(seed)
    return [smooth_random_potential(rng, int(rng.integers(1, max_modes + 1))) for _ in range(count)]


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
