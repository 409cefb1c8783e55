import numpy as np
import pytest

from manipsim.randomizer import randomize_config

P2 = np.pi / 2

TABLE3 = np.array([
    [P2, 0.89, 0, 0.14, 2],
    [P2, 0.83, P2, 0.29, 1],
    [P2, 0.88, 0, 0.22, 1],
    [P2, 0.85, P2, 0.24, 1],
    [0, 0.86, P2, 0.13, 2],
    [0, 0.89, 0, 0.23, 1],
    [P2, 0.89, P2, 0.12, 1],
    [-P2, 0.86, 0, 0.29, 1],
])

TABLE4 = np.array([
    [0, 0.84, 0, 0.17, 2],
    [0, 0.82, P2, 0.26, 0],
    [P2, 0.82, P2, 0.21, 2],
    [0, 0.85, -P2, 0.23, 2],
    [P2, 0.83, -P2, 0.26, 1],
    [0, 0.87, 0, 0.12, 1],
    [P2, 0.88, P2, 0.27, 1],
    [-P2, 0.85, P2, 0.20, 1],
])

ZERO_JOINTS = np.zeros((8, 5))
ZERO_BASE = np.zeros((2, 4))


@pytest.fixture
def table3():
    return TABLE3.copy()


@pytest.fixture
def table4():
    return TABLE4.copy()


def random_tables(seed):
    """Random chain with non-zero biases, so no joint sits at a symmetric point."""
    dh, jt, bt = randomize_config(seed)
    rng = np.random.default_rng(10_000 + seed)
    j = jt.as_array()
    j[:, 2] = rng.uniform(-0.3, 0.3, 8)
    b = bt.as_array()
    b[:, 1] = rng.uniform(-0.2, 0.2, 2)
    return dh.as_array(), j, b


# one summary line per acceptance criterion
_criteria: dict[int, list] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    n, label = marker.args
    entry = _criteria.setdefault(n, [label, True, 0])
    if rep.failed:
        entry[1] = False
    if rep.when == "call":
        entry[2] += 1


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        label, ok, count = _criteria[n]
        status = "PASS" if ok and count else "FAIL"
        terminalreporter.write_line(f"criterion {n}: {status}  {label}")
