import os

import pytest

ACCEPTANCE_LINES = []


def pytest_addoption(parser):
    parser.addoption("--run-long", action="store_true", default=False,
                     help="run full-scale delta = 1e6 tests")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--run-long") or os.environ.get("JCSEARCH_RUN_LONG") == "1":
        return
    skip = pytest.mark.skip(reason="long run; use --run-long")
    for item in items:
        if "long" in item.keywords:
            item.add_marker(skip)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def fifty_level_trace():
    """Cached N=50, j=10, s=32 runs over uniform photons 0..9, keyed by (delta, t_end/tau)."""
    from jcsearch import SearchConfig, run_search

    cache = {}

    def get(delta, t_end_over_tau=2.0):
        key = (float(delta), float(t_end_over_tau))
        if key not in cache:
            cfg = SearchConfig.create(50, 10, 32, delta)
            cache[key] = cfg, run_search(cfg, t_end=t_end_over_tau * cfg.tau)
        return cache[key]

    return get
