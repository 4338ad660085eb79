import functools
from dataclasses import replace

import pytest

from circumnav import load_config, run

# filled by test_acceptance.py, printed after the run
ACCEPTANCE_LINES: list[str] = []


@functools.lru_cache(maxsize=None)
def preset_run(name: str, **overrides):
    cfg = replace(load_config(name), **overrides) if overrides else load_config(name)
    return run(cfg)


@pytest.fixture(scope="session")
def runs():
    return preset_run


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
