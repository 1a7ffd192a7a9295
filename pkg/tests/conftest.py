from __future__ import annotations

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from vilenkin.group import cyclic_group, make_group, walsh
from vilenkin.system import Signal

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def random_signal(spec, seed=0):
    rng = np.random.default_rng(seed)
    return Signal(spec, rng.standard_normal(spec.size) + 1j * rng.standard_normal(spec.size))


@pytest.fixture
def w3():
    return walsh(3)


@pytest.fixture
def g232():
    return make_group([2, 3, 2])


@pytest.fixture(params=[walsh(5), make_group([2, 3, 2]), cyclic_group([2, 3, 4], 4), make_group([3, 3, 3])],
                ids=["walsh5", "m232", "m2342", "m333"])
def small_group(request):
    return request.param


ACCEPTANCE_LINES: dict[int, str] = {}


def record_criterion(number: int, passed: bool, detail: str) -> None:
    line = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
