from functools import lru_cache

import numpy as np
import pytest

from frobcheck.registry import ALL_BUILTINS, ADE_BUILTINS, is_asserted, load_manifold
from frobcheck.rotation import rotation_data
from frobcheck.sampling import sample_frames, sample_points_and_jets


@lru_cache(maxsize=None)
def spec_of(name):
    return load_manifold(name)


@lru_cache(maxsize=None)
def frames_of(name, n=3, seed=11):
    return tuple(s.frame for s in sample_frames(spec_of(name), n, seed))


@lru_cache(maxsize=None)
def rot_of(name, n=3, seed=11):
    return tuple(rotation_data(spec_of(name), f) for f in frames_of(name, n, seed))


@lru_cache(maxsize=None)
def pairs_of(name, n=5, seed=3):
    return tuple(sample_points_and_jets(spec_of(name), n, seed))


@pytest.fixture(params=ALL_BUILTINS)
def manifold(request):
    return request.param


@pytest.fixture(params=ADE_BUILTINS)
def ade(request):
    return request.param


@pytest.fixture(params=[m for m in ALL_BUILTINS if is_asserted(spec_of(m))])
def asserted_manifold(request):
    return request.param


def cabs(x):
    return float(abs(complex(x)))


def amax(a):
    return float(np.abs(np.array(a, dtype=complex)).max())


ACCEPTANCE_LINES = {}


def record_acceptance(number, passed, detail):
    line = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)
    return line


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
