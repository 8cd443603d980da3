import os
import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings, strategies as st

sys.path.insert(0, os.path.dirname(__file__))

import relaxpath  # noqa: E402
from relaxpath import _kernels  # noqa: E402
from oracles import FAMILIES  # noqa: E402

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

TOY = dict(u=[1 / 2, 1 / 8, 1 / 12], q=[1 / 4, 1 / 3, 1 / 36], m=[1, 2, 3])
UNIF3 = dict(u=[1 / 3] * 3, q=[0.5, 0.3, 0.2], m=[1, 1, 1])
PAIR = dict(u=[0.5, 0.5], q=[0.7, 0.3], m=[1, 1])
SPARSE4 = dict(u=[0.4, 0.25, 0.2, 0.15], q=[0.7, 0.3, 0.0, 0.0], m=[1, 1, 1, 1])


@pytest.fixture
def toy():
    return relaxpath.validate_instance(**TOY)


@pytest.fixture
def unif3():
    return relaxpath.validate_instance(**UNIF3)


@pytest.fixture
def pair():
    return relaxpath.validate_instance(**PAIR)


@pytest.fixture
def sparse4():
    return relaxpath.validate_instance(**SPARSE4)


@pytest.fixture(params=_kernels.available_backends())
def backend(request):
    prev = _kernels.set_backend(request.param)
    yield request.param
    _kernels.set_backend(prev)


def make_instance(family, seed, n, with_m=True):
    rng = np.random.default_rng(seed)
    u, q, m = FAMILIES[family](rng, n, with_m=with_m)
    return relaxpath.validate_instance(u, q, m)


@st.composite
def instances(draw, family="dense", n_min=1, n_max=12, with_m=True):
    n = draw(st.integers(n_min, n_max))
    seed = draw(st.integers(0, 2**32 - 1))
    return make_instance(family, seed, n, with_m)


def same_path(p1, p2, tol=1e-9):
    """Breakpoints equal within ``tol`` (relative to max(1, |x|)) with the
    same net sign change at each breakpoint."""
    if p1.kappa != p2.kappa:
        return False
    for a, b in zip(p1.breakpoints, p2.breakpoints):
        if abs(a.nu - b.nu) > tol * max(1.0, abs(a.nu)):
            return False
        if abs(a.mu - b.mu) > tol * max(1.0, abs(a.mu)):
            return False
        if _net(a) != _net(b):
            return False
    return np.isinf(p1.nu_inf) == np.isinf(p2.nu_inf)


def _net(bp):
    out = {}
    for t in bp.transitions:
        out[t.coord] = out.get(t.coord, 0) + t.delta
    return {k: v for k, v in out.items() if v}
