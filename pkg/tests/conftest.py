import sys
from fractions import Fraction as F

import pytest
from hypothesis import settings

from kappamu.backend import ScalarBackend
from kappamu.catalog import model_heisenberg, model_kappa_mu, model_t1n
from kappamu.nullity import pipeline

settings.register_profile("kmu", max_examples=25, deadline=None, derandomize=True)
settings.load_profile("kmu")


class Model:
    """Descriptor plus its pipeline outputs."""

    def __init__(self, desc):
        self.desc = desc
        self.m, self.p = desc.manifold, desc.pack
        self.conn, self.curv, self.h, self.cert = pipeline(self.p, self.m)

    @property
    def args(self):
        return self.p, self.m, self.h, self.cert


_CACHE = {}


def get_model(key):
    if key not in _CACHE:
        kind, *params = key
        if kind == "t1n":
            desc = model_t1n(F(params[0]), params[1] if len(params) > 1 else 1)
        elif kind == "kmu":
            desc = model_kappa_mu(params[0], F(params[1]), F(params[2]))
        else:
            desc = model_heisenberg(params[0])
        _CACHE[key] = Model(desc)
    return _CACHE[key]


@pytest.fixture
def exact():
    return ScalarBackend()


@pytest.fixture
def heis3():
    return get_model(("heisenberg", 1))


@pytest.fixture
def heis5():
    return get_model(("heisenberg", 2))


@pytest.fixture
def t1n_2():
    return get_model(("t1n", "2"))


@pytest.fixture
def t1n_m1():
    return get_model(("t1n", "-1"))


@pytest.fixture
def einstein5():
    """n = 2, kappa = 207/256, mu = -9/8: canonical Sasakian metric is Einstein."""
    return get_model(("kmu", 2, "207/256", "-9/8"))


@pytest.fixture
def weyl5():
    """n = 2, c = 25/16: alpha = 25 exceeds 4(1 + 1/n)^2 = 9."""
    return get_model(("t1n", "25/16", 2))


@pytest.fixture
def para1425():
    return get_model(("kmu", 1, "-1425/256", "25/8"))


@pytest.fixture
def sas_ab82():
    """kappa = -5/4, mu = -3: 2 - mu +- 2 lambda = 8, 2."""
    return get_model(("kmu", 1, "-5/4", "-3"))


@pytest.fixture
def para_ab1m1():
    """kappa = 3/4, mu = 2: 2 - mu +- 2 lambda = 1, -1."""
    return get_model(("kmu", 1, "3/4", "2"))


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(mod.RESULTS, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
