from __future__ import annotations

import random
from functools import reduce
from math import gcd

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from fibercalc.monodromy import CurveClass, Letter

settings.register_profile(
    "repo",
    derandomize=True,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.load_profile("repo")


def primitive(v):
    d = reduce(gcd, v)
    return tuple(x // d for x in v)


@st.composite
def curve_classes(draw, g, bound=3):
    v = draw(
        st.lists(st.integers(-bound, bound), min_size=2 * g, max_size=2 * g).filter(any)
    )
    return CurveClass(g, primitive(v))


@st.composite
def letters(draw, g, max_power=3):
    c = draw(curve_classes(g))
    p = draw(st.integers(-max_power, max_power).filter(lambda x: x != 0))
    return Letter(c, p)


def random_curve(rng: random.Random, g: int, bound: int = 3) -> CurveClass:
    while True:
        v = [rng.randint(-bound, bound) for _ in range(2 * g)]
        if any(v):
            return CurveClass(g, primitive(v))


@pytest.fixture
def rng():
    return random.Random(20261016)
